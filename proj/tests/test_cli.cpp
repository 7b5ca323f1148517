#include "borelheat/cli.hpp"
#include "borelheat/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace borelheat;
using nlohmann::json;

namespace {

const std::string kData = BORELHEAT_DATA_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "borelheat");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch_file(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / "borelheat_cli_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("model file parsing") {
    const auto f = cli::parse_model_file("dimension = 1\nomega = 2  # comment\nphi = exp(-x^2/8)\ndomain.L = 9\n");
    CHECK(f.omega == 2.0);
    CHECK(f.phi == "exp(-x^2/8)");
    CHECK(f.domain_half_width == 9.0);
    CHECK_THROWS_AS(cli::parse_model_file("omega = two\n"), ParseError);
    CHECK_THROWS_AS(cli::parse_model_file("phi = log(x)\nomega = 1\n"), ParseError);
}

TEST_CASE("series file parsing") {
    const auto s = cli::parse_series("# comment\n0 1\n3 -2.5\n");
    CHECK(s.coeffs == std::vector<double>{1.0, 0.0, 0.0, -2.5});
}

TEST_CASE("sha256") {
    CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("coeffs: free model has vanishing higher orders") {
    const auto r = run({"--model", kData + "/free.model", "coeffs", "--r-max", "8", "--x", "0.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["schema"] == "borelheat.coeffs.v1");
    CHECK(j["tool_version"] == cli::kToolVersion);
    CHECK(j["config_digest"].get<std::string>().size() == 64);
    const auto a = j["evaluations"][0]["a"].get<std::vector<double>>();
    CHECK(a[0] == 1.0);
    for (size_t i = 1; i < a.size(); ++i) CHECK(a[i] == 0.0);
}

TEST_CASE("coeffs: OU table matches the Mehler Taylor coefficients") {
    const auto r = run({"--model", kData + "/ou.model", "coeffs", "--r-max", "10", "--y", "-1", "--x", "1"});
    REQUIRE(r.code == 0);
    const auto a = json::parse(r.out)["evaluations"][0]["a"].get<std::vector<double>>();
    // The OU potential is x^2 - 1, i.e. the Mehler series times exp(t).
    auto m = oracle::mehler_series(2.0, 1.0, -1.0, 10);
    std::vector<double> expect(11, 0.0);
    double f = 1.0;
    for (int j = 0; j <= 10; ++j) {
        if (j > 0) f *= j;
        for (int r2 = 0; r2 + j <= 10; ++r2) expect[r2 + j] += m[r2] / f;
    }
    for (int i = 0; i <= 10; ++i) CHECK(std::abs(a[i] - expect[i]) <= 1e-8 * std::abs(expect[i]) + 1e-14);
}

TEST_CASE("malformed model file exits with code 2") {
    const auto bad = scratch_file("bad.model", "omega = = 3\n");
    const auto r = run({"--model", bad.string(), "coeffs"});
    CHECK(r.code == 2);
    CHECK(r.err.find("ParseError") != std::string::npos);
    CHECK(run({"--model", "/nonexistent/file.model", "coeffs"}).code == 2);
    CHECK(run({"coeffs", "--bogus-flag"}).code == 2);
}

TEST_CASE("borel-sum: Euler series") {
    const auto r = run({"borel-sum", "--series", kData + "/euler.series", "--t", "0.1", "--orders", "8", "8"});
    REQUIRE(r.code == 0);
    const auto rec = json::parse(r.out)["records"][0];
    CHECK(std::abs(rec["value"].get<double>() - oracle::euler_integral(0.1)) < 1e-8);
}

TEST_CASE("borel-sum: polynomial series is summed exactly") {
    const auto r =
        run({"borel-sum", "--series", kData + "/polynomial.series", "--t", "0.2", "--orders", "2", "0"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["records"][0]["value"].get<double>() == doctest::Approx(0.82).epsilon(1e-14));
}

TEST_CASE("borel-sum: pole on the contour is a flagged record") {
    const auto geo = scratch_file("half.series", "0 1\n1 0.5\n2 0.5\n3 0.75\n");  // r! / 2^r
    const auto r = run({"borel-sum", "--series", geo.string(), "--t", "0.1", "--orders", "0", "1"});
    CHECK(r.code == 0);
    const auto rec = json::parse(r.out)["records"][0];
    CHECK(rec["flagged"] == true);
}

TEST_CASE("validate: OU and free reports") {
    const auto ou = run({"--model", kData + "/ou.model", "validate"});
    REQUIRE(ou.code == 0);
    const auto c = json::parse(ou.out)["consistency"];
    CHECK(c["chapman_kolmogorov"].get<double>() <= 1e-4);
    CHECK(c["mass"].get<double>() <= 1e-4);

    const auto fr = run({"--model", kData + "/free.model", "validate"});
    REQUIRE(fr.code == 0);
    const auto f = json::parse(fr.out)["consistency"];
    CHECK(f["chapman_kolmogorov"].get<double>() <= 1e-10);
    CHECK(f["mass"].get<double>() <= 1e-10);
    CHECK(f["detailed_balance"].get<double>() <= 1e-10);
}

TEST_CASE("lamperti: roundtrip, asinh and the integrability flag") {
    const auto unit = run({"lamperti", "--sigma", "1", "--interval", "-5", "5"});
    REQUIRE(unit.code == 0);
    CHECK(json::parse(unit.out)["roundtrip_max_error"].get<double>() <= 1e-10);

    const auto root = run({"--format", "csv", "lamperti", "--sigma", "sqrt(1+s^2)", "--interval", "-10", "10",
                           "--samples", "21"});
    REQUIRE(root.code == 0);
    std::istringstream in(root.out);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 's') continue;
        const auto comma = line.find(',');
        const double s = std::stod(line.substr(0, comma)), x = std::stod(line.substr(comma + 1));
        CHECK(std::abs(x - std::asinh(s)) <= 1e-10);
        ++rows;
    }
    CHECK(rows == 21);

    const auto report = scratch_file("report.json", "");
    const auto bad = run({"lamperti", "--sigma", "1+x^2", "--interval", "-5", "5", "--report", report.string()});
    REQUIRE(bad.code == 0);
    std::ifstream rep(report);
    CHECK(json::parse(rep)["hypotheses"]["one_over_sigma_not_L1_at_infinity"]["pass"] == false);

    CHECK(run({"lamperti", "--sigma", "x", "--interval", "-1", "1"}).code == 2);
}

TEST_CASE("gevrey on a series file") {
    const auto r = run({"gevrey", "--series", kData + "/euler.series", "--window", "5", "10"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["fits"][0]["kappa"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("outputs are deterministic and carry digests") {
    const std::vector<std::string> args{"--model", kData + "/ou.model", "--format", "csv", "coeffs", "--r-max", "6"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("# borelheat 0.1.0") != std::string::npos);
    CHECK(a.out.find("# config_digest ") != std::string::npos);

    const auto c = run({"--model", kData + "/ou.model", "--format", "csv", "coeffs", "--r-max", "7"});
    const auto digest = [](const std::string& s) { return s.substr(s.find("# config_digest"), 80); };
    CHECK(digest(a.out) != digest(c.out));
}

TEST_CASE("--out writes the file") {
    const auto path = scratch_file("out.json", "");
    const auto r = run({"--out", path.string(), "borel-sum", "--series", kData + "/geometric.series", "--t", "0.5",
                        "--orders", "30", "2"});
    REQUIRE(r.code == 0);
    std::ifstream in(path);
    const auto j = json::parse(in);
    CHECK(std::abs(j["records"][0]["value"].get<double>() - 2.0) < 1e-8);
}

TEST_CASE("version flag") {
    const auto r = run({"--version"});
    CHECK(r.code == 0);
    CHECK(r.out.find("0.1.0") != std::string::npos);
}
