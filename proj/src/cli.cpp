#include "borelheat/cli.hpp"

#include "borelheat/coeffs.hpp"
#include "borelheat/errors.hpp"
#include "borelheat/kernels.hpp"
#include "borelheat/lamperti.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace borelheat::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string where(int line) { return "line " + std::to_string(line) + ": "; }

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) throw ParseError(context + "expected a number, got '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& context) {
    int v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw ParseError(context + "expected an integer, got '" + s + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ModelFile parse_model_file(std::string_view text) {
    ModelFile f;
    std::set<std::string> seen;
    std::optional<std::pair<int, json>> atoms;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view view(raw);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const std::string content = trim(view);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ParseError(where(line) + "expected 'key = value'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (value.empty()) throw ParseError(where(line) + "empty value for '" + key + "'");
        if (!seen.insert(key).second) throw ParseError(where(line) + "duplicate key '" + key + "'");

        if (key == "dimension") {
            f.dimension = parse_int(value, where(line));
            if (f.dimension < 1) throw ParseError(where(line) + "dimension must be positive");
        } else if (key == "omega") {
            f.omega = parse_double(value, where(line));
            if (f.omega < 0.0) throw ParseError(where(line) + "omega must be nonnegative");
        } else if (key == "phi") {
            if (value != "ground_state") {
                try {
                    parse_expression(value);
                } catch (const ParseError& e) {
                    throw ParseError(where(line) + e.what());
                }
            }
            f.phi = value;
        } else if (key == "measure.atoms") {
            try {
                atoms.emplace(line, json::parse(value));
            } catch (const json::exception&) {
                throw ParseError(where(line) + "measure.atoms must be a list like [[xi, re_w, im_w], ...]");
            }
        } else if (key == "regularity.a" || key == "regularity.R" || key == "regularity.kappa") {
            if (!f.regularity) f.regularity = RegularityParams{};
            const double v = parse_double(value, where(line));
            if (key == "regularity.a") f.regularity->a = v;
            else if (key == "regularity.R") f.regularity->R = v;
            else f.regularity->kappa = v;
        } else if (key == "domain.L") {
            const double v = parse_double(value, where(line));
            if (!(v > 0.0)) throw ParseError(where(line) + "domain.L must be positive");
            f.domain_half_width = v;
        } else {
            throw ParseError(where(line) + "unknown key '" + key + "'");
        }
    }

    if (atoms) {
        const auto& [aline, j] = *atoms;
        if (!j.is_array() || j.empty()) throw ParseError(where(aline) + "measure.atoms must be a nonempty list");
        SymmetricMeasure mu;
        mu.dimension = f.dimension;
        for (const auto& a : j) {
            if (!a.is_array() || a.size() != static_cast<size_t>(f.dimension) + 2)
                throw ParseError(where(aline) + "each atom needs " + std::to_string(f.dimension + 2) + " numbers");
            for (const auto& v : a)
                if (!v.is_number()) throw ParseError(where(aline) + "atom entries must be numbers");
            Atom atom;
            for (int i = 0; i < f.dimension; ++i) atom.location.push_back(a[i].get<double>());
            atom.weight = {a[f.dimension].get<double>(), a[f.dimension + 1].get<double>()};
            mu.atoms.push_back(atom);
        }
        f.measure = mu;
    }
    if (f.phi == "ground_state" && !f.measure) throw ParseError("phi = ground_state needs measure.atoms");
    return f;
}

ModelFile load_model_file(const std::string& path) { return parse_model_file(read_file(path)); }

ModelSpec build_model(const ModelFile& file) {
    const double box = file.domain_half_width.value_or(12.0);
    if (file.phi == "ground_state") {
        if (file.dimension != 1) throw ParseError("phi = ground_state is implemented for dimension 1");
        if (!(file.omega > 0.0)) throw ParseError("phi = ground_state needs omega > 0");
        const PeriodicGroundState gs = periodic_ground_state(*file.measure);
        return build_ou_shifted_model(ScalarField(gs.phi, 1, Box::cube(1, box)), file.omega, gs.shifted_measure,
                                      file.regularity, file.domain_half_width);
    }
    ScalarField phi(parse_expression(file.phi), file.dimension, Box::cube(file.dimension, box));
    if (file.omega == 0.0) {
        const auto poly = file.dimension == 1 ? phi.as_polynomial() : std::nullopt;
        if (!poly || *poly != std::vector<double>{1.0} || file.measure)
            throw ParseError("omega = 0 is only supported for the free model (phi = 1, no atoms)");
        return free_model(file.dimension, file.domain_half_width.value_or(8.0));
    }
    return build_ou_shifted_model(phi, file.omega, file.measure, file.regularity, file.domain_half_width);
}

FormalSeries parse_series(std::string_view text) {
    std::map<int, double> entries;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view view(raw);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const std::string content = trim(view);
        if (content.empty()) continue;
        std::istringstream fields(content);
        std::string idx, val, extra;
        if (!(fields >> idx >> val) || (fields >> extra)) throw ParseError(where(line) + "expected 'index value'");
        const int r = parse_int(idx, where(line));
        if (r < 0) throw ParseError(where(line) + "negative index");
        if (!entries.emplace(r, parse_double(val, where(line))).second)
            throw ParseError(where(line) + "duplicate index " + idx);
    }
    if (entries.empty()) throw ParseError("series file has no coefficients");
    FormalSeries s;
    s.coeffs.assign(entries.rbegin()->first + 1, 0.0);
    for (auto [r, v] : entries) s.coeffs[r] = v;
    return s;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

namespace {

struct Globals {
    std::string model;
    std::string out;
    std::string format = "json";
    unsigned long seed = 0;
    bool quiet = false;
};

struct Context {
    const Globals& g;
    std::string command;
    std::string digest;
    std::ostream& out;
    std::ostream& err;

    json header() const {
        return json{{"schema", "borelheat." + command + ".v1"}, {"tool_version", kToolVersion}, {"config_digest", digest}};
    }
    std::string csv_header(const std::vector<std::string>& extra = {}) const {
        std::string h = "# borelheat " + std::string(kToolVersion) + "\n# schema borelheat." + command +
                        ".v1\n# config_digest " + digest + "\n";
        for (const auto& e : extra) h += "# " + e + "\n";
        return h;
    }
    void emit(const std::string& text) const {
        if (g.out.empty()) {
            out << text;
            return;
        }
        std::ofstream f(g.out, std::ios::binary);
        if (!f) throw ParseError("cannot write " + g.out);
        f << text;
    }
    void note(const std::string& msg) const {
        if (!g.quiet) err << msg << '\n';
    }
};

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json poles_json(const std::vector<std::complex<double>>& poles) {
    json a = json::array();
    for (const auto& p : poles) a.push_back({p.real(), p.imag()});
    return a;
}

json result_json(const BorelSumResult& r) {
    return json{{"t", r.t},
                {"value", nullable(r.value)},
                {"quad_error", nullable(r.quadrature_error)},
                {"poles", poles_json(r.poles)},
                {"clearance", nullable(r.pole_clearance)},
                {"order", {r.order.first, r.order.second}},
                {"quadrature_nodes", r.quadrature_nodes},
                {"trusted", r.trusted}};
}

constexpr const char* kLaguerreNote = "quadrature gauss-laguerre nodes 16..512 doubling, tol 1e-10";

std::string fmt(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

Interval model_interval(const ModelSpec& m) { return {m.domain.lo.front(), m.domain.hi.front()}; }

void require_positive(const std::vector<double>& ts, const char* what) {
    if (ts.empty()) throw ParseError(std::string(what) + " list is empty");
    for (double t : ts)
        if (!(t > 0.0)) throw ParseError(std::string(what) + " values must be positive");
}

std::pair<int, int> pair_of(const std::vector<int>& v, const char* what) {
    if (v.size() != 2) throw ParseError(std::string(what) + " takes two integers");
    return {v[0], v[1]};
}

// ---- commands -------------------------------------------------------------

struct CoeffsOpts {
    double y = 0.0;
    int r_max = 10;
    std::vector<double> xs;
    int jet_degree = 400;
};

int cmd_coeffs(const Context& c, const CoeffsOpts& o) {
    if (o.r_max < 1) throw ParseError("--r-max must be at least 1");
    const ModelSpec model = build_model(load_model_file(c.g.model));
    const CoefficientTable table =
        table_for_potential(model.W_total, o.y, o.r_max, model_interval(model), o.jet_degree);
    std::vector<double> xs = o.xs.empty() ? std::vector<double>{o.y} : o.xs;

    if (c.g.format == "csv") {
        std::ostringstream os;
        os << c.csv_header({"y " + fmt(o.y), "r_max " + std::to_string(o.r_max)}) << "x,r,a\n";
        for (double x : xs) {
            const auto a = coefficient_series(table, x);
            for (size_t r = 0; r < a.size(); ++r) os << fmt(x) << ',' << r << ',' << fmt(a[r]) << '\n';
        }
        c.emit(os.str());
        return 0;
    }
    json j = c.header();
    j["model"] = {{"omega", model.omega}, {"c_phi", model.c_phi}, {"domain_half_width", model.domain.hi.front()}};
    j["table"] = to_json(table);
    json evals = json::array();
    for (double x : xs) {
        const auto a = coefficient_series(table, x);
        json e{{"x", x}, {"a", a}, {"gevrey", nullptr}};
        if (o.r_max >= 7) {
            try {
                e["gevrey"] = to_json(gevrey_fit(a, {5, std::min(10, o.r_max)}));
            } catch (const AllZero&) {
                e["gevrey"] = {{"all_zero", true}};
            }
        }
        evals.push_back(e);
    }
    j["evaluations"] = evals;
    c.emit(j.dump(2) + "\n");
    return 0;
}

struct BorelOpts {
    std::string series;
    std::vector<double> ts;
    std::vector<int> orders;
};

int cmd_borel(const Context& c, const BorelOpts& o) {
    require_positive(o.ts, "--t");
    const FormalSeries s = parse_series(read_file(o.series));
    std::optional<std::pair<int, int>> orders;
    if (!o.orders.empty()) orders = pair_of(o.orders, "--orders");

    json records = json::array();
    for (double t : o.ts) {
        json rec;
        if (orders) {
            try {
                const BorelSumResult r = borel_sum(s, t, *orders);
                rec = result_json(r);
                rec["flagged"] = !r.trusted;
            } catch (const PoleOnContour& e) {
                rec = json{{"t", t}, {"value", nullptr}, {"quad_error", nullptr}, {"poles", json::array()},
                           {"clearance", 0.0}, {"order", {orders->first, orders->second}}, {"flagged", true},
                           {"diagnostic", e.what()}};
                c.note("t = " + fmt(t) + ": " + e.what());
            }
        } else {
            const StabilitySweep sw = borel_sum_auto(s, t);
            rec = result_json(sw.best);
            rec["stability_spread"] = sw.spread;
            rec["flagged"] = sw.flagged || !sw.best.trusted;
        }
        records.push_back(rec);
    }

    if (c.g.format == "csv") {
        std::ostringstream os;
        os << c.csv_header({kLaguerreNote}) << "t,value,quad_error,clearance,m,n,flagged\n";
        for (const auto& r : records) {
            auto num = [](const json& v) { return v.is_null() ? std::string("nan") : fmt(v.get<double>()); };
            os << fmt(r["t"].get<double>()) << ',' << num(r["value"]) << ',' << num(r["quad_error"]) << ','
               << (r["clearance"].is_null() ? std::string("inf") : fmt(r["clearance"].get<double>())) << ','
               << r["order"][0].get<int>() << ',' << r["order"][1].get<int>() << ','
               << (r["flagged"].get<bool>() ? 1 : 0) << '\n';
        }
        c.emit(os.str());
        return 0;
    }
    json j = c.header();
    j["quadrature"] = kLaguerreNote;
    j["records"] = records;
    c.emit(j.dump(2) + "\n");
    return 0;
}

struct ValidateOpts {
    double t = 0.1;
    double s = 0.1;
    std::vector<double> points{-1.0, 0.0, 1.0};
    int r_max = 16;
    bool pde = false;
    double pde_h = 1.0 / 512.0;
    double pde_dt = 1e-4;
    double pde_L = 12.0;
    std::string compare;
};

std::vector<KernelEstimate> read_kernel_csv(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    bool header = false;
    std::vector<KernelEstimate> rows;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string content = trim(raw);
        if (content.empty() || content[0] == '#') continue;
        if (!header) {
            if (content != "t,x,y,method,value,diag_quad_error,diag_clearance")
                throw ParseError(where(line) + "unexpected kernel CSV header");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(content);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 5) throw ParseError(where(line) + "kernel CSV row needs at least 5 fields");
        KernelEstimate k;
        k.t = parse_double(cells[0], where(line));
        k.x = parse_double(cells[1], where(line));
        k.y = parse_double(cells[2], where(line));
        k.method = cells[3] == "pde" ? Method::PDE : cells[3] == "exact" ? Method::Exact
                   : cells[3] == "truncated"                             ? Method::Truncated
                                                                         : Method::Borel;
        k.value = parse_double(cells[4], where(line));
        k.kind = "k";
        rows.push_back(k);
    }
    if (!header) throw ParseError("kernel CSV has no header");
    return rows;
}

int cmd_validate(const Context& c, const ValidateOpts& o) {
    require_positive({o.t, o.s}, "--t/--s");
    if (o.points.empty()) throw ParseError("--points is empty");
    if (o.r_max < 2) throw ParseError("--r-max must be at least 2");
    const ModelSpec model = build_model(load_model_file(c.g.model));
    if (model.d != 1) throw ParseError("validate supports dimension 1");
    const Interval iv = model_interval(model);

    SeriesKernel sk(model, o.r_max, EvalMode::borel(), iv);
    const ConsistencyReport rep =
        consistency_suite(model, [&](double t, double x, double y) { return sk.u(t, x, y); }, o.t, o.s, o.points);

    std::vector<KernelEstimate> rows;
    for (double y : o.points) {
        const CoefficientTable table = table_for_potential(model.W_total, y, o.r_max, iv);
        for (double x : o.points) rows.push_back(assemble_k(model, table, o.t, x, y, EvalMode::borel()));
    }

    json pde_rows = json::array();
    double pde_max_rel = 0.0;
    std::vector<KernelEstimate> pde_estimates;
    if (o.pde) {
        PDEGrid grid;
        grid.lo = -o.pde_L;
        grid.hi = o.pde_L;
        grid.h = o.pde_h;
        grid.dt = o.pde_dt;
        for (double x : o.points) {
            // The forward equation started at x gives k(t, x, .).
            const PDESolution sol = solve_pde_forward(model, o.t, x, grid);
            for (double y : o.points) {
                const auto it = std::find_if(rows.begin(), rows.end(), [&](const KernelEstimate& k) {
                    return k.x == x && k.y == y;
                });
                const double series = it->value, pde = sol(y);
                const double rel = std::abs(series - pde) / std::abs(pde);
                pde_max_rel = std::max(pde_max_rel, rel);
                pde_rows.push_back({{"x", x}, {"y", y}, {"series", series}, {"pde", pde}, {"relative", rel}});
                KernelEstimate est;
                est.t = o.t;
                est.x = x;
                est.y = y;
                est.value = pde;
                est.method = Method::PDE;
                est.kind = "k";
                pde_estimates.push_back(est);
            }
        }
    }

    json compare = nullptr;
    if (!o.compare.empty()) {
        double worst = 0.0;
        int n = 0;
        for (const KernelEstimate& row : read_kernel_csv(read_file(o.compare))) {
            if (!(row.t > 0.0)) throw ParseError("kernel CSV has a nonpositive time");
            const double mine = sk.k(row.t, row.x, row.y);
            worst = std::max(worst, std::abs(mine - row.value) / std::max(std::abs(mine), 1e-300));
            ++n;
        }
        compare = {{"rows", n}, {"max_relative", worst}};
    }

    if (c.g.format == "csv") {
        std::ostringstream os;
        os << c.csv_header({kLaguerreNote});
        rows.insert(rows.end(), pde_estimates.begin(), pde_estimates.end());
        write_kernel_csv(os, rows);
        c.emit(os.str());
        return 0;
    }
    json j = c.header();
    j["quadrature"] = {{"rule", "gauss-legendre"}, {"nodes", rep.quadrature_nodes},
                       {"converged", rep.quadrature_converged}};
    j["consistency"] = {{"t", o.t},
                        {"s", o.s},
                        {"points", o.points},
                        {"chapman_kolmogorov", rep.chapman_kolmogorov},
                        {"chapman_kolmogorov_relative", rep.chapman_kolmogorov_relative},
                        {"mass", rep.mass},
                        {"detailed_balance", rep.detailed_balance}};
    json kernel = json::array();
    for (const auto& k : rows)
        kernel.push_back({{"x", k.x}, {"y", k.y}, {"value", k.value}, {"stability_spread", k.stability_spread}});
    j["kernel"] = kernel;
    if (o.pde) j["pde_comparison"] = {{"rows", pde_rows}, {"max_relative", pde_max_rel}};
    if (!compare.is_null()) j["compare"] = compare;
    c.emit(j.dump(2) + "\n");
    return 0;
}

struct LampertiOpts {
    std::string sigma;
    std::string beta = "0";
    double s0 = 0.0;
    std::vector<double> interval{-10.0, 10.0};
    int samples = 201;
    std::string report;
};

int cmd_lamperti(const Context& c, const LampertiOpts& o) {
    if (o.interval.size() != 2 || !(o.interval[1] > o.interval[0])) throw ParseError("--interval takes lo hi with lo < hi");
    if (o.samples < 2) throw ParseError("--samples must be at least 2");
    const Box box = Box::cube(1, 1e300);
    const DiffusionCoefficient dc{ScalarField(parse_expression(o.sigma), 1, box), o.s0};
    const ScalarField beta(parse_expression(o.beta), 1, box);
    const LampertiMap map = build_map(dc, {o.interval[0], o.interval[1]});
    const auto samples = map.sample(o.samples);
    double roundtrip = 0.0;
    for (const auto& [s, x] : samples) roundtrip = std::max(roundtrip, std::abs(map.inverse(x) - s));

    json report = c.header();
    report["hypotheses"] = to_json(check_hypotheses(beta, dc));
    report["roundtrip_max_error"] = roundtrip;
    report["s_interval"] = o.interval;
    report["x_interval"] = {map.x_interval().lo, map.x_interval().hi};
    if (!o.report.empty()) {
        std::ofstream f(o.report, std::ios::binary);
        if (!f) throw ParseError("cannot write " + o.report);
        f << report.dump(2) << '\n';
    }
    if (c.g.format == "csv") {
        std::ostringstream os;
        os << c.csv_header({"quadrature gauss-kronrod 31, adaptive, tol 1e-13"}) << "s,x\n";
        for (const auto& [s, x] : samples) os << fmt(s) << ',' << fmt(x) << '\n';
        c.emit(os.str());
        return 0;
    }
    json m = json::array();
    for (const auto& [s, x] : samples) m.push_back({s, x});
    report["map"] = m;
    c.emit(report.dump(2) + "\n");
    return 0;
}

struct GevreyOpts {
    std::string series;
    double x = 0.0;
    double y = 0.0;
    int r_max = 12;
    std::vector<int> window{5, 10};
    std::vector<int> window2{6, 12};
};

int cmd_gevrey(const Context& c, const GevreyOpts& o) {
    std::vector<double> a;
    if (!o.series.empty()) {
        a = parse_series(read_file(o.series)).coeffs;
    } else if (!c.g.model.empty()) {
        if (o.r_max < 3) throw ParseError("--r-max must be at least 3");
        const ModelSpec model = build_model(load_model_file(c.g.model));
        a = coefficient_series(table_for_potential(model.W_total, o.y, o.r_max, model_interval(model)), o.x);
    } else {
        throw ParseError("gevrey needs --series or --model");
    }
    std::vector<std::pair<int, int>> windows{pair_of(o.window, "--window")};
    if (!o.window2.empty() && o.window2[1] < static_cast<int>(a.size())) windows.push_back(pair_of(o.window2, "--window2"));
    json fits = json::array();
    std::vector<double> kappas;
    for (auto w : windows) {
        if (w.second >= static_cast<int>(a.size())) throw ParseError("fit window exceeds the series length");
        const GevreyEstimate g = gevrey_fit(a, w);
        fits.push_back(to_json(g));
        kappas.push_back(g.kappa);
    }
    json j = c.header();
    j["coefficients"] = a;
    j["fits"] = fits;
    if (kappas.size() == 2 && std::isfinite(kappas[0]) && std::isfinite(kappas[1]))
        j["kappa_relative_change"] = std::abs(kappas[1] - kappas[0]) / kappas[0];
    if (c.g.format == "csv") {
        std::ostringstream os;
        os << c.csv_header() << "window_lo,window_hi,K,kappa,slope,unbounded,terminating\n";
        for (const auto& f : fits)
            os << f["window"][0].get<int>() << ',' << f["window"][1].get<int>() << ','
               << (f["K"].is_null() ? "nan" : fmt(f["K"].get<double>())) << ','
               << (f["kappa"].is_null() ? "inf" : fmt(f["kappa"].get<double>())) << ','
               << fmt(f["slope"].get<double>()) << ',' << (f["unbounded"].get<bool>() ? 1 : 0) << ','
               << (f["terminating"].get<bool>() ? 1 : 0) << '\n';
        c.emit(os.str());
        return 0;
    }
    c.emit(j.dump(2) + "\n");
    return 0;
}

std::string config_digest(const CLI::App& sub, const Globals& g, const std::map<std::string, std::string>& inputs) {
    std::map<std::string, std::string> cfg;
    cfg["command"] = sub.get_name();
    cfg["format"] = g.format;
    cfg["seed"] = std::to_string(g.seed);
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->count() == 0) continue;
        std::string joined;
        for (const auto& r : opt->results()) joined += r + " ";
        cfg[opt->get_name()] = joined;
    }
    for (const auto& [k, v] : inputs) cfg[k] = sha256_hex(v);
    std::string canonical;
    for (const auto& [k, v] : cfg) canonical += k + "=" + v + "\n";
    return sha256_hex(canonical);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-time heat kernel expansions with Borel resummation", "borelheat"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--model", g.model, "Model definition file");
    app.add_option("--out", g.out, "Output path (default: stdout)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", g.seed, "Reserved; no command is randomized");
    app.add_flag("--quiet", g.quiet, "Suppress diagnostics on stderr");
    app.set_version_flag("--version", kToolVersion);

    CoeffsOpts co;
    auto* coeffs = app.add_subcommand("coeffs", "Expansion coefficients a_r(x, y) and a Gevrey fit");
    coeffs->add_option("--y", co.y, "Base point");
    coeffs->add_option("--r-max", co.r_max, "Highest order");
    coeffs->add_option("--x", co.xs, "Evaluation points (default: y)");
    coeffs->add_option("--jet-degree", co.jet_degree, "Taylor degree for non-polynomial potentials");

    BorelOpts bo;
    auto* borel = app.add_subcommand("borel-sum", "Borel-Pade-Laplace sum of a series file");
    borel->add_option("--series", bo.series, "Series file (index value per line)")->required();
    borel->add_option("--t", bo.ts, "Times")->required();
    borel->add_option("--orders", bo.orders, "Pade orders m n (default: automatic)")->expected(2);

    ValidateOpts vo;
    auto* validate = app.add_subcommand("validate", "Semigroup residuals and PDE comparison");
    validate->add_option("--t", vo.t, "First time");
    validate->add_option("--s", vo.s, "Second time for Chapman-Kolmogorov");
    validate->add_option("--points", vo.points, "Evaluation points");
    validate->add_option("--r-max", vo.r_max, "Expansion order");
    validate->add_flag("--pde", vo.pde, "Compare against the Crank-Nicolson solver");
    validate->add_option("--pde-h", vo.pde_h, "PDE grid step");
    validate->add_option("--pde-dt", vo.pde_dt, "PDE time step");
    validate->add_option("--pde-L", vo.pde_L, "PDE half-width");
    validate->add_option("--compare", vo.compare, "Kernel CSV to check against the series kernel");

    LampertiOpts lo;
    auto* lamperti = app.add_subcommand("lamperti", "Lamperti map, inverse check and hypothesis report");
    lamperti->add_option("--sigma", lo.sigma, "Diffusion coefficient sigma(s)")->required();
    lamperti->add_option("--beta", lo.beta, "Drift beta(s)");
    lamperti->add_option("--s0", lo.s0, "Anchor");
    lamperti->add_option("--interval", lo.interval, "Working interval lo hi")->expected(2);
    lamperti->add_option("--samples", lo.samples, "Map samples in the output");
    lamperti->add_option("--report", lo.report, "Write the hypothesis report JSON here");

    GevreyOpts go;
    auto* gevrey = app.add_subcommand("gevrey", "Gevrey-1 fit of a coefficient sequence");
    gevrey->add_option("--series", go.series, "Series file (otherwise --model with --x --y)");
    gevrey->add_option("--x", go.x, "Evaluation point");
    gevrey->add_option("--y", go.y, "Base point");
    gevrey->add_option("--r-max", go.r_max, "Highest order");
    gevrey->add_option("--window", go.window, "Fit window lo hi")->expected(2);
    gevrey->add_option("--window2", go.window2, "Second fit window lo hi")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        std::map<std::string, std::string> inputs;
        const bool needs_model = sub == coeffs || sub == validate || (sub == gevrey && go.series.empty());
        if (needs_model) {
            if (g.model.empty()) throw ParseError(sub->get_name() + " needs --model");
            inputs["model_file"] = read_file(g.model);
        }
        if (sub == borel) inputs["series_file"] = read_file(bo.series);
        if (sub == gevrey && !go.series.empty()) inputs["series_file"] = read_file(go.series);
        if (sub == validate && !vo.compare.empty()) inputs["compare_file"] = read_file(vo.compare);
        const Context ctx{g, sub->get_name(), config_digest(*sub, g, inputs), out, err};

        if (sub == coeffs) return cmd_coeffs(ctx, co);
        if (sub == borel) return cmd_borel(ctx, bo);
        if (sub == validate) return cmd_validate(ctx, vo);
        if (sub == lamperti) return cmd_lamperti(ctx, lo);
        return cmd_gevrey(ctx, go);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.category() == ErrorCategory::Input ? 2 : 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace borelheat::cli
