#include "borelheat/errors.hpp"
#include "borelheat/kernels.hpp"
#include "borelheat/lamperti.hpp"
#include "borelheat/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace borelheat;

namespace {

ScalarField field(const char* text) { return ScalarField(parse_expression(text), 1, Box::cube(1, 1e7)); }

}  // namespace

TEST_CASE("unit sigma gives the identity map") {
    const auto map = build_map({field("1"), 0.0}, {-5, 5});
    for (double s : {-4.0, 0.0, 2.5}) {
        CHECK(map.gamma(s) == doctest::Approx(s).epsilon(1e-14));
        CHECK(map.inverse(s) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("sqrt(1+y^2) gives asinh") {
    const auto map = build_map({field("sqrt(1+x^2)"), 0.0}, {-60, 60});
    for (int i = 0; i <= 600; ++i) {
        const double s = -60.0 + 0.2 * i;
        CHECK(std::abs(map.gamma(s) - std::asinh(s)) <= 1e-10);
        CHECK(std::abs(map.inverse(map.gamma(s)) - s) <= 1e-10);
    }
}

TEST_CASE("constant sigma with a shifted anchor") {
    const auto map = build_map({field("2"), 1.0}, {-3, 5});
    for (double s : {-2.0, 1.0, 4.5}) CHECK(map.gamma(s) == doctest::Approx((s - 1) / 2).epsilon(1e-14));
}

TEST_CASE("map is strictly increasing") {
    const auto map = build_map({field("1+x^2/3+cos(x)/2"), 0.5}, {-8, 8});
    const auto pts = map.sample(400);
    for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].second > pts[i - 1].second);
}

TEST_CASE("non-positive sigma is rejected") {
    CHECK_THROWS_AS(build_map({field("x"), 1.0}, {-1, 2}), NonPositiveSigma);
    CHECK_THROWS_AS(transformed_drift(field("0"), {field("x-1"), 0.0}, 0.5), NonPositiveSigma);
}

TEST_CASE("transformed drift") {
    for (double s : {-1.5, 0.0, 2.0}) {
        CHECK(transformed_drift(field("-x^3+1"), {field("1"), 0.0}, s) == doctest::Approx(-s * s * s + 1));
        CHECK(transformed_drift(field("0"), {field("sqrt(1+x^2)"), 0.0}, s) ==
              doctest::Approx(-s / (2 * std::sqrt(1 + s * s))).epsilon(1e-14));
        CHECK(transformed_drift(field("-x"), {field("2"), 0.0}, s) == doctest::Approx(-s / 2));
    }
}

TEST_CASE("pullback with unit sigma is the kernel itself") {
    const auto map = build_map({field("1"), 0.0}, {-10, 10});
    TransitionKernel p = [](double t, double x, double xt) { return free_kernel(t, x, xt); };
    for (double s : {-1.0, 0.5})
        for (double st : {0.0, 2.0}) CHECK(pullback_density(p, map, 0.2, s, st) == doctest::Approx(p(0.2, s, st)));
}

TEST_CASE("pullback of the free kernel preserves mass") {
    const auto map = build_map({field("sqrt(1+x^2)"), 0.0}, {-60, 60});
    TransitionKernel p = [](double t, double x, double xt) { return free_kernel(t, x, xt); };
    for (double s : {0.0, 1.0, -2.0}) {
        const double mass = quad::composite_gauss_legendre(
            [&](double st) { return pullback_density(p, map, 0.1, s, st); }, -60, 60, 400, 20);
        CHECK(std::abs(mass - 1.0) <= 1e-6);
    }
}

TEST_CASE("affine case against the rescaled OU kernel") {
    const double s0 = 0.5;
    const auto map = build_map({field("2"), s0}, {-20, 20});
    TransitionKernel p = [](double t, double x, double xt) { return ou_exact(1.0, t, x, xt).value; };
    for (double s : {-1.0, 0.5, 2.0})
        for (double st : {0.0, 1.5}) {
            const double expect = 0.5 * ou_exact(1.0, 0.1, (s - s0) / 2, (st - s0) / 2).value;
            CHECK(pullback_density(p, map, 0.1, s, st) == doctest::Approx(expect).epsilon(1e-13));
        }
}

TEST_CASE("points outside the working interval") {
    const auto map = build_map({field("1"), 0.0}, {-1, 1});
    TransitionKernel p = [](double t, double x, double xt) { return free_kernel(t, x, xt); };
    CHECK_THROWS_AS(pullback_density(p, map, 0.1, 0.0, 3.0), OutOfImage);
    CHECK_THROWS_AS(map.inverse(5.0), OutOfImage);
}

TEST_CASE("hypothesis reports") {
    const auto ou = check_hypotheses(field("-x"), {field("1"), 0.0});
    CHECK(ou.all_pass());

    const auto bad = check_hypotheses(field("0"), {field("1+x^2"), 0.0});
    CHECK_FALSE(bad.one_over_sigma_not_L1_at_infinity.pass);

    const auto root = check_hypotheses(field("tanh(x)"), {field("sqrt(1+x^2)"), 0.0});
    CHECK(root.all_pass());
    CHECK(root.bounded_combination.max_value > 0.0);
    CHECK(std::isfinite(root.bounded_combination.max_value));
}
