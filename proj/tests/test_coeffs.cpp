#include "borelheat/coeffs.hpp"
#include "borelheat/errors.hpp"
#include "borelheat/kernels.hpp"
#include "borelheat/model.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace borelheat;

namespace {

ScalarField field(const char* text, double half_width = 12.0) {
    return ScalarField(parse_expression(text), 1, Box::cube(1, half_width));
}

ModelSpec trig_model() {
    SymmetricMeasure mu{1, {{{1.0}, {0.5, 0.0}}, {{-1.0}, {0.5, 0.0}}}};
    const auto gs = periodic_ground_state(mu);
    return build_ou_shifted_model(ScalarField(gs.phi, 1, Box::cube(1, 12)), 1.0, gs.shifted_measure);
}

}  // namespace

TEST_CASE("polynomial helpers") {
    PolynomialRep p({1.0, -2.0, 0.5, 3.0}, 0.4);
    CHECK(p(1.1) == doctest::Approx(1.0 - 2.0 * 0.7 + 0.5 * 0.49 + 3.0 * 0.343));
    const auto q = p.recentered(-1.3);
    for (double x : {-2.0, 0.0, 1.7}) CHECK(q(x) == doctest::Approx(p(x)).epsilon(1e-13));
    const auto d = p.derivative();
    CHECK(d(0.9) == doctest::Approx(-2.0 + 1.0 * 0.5 + 9.0 * 0.25));
    const auto pr = multiply(p, p);
    CHECK(pr(0.0) == doctest::Approx(p(0.0) * p(0.0)));
    CHECK(add(p, p, -1.0)(2.0) == 0.0);
}

TEST_CASE("polynomial potentials pass through approximate_potential unchanged") {
    const auto fit = approximate_potential(field("x^2-1"), {-3, 3}, 10);
    CHECK(fit.exact);
    CHECK(fit.max_error == 0.0);
    CHECK(fit.polynomial(2.0) == doctest::Approx(3.0));
}

TEST_CASE("Chebyshev fit of -cos on [-2, 2]") {
    const auto fit = approximate_potential(field("-cos(x)"), {-2, 2}, 16);
    CHECK_FALSE(fit.exact);
    CHECK(fit.max_error < 1e-12);
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = -2.0 + 4.0 * i / 4000;
        worst = std::max(worst, std::abs(fit.polynomial(x) + std::cos(x)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("step-like potential is rejected by the fit") {
    ScalarField step([](std::span<const double> x) { return x[0] > 0.1 ? 1.0 : 0.0; }, 1, Box::cube(1, 4));
    CHECK_THROWS_AS(approximate_potential(step, {-2, 2}, 24), FitDiverged);
}

TEST_CASE("zero potential gives the free kernel") {
    const auto tab = expansion_coefficients(PolynomialRep({0.0}), 0.3, 12);
    for (double x : {-2.0, 0.3, 1.9}) {
        const auto a = coefficient_series(tab, x);
        CHECK(a[0] == 1.0);
        for (int r = 1; r <= 12; ++r) CHECK(std::abs(a[r]) < 1e-12);
    }
}

TEST_CASE("constant potential factorizes as exp(-c t)") {
    for (double c : {2.0, -0.7, 3.5}) {
        const auto tab = expansion_coefficients(PolynomialRep({c}), -0.4, 12);
        double fact = 1.0;
        for (int r = 0; r <= 12; ++r) {
            if (r > 0) fact *= r;
            const double expect = std::pow(-c, r) / fact;
            for (double x : {-1.0, 0.5}) CHECK(coefficient_at(tab, r, x) == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    CHECK(coefficient_at(expansion_coefficients(PolynomialRep({2.0}), 0.0, 4), 2, 7.5) == doctest::Approx(2.0));
}

TEST_CASE("first order for the harmonic potential") {
    const double omega = 2.0;
    PolynomialRep W({0.0, 0.0, omega * omega / 4});
    for (double y : {-1.0, 0.0, 0.6}) {
        const auto tab = expansion_coefficients(W, y, 4);
        for (double x : {-1.3, 0.0, 1.0})
            CHECK(coefficient_at(tab, 1, x) ==
                  doctest::Approx(-(omega * omega / 12) * (x * x + x * y + y * y)).epsilon(1e-14));
        CHECK(coefficient_at(tab, 1, y) == doctest::Approx(-W(y)).epsilon(1e-15));
    }
    CHECK(coefficient_at(expansion_coefficients(W, 0.0, 3), 1, 0.0) == 0.0);
}

TEST_CASE("a_0 is the constant 1 and orders are range-checked") {
    const auto tab = expansion_coefficients(PolynomialRep({0.0, 1.0, -0.3, 0.2}), 0.5, 6);
    CHECK(tab.orders[0].degree() == 0);
    CHECK(coefficient_at(tab, 0, -3.3) == 1.0);
    CHECK_THROWS_AS(coefficient_at(tab, 7, 0.0), OrderOutOfRange);
    CHECK_THROWS_AS(coefficient_at(tab, -1, 0.0), OrderOutOfRange);
}

TEST_CASE("recursion matches the Mehler Taylor coefficients") {
    PolynomialRep W({0.0, 0.0, 1.0});
    for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.0}, std::pair{1.0, -1.0}, std::pair{-0.7, 1.8}}) {
        const auto a = coefficient_series(expansion_coefficients(W, y, 10), x);
        const auto ref = oracle::mehler_series(2.0, x, y, 10);
        for (int r = 0; r <= 10; ++r) {
            INFO("x=" << x << " y=" << y << " r=" << r);
            CHECK(std::abs(a[r] - ref[r]) <= 1e-8 * std::abs(ref[r]) + 1e-300);
        }
    }
}

namespace {

// sum_k |c_k| |x - y|^k: what rounding in the coefficients of a_r costs at x.
double evaluation_size(const PolynomialRep& p, double x) {
    double s = 0.0, z = 1.0;
    for (double c : p.coefficients) {
        s += std::abs(c) * z;
        z *= std::abs(x - p.center);
    }
    return s;
}

void check_symmetry(unsigned seed, double half_width, bool scale_by_size) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), point(-half_width, half_width);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> c(1 + trial % 5);
        for (auto& v : c) v = coef(gen);
        PolynomialRep W(c);
        const double x = point(gen), y = point(gen);
        const auto ty = expansion_coefficients(W, y, 8), tx = expansion_coefficients(W, x, 8);
        for (int r = 0; r <= 8; ++r) {
            INFO("trial " << trial << " r=" << r << " x=" << x << " y=" << y);
            const double axy = ty.orders[r](x), ayx = tx.orders[r](y);
            double tol = 1e-10 * std::max(1.0, std::abs(axy));
            if (scale_by_size) tol = std::max(tol, 1e-14 * evaluation_size(ty.orders[r], x));
            CHECK(std::abs(axy - ayx) <= tol);
        }
    }
}

}  // namespace

TEST_CASE("coefficient symmetry for random polynomial potentials") {
    check_symmetry(7, 1.0, false);
}

TEST_CASE("coefficient symmetry at larger separations, up to cancellation in the monomial form") {
    // With |x - y| near 3 and degree-4 potentials the terms of a_8 reach 1e6 times the
    // value, so double-precision coefficients cannot give 1e-10 relative there.
    check_symmetry(11, 1.5, true);
}

TEST_CASE("degree of a_r grows at most like r times the potential degree") {
    const auto tab = expansion_coefficients(PolynomialRep({0.3, 0.0, -1.0, 0.5}), 0.0, 8);
    for (int r = 0; r <= 8; ++r) CHECK(tab.orders[r].degree() <= r * tab.potential_degree);
}

TEST_CASE("degree cap") {
    std::vector<double> c(40, 0.0);
    c[39] = 1.0;
    CHECK_THROWS_AS(expansion_coefficients(PolynomialRep(c), 0.0, 20), DegreeOverflow);
}

TEST_CASE("jet tables of -cos agree with a Chebyshev fit near the base") {
    const auto W = field("-cos(x)");
    const auto jet_tab = table_for_potential(W, 0.5, 8, {-6, 6});
    CHECK(jet_tab.jet_degree > 0);
    const auto fit = approximate_potential(W, {-1.5, 2.5}, 30);
    const auto fit_tab = expansion_coefficients(fit.polynomial, 0.5, 8, {-1.5, 2.5});
    for (double x : {0.0, 0.5, 1.2}) {
        const auto a = coefficient_series(jet_tab, x);
        const auto b = coefficient_series(fit_tab, x);
        for (int r = 0; r <= 6; ++r) CHECK(std::abs(a[r] - b[r]) < 1e-8);
    }
}

TEST_CASE("continued trig coefficients are symmetric far from the base") {
    const auto m = trig_model();
    auto cont = std::make_shared<const TransportContinuation>(m.W_total);
    const Interval iv{-12, 12};
    for (auto [x, y] : {std::pair{-1.0, 1.0}, std::pair{0.0, 2.0}, std::pair{-2.5, 0.5}, std::pair{3.0, 0.0}}) {
        const auto axy = coefficient_series(table_for_potential(m.W_total, y, 16, iv, 400, 28, cont), x);
        const auto ayx = coefficient_series(table_for_potential(m.W_total, x, 16, iv, 400, 28, cont), y);
        for (int r = 0; r <= 16; ++r) {
            INFO("x=" << x << " y=" << y << " r=" << r);
            // Rounding of the highest orders grows with the distance travelled.
            const double tol = r <= 10 ? 1e-8 : 1e-3;
            CHECK(std::abs(axy[r] - ayx[r]) <= tol * std::max(1.0, std::abs(axy[r])));
        }
    }
}

TEST_CASE("convergence radius estimate") {
    std::vector<double> quad(81, 0.0);
    quad[0] = 1.0;
    quad[2] = 3.0;
    CHECK(std::isinf(TransportContinuation::radius(PolynomialRep(quad))));
    // 1 / (1 - z/2) has radius 2.
    std::vector<double> c(81);
    for (int k = 0; k <= 80; ++k) c[k] = std::pow(0.5, k);
    CHECK(TransportContinuation::radius(PolynomialRep(c)) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Gevrey fits of exact sequences") {
    std::vector<double> fact(13), half(13);
    double f = 1.0;
    for (int r = 0; r <= 12; ++r) {
        if (r > 0) f *= r;
        fact[r] = f;
        half[r] = f / std::pow(2.0, r);
    }
    const auto g1 = gevrey_fit(fact, {5, 10});
    CHECK(g1.kappa == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g1.K == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(g1.residual) < 1e-12);
    const auto g2 = gevrey_fit(half, {5, 10});
    CHECK(g2.kappa == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(g2.K == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Gevrey bound holds on the window") {
    const auto a = oracle::mehler_series(2.0, 0.0, 0.0, 12);
    for (auto w : {std::pair{5, 10}, std::pair{6, 12}}) {
        const auto g = gevrey_fit(a, w);
        CHECK(std::isfinite(g.kappa));
        CHECK(g.kappa > 0.0);
        CHECK(g.residual <= 1e-12);
        double f = 1.0;
        for (int r = 1; r <= w.second; ++r) {
            f *= r;
            if (r >= w.first && a[r] != 0.0) CHECK(std::abs(a[r]) <= g.K * f / std::pow(g.kappa, r) * (1 + 1e-12));
        }
    }
}

TEST_CASE("terminating sequences") {
    const auto g = gevrey_fit({1.0, -1.0, 0.5, 0, 0, 0.25, 0, 0, 0, 0, 0}, {5, 10});
    CHECK(g.terminating);
    CHECK(std::isinf(g.kappa));
    CHECK_THROWS_AS(gevrey_fit({1.0, -1.0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0}, {5, 10}), AllZero);
}

TEST_CASE("table JSON round trip") {
    const auto tab = expansion_coefficients(PolynomialRep({0.2, -0.1, 1.0}), 0.25, 6, {-3, 3});
    const auto back = table_from_json(to_json(tab));
    CHECK(back.r_max() == 6);
    CHECK(back.y == 0.25);
    for (int r = 0; r <= 6; ++r) CHECK(coefficient_at(back, r, 1.3) == coefficient_at(tab, r, 1.3));
}
