#include "borelheat/errors.hpp"
#include "borelheat/model.hpp"
#include "borelheat/quadrature.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace borelheat;

namespace {

ScalarField field(const char* text, double half_width = 12.0) {
    return ScalarField(parse_expression(text), 1, Box::cube(1, half_width));
}

SymmetricMeasure half_pair(double xi) { return {1, {{{xi}, {0.5, 0.0}}, {{-xi}, {0.5, 0.0}}}}; }

double grad(const DriftField& b, double x) { return b(std::span<const double>(&x, 1))[0]; }

}  // namespace

TEST_CASE("potential of the symmetric pair at +-1 is -cos") {
    const auto V = potential_from_measure(half_pair(1.0), Box::cube(1, 10));
    for (double x : {-3.0, -0.4, 0.0, 1.1, 2.7}) CHECK(V(x) == doctest::Approx(-std::cos(x)).epsilon(1e-15));
}

TEST_CASE("potential of a unit atom at the origin is -1") {
    SymmetricMeasure mu{1, {{{0.0}, {1.0, 0.0}}}};
    const auto V = potential_from_measure(mu, Box::cube(1, 10));
    for (double x : {-2.0, 0.0, 5.0}) CHECK(V(x) == doctest::Approx(-1.0));
}

TEST_CASE("unpaired atoms and complex weights are rejected") {
    SymmetricMeasure lonely{1, {{{1.0}, {1.0, 0.0}}}};
    CHECK_THROWS_AS(potential_from_measure(lonely, Box::cube(1, 10)), SymmetryViolation);
    SymmetricMeasure complex_w{1, {{{1.0}, {0.5, 0.2}}, {{-1.0}, {0.5, 0.2}}}};
    CHECK_THROWS_AS(complex_w.validate(), SymmetryViolation);
}

TEST_CASE("potential is real for a multi-atom measure") {
    SymmetricMeasure mu{1, {{{0.5}, {0.3, 0.0}}, {{-0.5}, {0.3, 0.0}}, {{2.0}, {-0.1, 0.0}}, {{-2.0}, {-0.1, 0.0}}}};
    const auto V = potential_from_measure(mu, Box::cube(1, 10));
    for (double x : {-1.3, 0.0, 0.7})
        CHECK(V(x) == doctest::Approx(-0.6 * std::cos(0.5 * x) + 0.2 * std::cos(2.0 * x)).epsilon(1e-14));
}

TEST_CASE("drift from ground state") {
    CHECK(grad(drift_from_ground_state(field("1")), 0.7) == 0.0);
    const auto gauss = drift_from_ground_state(field("exp(-x^2/4)"));
    for (double x : {-2.0, 0.3, 1.5}) CHECK(grad(gauss, x) == doctest::Approx(-x).epsilon(1e-14));
    const auto cosh_beta = drift_from_ground_state(field("cosh(x)"));
    for (double x : {-2.0, 0.3, 1.5}) CHECK(grad(cosh_beta, x) == doctest::Approx(2 * std::tanh(x)).epsilon(1e-14));
}

TEST_CASE("potential from drift") {
    DriftField zero{{field("0")}, true};
    CHECK(potential_from_drift(zero)(1.3) == 0.0);
    const double omega = 1.7;
    DriftField ou{{ScalarField(Expr(-omega) * Expr::var(0), 1, Box::cube(1, 10))}, true};
    for (double x : {-1.0, 0.0, 2.5})
        CHECK(potential_from_drift(ou)(x) == doctest::Approx(omega * omega * x * x / 4 - omega / 2).epsilon(1e-14));
    DriftField th{{field("2*tanh(x)")}, true};
    for (double x : {-1.0, 0.0, 2.5}) CHECK(potential_from_drift(th)(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ground-state round trip gives V phi = phi''") {
    for (const char* phi_text : {"cosh(x)", "exp(-x^2/8)*(2+cos(x))", "1+x^2"}) {
        const auto phi = field(phi_text);
        const auto V = potential_from_drift(drift_from_ground_state(phi));
        for (double x : {-1.5, -0.2, 0.0, 0.9, 2.0}) {
            const double lap = oracle::second_difference([&](double s) { return phi(s); }, x);
            CHECK(std::abs(V(x) * phi(x) - lap) < 1e-8 * (1 + std::abs(lap)));
        }
    }
}

TEST_CASE("OU model from phi = 1") {
    const auto m = build_ou_shifted_model(field("1"), 2.0);
    for (double x : {-1.0, 0.0, 0.8}) {
        CHECK(grad(m.beta_psi, x) == doctest::Approx(-2 * x).epsilon(1e-14));
        CHECK(m.V_tilde(x) == doctest::Approx(x * x - 1).epsilon(1e-14));
    }
    CHECK(m.c_phi == doctest::Approx(std::sqrt(2 * std::sqrt(M_PI))).epsilon(1e-12));
    const double L = m.domain.hi[0];
    const double mass = quad::composite_gauss_legendre([&](double x) { return m.psi(x) * m.psi(x); }, -L, L, 64);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(check_model_invariants(m).ok());
}

TEST_CASE("psi^2 is normalized for several omega") {
    for (double omega : {0.5, 1.0, 3.0}) {
        const auto m = build_ou_shifted_model(field("1"), omega);
        const double L = m.domain.hi[0];
        const double mass = quad::composite_gauss_legendre([&](double x) { return m.psi(x) * m.psi(x); }, -L, L, 64);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(m.psi(0.7) * m.psi(0.7) ==
              doctest::Approx(std::sqrt(omega / (2 * M_PI)) * std::exp(-omega * 0.49 / 2)).epsilon(1e-9));
    }
}

TEST_CASE("cosh ground state regularized by the Gaussian factor") {
    const auto m = build_ou_shifted_model(field("cosh(x)"), 1.0);
    const auto rep = check_model_invariants(m);
    CHECK(rep.ground_state_residual < 1e-8);
    CHECK(rep.normalization_residual < 1e-8);
    CHECK(rep.ok());
    for (double x : {-1.2, 0.0, 0.6, 2.0}) {
        const double lap = oracle::second_difference([&](double s) { return m.psi(s); }, x);
        CHECK(std::abs(m.V_tilde(x) * m.psi(x) - lap) < 1e-8);
    }
}

TEST_CASE("regularity certificates") {
    auto c1 = regularity_certificate(half_pair(1.0), 1.0, 0.0, 1.0);
    CHECK(c1.integral_value == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(c1.C == doctest::Approx(2 * M_E * std::exp(0.25)).epsilon(1e-12));

    SymmetricMeasure delta0{1, {{{0.0}, {1.0, 0.0}}}};
    for (double a : {0.5, 2.0}) {
        auto c = regularity_certificate(delta0, a, 1.0, 3.0);
        CHECK(c.integral_value == doctest::Approx(1.0));
        CHECK(c.C == doctest::Approx(2 * std::exp(3.0 / a)).epsilon(1e-12));
    }

    auto c3 = regularity_certificate(half_pair(2.0), 0.5, 1.0, 2.0);
    CHECK(c3.integral_value == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
    CHECK(c3.C == doctest::Approx(2 * std::exp(4.0) * std::exp(1.5)).epsilon(1e-12));
}

TEST_CASE("periodic ground state of -cos") {
    const auto gs = periodic_ground_state(half_pair(1.0));
    const ScalarField phi(gs.phi, 1, Box::cube(1, 12));
    for (double x = -3.0; x <= 3.0; x += 0.25) {
        CHECK(phi(x) > 0.0);
        const double lap = oracle::second_difference([&](double s) { return phi(s); }, x);
        CHECK(std::abs(lap - (-std::cos(x) - gs.energy) * phi(x)) < 1e-8);
    }
    // With x = 2z this is Mathieu's equation with q = 2, so E0 = a0(2) / 4 (a0(2) = -1.5139568...).
    CHECK(gs.energy == doctest::Approx(-1.5139568850502 / 4).epsilon(1e-9));
}

TEST_CASE("free model") {
    const auto m = free_model();
    CHECK_FALSE(m.normalized);
    CHECK(m.psi(1.3) == 1.0);
    CHECK(m.W_total(0.4) == 0.0);
}
