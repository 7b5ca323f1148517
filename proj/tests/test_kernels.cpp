#include "borelheat/errors.hpp"
#include "borelheat/kernels.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace borelheat;

namespace {

ModelSpec ou_model(double omega) {
    return build_ou_shifted_model(ScalarField(parse_expression("1"), 1, Box::cube(1, 12)), omega);
}

ModelSpec trig_model() {
    SymmetricMeasure mu{1, {{{1.0}, {0.5, 0.0}}, {{-1.0}, {0.5, 0.0}}}};
    const auto gs = periodic_ground_state(mu);
    return build_ou_shifted_model(ScalarField(gs.phi, 1, Box::cube(1, 12)), 1.0, gs.shifted_measure);
}

}  // namespace

TEST_CASE("free kernel value") {
    CHECK(free_kernel(0.1, 0.0, 0.0) == doctest::Approx(0.892062058076386).epsilon(1e-14));
    CHECK(free_kernel(0.3, 1.0, -0.5) == doctest::Approx(std::exp(-2.25 / 1.2) / std::sqrt(1.2 * M_PI)));
}

TEST_CASE("zero potential reproduces the free kernel") {
    const auto tab = expansion_coefficients(PolynomialRep({0.0}), 0.2, 8);
    for (double t : {0.05, 0.5})
        for (double x : {-1.0, 0.2, 1.5}) {
            const auto e = assemble_u(tab, t, x, EvalMode::borel());
            CHECK(e.value == doctest::Approx(free_kernel(t, x, 0.2)).epsilon(1e-13));
            const auto tr = assemble_u(tab, t, x, EvalMode::truncated(0));
            CHECK(tr.value == doctest::Approx(free_kernel(t, x, 0.2)).epsilon(1e-13));
        }
}

TEST_CASE("Mehler closed form") {
    CHECK(mehler_exact(2.0, 0.1, 0.0, 0.0).value ==
          doctest::Approx(1.0 / std::sqrt(4 * M_PI * std::sinh(0.2) / 2)).epsilon(1e-14));
    CHECK(mehler_exact(2.0, 0.3, 0.4, -1.1).value == doctest::Approx(mehler_exact(2.0, 0.3, -1.1, 0.4).value));
    // omega -> 0 degenerates to the free kernel.
    for (double x : {0.0, 1.0})
        CHECK(oracle::rel(mehler_exact(1e-6, 0.2, x, -0.3).value, free_kernel(0.2, x, -0.3)) < 1e-5);
}

TEST_CASE("OU closed form") {
    const double w = 2.0;
    const auto m = ou_model(w);
    for (double t : {0.05, 0.4})
        for (double x : {-1.0, 0.5})
            for (double y : {0.0, 1.3}) {
                const double lhs = m.psi(x) * m.psi(x) * ou_exact(w, t, x, y).value;
                const double rhs = m.psi(y) * m.psi(y) * ou_exact(w, t, y, x).value;
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
            }
    CHECK(ou_exact(w, 30.0, 1.0, 0.7).value == doctest::Approx(m.psi(0.7) * m.psi(0.7)).epsilon(1e-12));
    CHECK(oracle::rel(ou_exact(1e-6, 0.2, 0.4, -0.3).value, free_kernel(0.2, 0.4, -0.3)) < 1e-5);
}

TEST_CASE("Borel-summed Mehler kernel") {
    PolynomialRep W({0.0, 0.0, 1.0});
    for (double t : {0.05, 0.1, 0.25})
        for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.0}, std::pair{1.0, -1.0}}) {
            const auto tab = expansion_coefficients(W, y, 16);
            const auto u = assemble_u(tab, t, x, EvalMode::borel());
            INFO("t=" << t << " x=" << x << " y=" << y);
            CHECK(oracle::rel(u.value, mehler_exact(2.0, t, x, y).value) < 1e-6);
        }
}

TEST_CASE("OU transition kernel from the series") {
    const auto m = ou_model(2.0);
    for (double t : {0.05, 0.1, 0.25})
        for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.0}, std::pair{1.0, -1.0}, std::pair{0.5, 0.0}}) {
            const auto tab = table_for_potential(m.W_total, y, 16, {-12, 12});
            const auto k = assemble_k(m, tab, t, x, y, EvalMode::borel());
            INFO("t=" << t << " x=" << x << " y=" << y);
            CHECK(oracle::rel(k.value, ou_exact(2.0, t, x, y).value) < 1e-6);
        }
}

TEST_CASE("k equals u on the diagonal and the psi conjugation identity") {
    const auto m = trig_model();
    for (double y : {-0.5, 0.0, 0.8}) {
        const auto tab = table_for_potential(m.W_total, y, 12, {-12, 12});
        const auto u = assemble_u(tab, 0.1, y, EvalMode::borel());
        CHECK(assemble_k(m, tab, 0.1, y, y, EvalMode::borel()).value == doctest::Approx(u.value).epsilon(1e-15));
        for (double x : {-1.0, 0.4}) {
            const auto kt = modified_kernel(m, tab, 0.1, x, y, EvalMode::borel());
            const auto ux = assemble_u(tab, 0.1, x, EvalMode::borel());
            const double lhs = kt.value * m.psi(x) / m.psi(y);
            const double rhs = std::sqrt(4 * M_PI * 0.1) * std::exp((x - y) * (x - y) / 0.4) * ux.value;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
        }
    }
}

TEST_CASE("modified kernel of the free model is 1") {
    const auto m = free_model(1, 8);
    for (double t : {0.05, 0.1, 0.5})
        for (double x : {-2.0, 0.0, 1.3, 2.0})
            for (double y : {-2.0, 0.7, 2.0}) {
                const auto tab = table_for_potential(m.W_total, y, 12, {-8, 8});
                CHECK(std::abs(modified_kernel(m, tab, t, x, y, EvalMode::borel()).value - 1.0) <= 1e-10);
            }
}

TEST_CASE("modified OU kernel tends to 1 on the diagonal") {
    const auto m = ou_model(2.0);
    const auto tab = table_for_potential(m.W_total, 0.6, 10, {-12, 12});
    double prev = 1.0;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double dev = std::abs(modified_kernel(m, tab, t, 0.6, 0.6, EvalMode::borel()).value - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("modified OU kernel at t = 0.1 composes Mehler and the psi ratio") {
    const auto m = ou_model(2.0);
    const auto tab = table_for_potential(m.W_total, 0.0, 16, {-12, 12});
    const auto kt = modified_kernel(m, tab, 0.1, 1.0, 0.0, EvalMode::borel());
    // W = x^2 - 1: exp(0.1) times the Mehler series part.
    const double mehler_part = mehler_exact(2.0, 0.1, 1.0, 0.0).value / free_kernel(0.1, 1.0, 0.0);
    CHECK(oracle::rel(kt.value, m.psi(0.0) / m.psi(1.0) * std::exp(0.1) * mehler_part) < 1e-9);
}

TEST_CASE("series kernel symmetry") {
    const auto m = trig_model();
    SeriesKernel sk(m, 16, EvalMode::borel(), {-12, 12});
    for (auto [x, y] : {std::pair{-1.0, 0.0}, std::pair{0.3, 1.2}, std::pair{-1.0, 1.0}})
        CHECK(oracle::rel(sk.u(0.1, x, y), sk.u(0.1, y, x)) < 1e-8);
}

TEST_CASE("consistency suite on the free model and OU") {
    const auto f = free_model(1, 8);
    const auto fr = consistency_suite(f, [](double t, double x, double y) { return free_kernel(t, x, y); }, 0.1, 0.1,
                                      {-1, 0, 1});
    CHECK(fr.chapman_kolmogorov <= 1e-10);
    CHECK(fr.mass <= 1e-10);
    CHECK(fr.detailed_balance <= 1e-10);

    const auto m = ou_model(2.0);
    auto ou_u = [&](double t, double x, double y) { return m.psi(x) / m.psi(y) * ou_exact(2.0, t, x, y).value; };
    const auto rep = consistency_suite(m, ou_u, 0.1, 0.1, {-1, 0, 1});
    CHECK(rep.chapman_kolmogorov <= 1e-8);
    CHECK(rep.mass <= 1e-10);
    CHECK(rep.detailed_balance <= 1e-12);
    CHECK(rep.quadrature_converged);
}

TEST_CASE("heat residual order of the truncated trig expansion") {
    const auto m = trig_model();
    const std::vector<double> times{0.2, 0.1, 0.05, 0.025, 0.0125};
    for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{0.7, -0.2}}) {
        const auto tab = table_for_potential(m.W_total, y, 10, {-12, 12});
        const auto rep = heat_residual_order(tab, x, 8, times);
        CHECK(rep.observed_order >= 8 - 1.5);
    }
}

TEST_CASE("PDE oracle on the free and OU models") {
    PDEGrid g;
    g.lo = -6;
    g.hi = 6;
    const auto sol = solve_pde_forward(free_model(1, 6), 0.1, 0.0, g);
    double worst = 0.0;
    for (double x = -1.5; x <= 1.5; x += 0.25) worst = std::max(worst, oracle::rel(sol(x), free_kernel(0.1, x, 0.0)));
    CHECK(worst <= 1e-4);

    const auto ou = solve_pde_forward(ou_model(2.0), 0.1, 0.5, g);
    worst = 0.0;
    for (double x = -0.5; x <= 1.5; x += 0.25) worst = std::max(worst, oracle::rel(ou(x), ou_exact(2.0, 0.1, 0.5, x).value));
    CHECK(worst <= 1e-4);
}

TEST_CASE("PDE self-convergence in space") {
    PDEGrid g;
    g.lo = -5;
    g.hi = 5;
    g.dt = 1e-5;
    auto err = [&](double h) {
        g.h = h;
        const auto sol = solve_pde_forward(free_model(1, 5), 0.05, 0.0, g);
        double worst = 0.0;
        for (double x = -1.0; x <= 1.0; x += 0.25) worst = std::max(worst, std::abs(sol(x) - free_kernel(0.05, x, 0.0)));
        return worst;
    };
    const double e1 = err(1.0 / 32), e2 = err(1.0 / 64);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("PDE reports mass loss on a short domain") {
    PDEGrid g;
    g.lo = -0.5;
    g.hi = 0.5;
    g.h = 1.0 / 128;
    CHECK_THROWS_AS(solve_pde_forward(free_model(1, 4), 0.1, 0.0, g), MassLoss);
}

TEST_CASE("kernel CSV layout") {
    KernelEstimate e;
    e.t = 0.1;
    e.value = 0.5;
    e.method = Method::Borel;
    std::ostringstream os;
    write_kernel_csv(os, {e});
    CHECK(os.str().find("t,x,y,method,value,diag_quad_error,diag_clearance") != std::string::npos);
}
