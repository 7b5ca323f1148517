// Acceptance checks AC-1..AC-8. Prints one PASS/FAIL line per criterion and
// exits nonzero when any selected criterion fails.
//
//   acceptance            all criteria
//   acceptance AC-4 AC-6  selected criteria

#include "borelheat/borel.hpp"
#include "borelheat/coeffs.hpp"
#include "borelheat/kernels.hpp"
#include "borelheat/lamperti.hpp"
#include "borelheat/model.hpp"
#include "borelheat/quadrature.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace borelheat;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const char* fmt, double v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, v);
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += buf;
    o.pass = o.pass && ok;
}

std::string pair_name(const char* tag, double x, double y) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s (%g, %g)", tag, x, y);
    return buf;
}

ScalarField field(const char* text, double half_width = 12.0) {
    return ScalarField(parse_expression(text), 1, Box::cube(1, half_width));
}

ModelSpec trig_model() {
    SymmetricMeasure mu{1, {{{1.0}, {0.5, 0.0}}, {{-1.0}, {0.5, 0.0}}}};
    const auto gs = periodic_ground_state(mu);
    return build_ou_shifted_model(ScalarField(gs.phi, 1, Box::cube(1, 12)), 1.0, gs.shifted_measure);
}

const std::vector<std::pair<double, double>> kOracleSet{{0, 0}, {1, 0}, {1, -1}};
const std::vector<double> kTrigPoints{-1, 0, 1};

Outcome ac1() {
    Outcome o;
    const auto m = free_model(1, 8);
    double worst_a = 0.0, worst_k = 0.0;
    for (int iy = 0; iy <= 8; ++iy) {
        const double y = -2.0 + 0.5 * iy;
        const auto tab = table_for_potential(m.W_total, y, 12, {-8, 8});
        for (int ix = 0; ix <= 8; ++ix) {
            const double x = -2.0 + 0.5 * ix;
            const auto a = coefficient_series(tab, x);
            for (int r = 1; r <= 12; ++r) worst_a = std::max(worst_a, std::abs(a[r]));
            for (double t : {0.05, 0.1, 0.5})
                worst_k = std::max(worst_k, std::abs(modified_kernel(m, tab, t, x, y, EvalMode::borel()).value - 1.0));
        }
    }
    note(o, worst_a < 1e-12, "max|a_r| = %.1e", worst_a);
    note(o, worst_k <= 1e-10, "max|k~ - 1| = %.1e", worst_k);
    return o;
}

Outcome ac2() {
    Outcome o;
    PolynomialRep W({0.0, 0.0, 1.0});  // omega^2 x^2 / 4 with omega = 2
    double worst_a = 0.0, worst_u = 0.0;
    for (auto [x, y] : kOracleSet) {
        const auto a = coefficient_series(expansion_coefficients(W, y, 10), x);
        const auto ref = oracle::mehler_series(2.0, x, y, 10);
        for (int r = 0; r <= 10; ++r)
            if (ref[r] != 0.0) worst_a = std::max(worst_a, oracle::rel(a[r], ref[r]));
            else worst_a = std::max(worst_a, std::abs(a[r]));
        const auto tab = expansion_coefficients(W, y, 16);
        for (double t : {0.05, 0.1, 0.25})
            worst_u = std::max(worst_u, oracle::rel(assemble_u(tab, t, x, EvalMode::borel()).value,
                                                    mehler_exact(2.0, t, x, y).value));
    }
    note(o, worst_a <= 1e-8, "coefficients vs Mehler Taylor rel %.1e", worst_a);
    note(o, worst_u <= 1e-6, "Borel u vs mehler_exact rel %.1e", worst_u);
    return o;
}

Outcome ac3() {
    Outcome o;
    const auto m = build_ou_shifted_model(field("1"), 2.0);
    const Interval iv{-m.domain.hi[0], m.domain.hi[0]};
    std::map<double, CoefficientTable> tabs;
    auto tab = [&](double y) -> const CoefficientTable& {
        auto it = tabs.find(y);
        if (it == tabs.end()) it = tabs.emplace(y, table_for_potential(m.W_total, y, 16, iv)).first;
        return it->second;
    };
    double worst_k = 0.0, worst_db = 0.0, worst_sym = 0.0;
    for (double t : {0.05, 0.1, 0.25})
        for (auto [x, y] : kOracleSet) {
            const double k = assemble_k(m, tab(y), t, x, y, EvalMode::borel()).value;
            worst_k = std::max(worst_k, oracle::rel(k, ou_exact(2.0, t, x, y).value));
            const double k_rev = assemble_k(m, tab(x), t, y, x, EvalMode::borel()).value;
            worst_db = std::max(worst_db, std::abs(m.psi(x) * m.psi(x) * k - m.psi(y) * m.psi(y) * k_rev));
        }
    for (auto [x, y] : kOracleSet) {
        const auto axy = coefficient_series(tab(y), x), ayx = coefficient_series(tab(x), y);
        for (size_t r = 0; r < axy.size(); ++r)
            worst_sym = std::max(worst_sym, std::abs(axy[r] - ayx[r]) / std::max(1.0, std::abs(axy[r])));
    }
    note(o, worst_k <= 1e-6, "k vs ou_exact rel %.1e", worst_k);
    note(o, worst_db <= 1e-8, "detailed balance %.1e", worst_db);
    note(o, worst_sym <= 1e-10, "a_r(x,y) - a_r(y,x) %.1e", worst_sym);
    return o;
}

Outcome ac4() {
    Outcome o;
    const auto m = trig_model();
    SeriesKernel sk(m, 16, EvalMode::borel(), {-12, 12});
    PDEGrid grid;  // h = 1/512, dt = 1e-4 on [-12, 12]
    double worst = 0.0;
    for (double y : kTrigPoints) {
        const auto sol = solve_pde_forward(m, 0.1, y, grid);  // started at y: k(0.1, y, .)
        for (double x : kTrigPoints) worst = std::max(worst, oracle::rel(sk.k(0.1, y, x), sol(x)));
    }
    note(o, worst <= 1e-3, "Borel k vs Crank-Nicolson rel %.1e", worst);
    return o;
}

Outcome ac5() {
    Outcome o;
    FormalSeries euler;
    double f = 1.0;
    for (int r = 0; r <= 16; ++r) {
        if (r > 0) f *= r;
        euler.coeffs.push_back((r % 2 ? -1.0 : 1.0) * f);
    }
    const double ref = oracle::euler_integral(0.1);
    const double e = std::abs(borel_sum(euler, 0.1, {8, 8}).value - ref);
    FormalSeries geo;
    geo.coeffs.assign(33, 1.0);
    const double g = std::abs(borel_sum(geo, 0.5, {30, 2}).value - 2.0);
    note(o, e <= 1e-8, "Euler |err| %.1e", e);
    note(o, g <= 1e-8, "geometric |err| %.1e", g);
    return o;
}

Outcome ac6() {
    Outcome o;
    std::vector<std::pair<std::string, std::vector<double>>> sequences;
    PolynomialRep W({0.0, 0.0, 1.0});
    for (auto [x, y] : kOracleSet)
        sequences.emplace_back(pair_name("Mehler", x, y),
                               coefficient_series(expansion_coefficients(W, y, 12), x));
    const auto m = trig_model();
    auto cont = std::make_shared<const TransportContinuation>(m.W_total);
    for (double y : kTrigPoints) {
        const auto tab = table_for_potential(m.W_total, y, 12, {-12, 12}, 400, 28, cont);
        for (double x : kTrigPoints)
            sequences.emplace_back(pair_name("trig", x, y),
                                   coefficient_series(tab, x));
    }
    double worst_drift = 0.0, worst_res = -1e300;
    bool finite = true;
    std::string worst_name;
    for (const auto& [name, a] : sequences) {
        const auto g1 = gevrey_fit(a, {5, 10}), g2 = gevrey_fit(a, {6, 12});
        finite = finite && std::isfinite(g1.kappa) && std::isfinite(g2.kappa) && g1.kappa > 0 && g2.kappa > 0;
        const double drift = std::abs(g2.kappa - g1.kappa) / g1.kappa;
        if (drift > worst_drift) {
            worst_drift = drift;
            worst_name = name;
        }
        worst_res = std::max({worst_res, g1.residual, g2.residual});
    }
    note(o, finite, "finite kappa > 0: %.0f", finite ? 1.0 : 0.0);
    note(o, worst_drift < 0.20, "max kappa drift %.3f", worst_drift);
    o.detail += " at " + worst_name;
    note(o, worst_res <= 1e-12, "max bound residual %.1e", worst_res);
    return o;
}

Outcome ac7() {
    Outcome o;
    const auto m = build_ou_shifted_model(field("1"), 2.0);
    const Interval iv{-m.domain.hi[0], m.domain.hi[0]};
    SeriesKernel sk(m, 16, EvalMode::borel(), iv);
    const auto rep = consistency_suite(m, [&](double t, double x, double y) { return sk.u(t, x, y); }, 0.1, 0.1,
                                       kTrigPoints);
    note(o, rep.chapman_kolmogorov <= 1e-4, "CK %.1e", rep.chapman_kolmogorov);
    note(o, rep.mass <= 1e-4, "mass %.1e", rep.mass);
    const std::vector<double> times{0.2, 0.1, 0.05, 0.025, 0.0125};
    double worst_order = 1e300;
    const auto trig = trig_model();
    for (const ModelSpec* model : {&m, &trig})
        for (auto [x, y] : kOracleSet) {
            const auto tab = table_for_potential(model->W_total, y, 10, iv);
            worst_order = std::min(worst_order, heat_residual_order(tab, x, 8, times).observed_order);
        }
    note(o, worst_order >= 8 - 1.5, "heat residual order %.2f (r = 8)", worst_order);
    return o;
}

Outcome ac8() {
    Outcome o;
    const auto map = build_map({field("sqrt(1+x^2)", 1e7), 0.0}, {-60, 60});
    double e_map = 0.0, e_inv = 0.0;
    for (int i = 0; i <= 1200; ++i) {
        const double s = -60.0 + 0.1 * i;
        const double x = map.gamma(s);
        e_map = std::max(e_map, std::abs(x - std::asinh(s)));
        e_inv = std::max(e_inv, std::abs(map.inverse(x) - s));
    }
    TransitionKernel p = [](double t, double x, double xt) { return free_kernel(t, x, xt); };
    double e_mass = 0.0;
    for (double s : {-2.0, 0.0, 1.0}) {
        const double mass = quad::composite_gauss_legendre(
            [&](double st) { return pullback_density(p, map, 0.1, s, st); }, -60, 60, 400, 20);
        e_mass = std::max(e_mass, std::abs(mass - 1.0));
    }
    const auto rep = check_hypotheses(field("0", 1e7), {field("1+x^2", 1e7), 0.0});
    note(o, e_map <= 1e-10, "gamma vs asinh %.1e", e_map);
    note(o, e_inv <= 1e-10, "roundtrip %.1e", e_inv);
    note(o, e_mass <= 1e-6, "pullback mass %.1e", e_mass);
    note(o, !rep.one_over_sigma_not_L1_at_infinity.pass, "1+x^2 integrability flag fails: %.0f",
         rep.one_over_sigma_not_L1_at_infinity.pass ? 0.0 : 1.0);
    return o;
}

struct Criterion {
    const char* id;
    std::function<Outcome()> run;
    double budget_s;  // 0: no runtime requirement
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{{"AC-1", ac1, 1.0},  {"AC-2", ac2, 10.0}, {"AC-3", ac3, 0.0},
                                     {"AC-4", ac4, 60.0}, {"AC-5", ac5, 0.0},  {"AC-6", ac6, 0.0},
                                     {"AC-7", ac7, 0.0},  {"AC-8", ac8, 0.0}};
    std::vector<std::string> selected(argv + 1, argv + argc);
    bool all_pass = true;
    for (const auto& c : all) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0) note(o, secs < c.budget_s, "runtime budget %.0f s", c.budget_s);
        std::printf("%s %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
