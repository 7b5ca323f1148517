#include "borelheat/kernels.hpp"

#include "borelheat/compensated.hpp"
#include "borelheat/errors.hpp"
#include "borelheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace borelheat {

namespace {

// Series terms are skipped once (x - y)^2 / 4t exceeds this (prefactor < 1e-20 of its peak).
constexpr double kNegligibleExponent = 46.0;

double log_free_kernel(double t, double x, double y, int d) {
    return -0.5 * d * std::log(4.0 * M_PI * t) - (x - y) * (x - y) / (4.0 * t);
}

double psi_ratio(const ModelSpec& model, double x, double y) {
    const double px = model.psi(x), py = model.psi(y);
    if (!(px > 0.0) || !(py > 0.0)) throw NonPositiveGroundState("psi is not positive at the evaluation points");
    return py / px;
}

void fill_series(KernelEstimate& est, const std::vector<double>& a, double t, const EvalMode& mode) {
    est.method = mode.method;
    if (mode.method == Method::Truncated) {
        const size_t n = mode.terms > 0 ? std::min<size_t>(mode.terms, a.size()) : a.size();
        double s = 0.0;
        for (size_t j = n; j-- > 0;) s = s * t + a[j];
        est.series_part = s;
    } else if (mode.method == Method::Borel) {
        const FormalSeries series{a};
        if (mode.orders) {
            est.diagnostics = borel_sum(series, t, *mode.orders);
        } else {
            StabilitySweep sweep = borel_sum_auto(series, t);
            est.diagnostics = sweep.best;
            est.stability_spread = sweep.spread;
        }
        est.series_part = est.diagnostics->value;
    } else {
        throw std::invalid_argument("series assembly supports truncated and borel modes only");
    }
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::Truncated: return "truncated";
    case Method::Borel: return "borel";
    case Method::Exact: return "exact";
    case Method::PDE: return "pde";
    }
    return "unknown";
}

double free_kernel(double t, double x, double y, int d) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel time must be positive");
    return std::exp(log_free_kernel(t, x, y, d));
}

CoefficientTable table_for_potential(const ScalarField& W, double y, int r_max, Interval interval, int jet_degree,
                                     int fit_degree, std::shared_ptr<const TransportContinuation> continuation) {
    if (auto poly = W.as_polynomial())
        return expansion_coefficients(PolynomialRep(*poly, 0.0), y, r_max, interval);
    if (W.symbolic()) {
        const int degree = std::max(jet_degree, 2 * (r_max - 1));
        CoefficientTable table =
            expansion_coefficients(potential_jet(W, y, degree), y, r_max, interval, kDefaultDegreeCap, degree);
        table.continuation = continuation ? std::move(continuation) : std::make_shared<const TransportContinuation>(W);
        return table;
    }
    const PotentialFit fit = approximate_potential(W, interval, fit_degree);
    return expansion_coefficients(fit.polynomial, y, r_max, interval);
}

KernelEstimate assemble_u(const std::vector<double>& series, double t, double x, double y, EvalMode mode) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel time must be positive");
    KernelEstimate est;
    est.t = t;
    est.x = x;
    est.y = y;
    est.kind = "u";
    est.prefactor = free_kernel(t, x, y);
    fill_series(est, series, t, mode);
    est.value = est.prefactor * est.series_part;
    return est;
}

KernelEstimate assemble_u(const CoefficientTable& table, double t, double x, EvalMode mode) {
    return assemble_u(coefficient_series(table, x), t, x, table.y, mode);
}

KernelEstimate assemble_k(const ModelSpec& model, const CoefficientTable& table, double t, double x, double y,
                          EvalMode mode) {
    if (table.y != y) throw std::invalid_argument("coefficient table is not based at y");
    KernelEstimate est = assemble_u(table, t, x, mode);
    est.kind = "k";
    est.series_part *= psi_ratio(model, x, y);
    est.value = est.prefactor * est.series_part;
    return est;
}

KernelEstimate modified_kernel(const ModelSpec& model, const CoefficientTable& table, double t, double x, double y,
                               EvalMode mode) {
    KernelEstimate est = assemble_k(model, table, t, x, y, mode);
    est.kind = "k_tilde";
    est.prefactor = 1.0;
    est.value = est.series_part;
    return est;
}

KernelEstimate mehler_exact(double omega, double t, double x, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel time must be positive");
    if (omega < 0.0) throw std::invalid_argument("omega must be nonnegative");
    const double wt = omega * t;
    // sinh(wt)/omega and cosh(wt) - 1 = 2 sinh^2(wt/2), both stable as omega -> 0.
    const double sh = omega > 0.0 ? std::sinh(wt) / omega : t;
    const double sh_half = omega > 0.0 ? std::sinh(0.5 * wt) : 0.0;
    const double cosh_m1 = 2.0 * sh_half * sh_half;
    const double exponent = -((x * x + y * y) * cosh_m1 + (x - y) * (x - y)) / (4.0 * sh);
    const double log_value = -0.5 * std::log(4.0 * M_PI * sh) + exponent;
    KernelEstimate est;
    est.t = t;
    est.x = x;
    est.y = y;
    est.method = Method::Exact;
    est.kind = "u";
    est.value = std::exp(log_value);
    est.prefactor = free_kernel(t, x, y);
    est.series_part = std::exp(log_value - log_free_kernel(t, x, y, 1));
    return est;
}

KernelEstimate ou_exact(double omega, double t, double x, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel time must be positive");
    if (omega < 0.0) throw std::invalid_argument("omega must be nonnegative");
    const double mean = x * std::exp(-omega * t);
    const double var = omega > 0.0 ? -std::expm1(-2.0 * omega * t) / omega : 2.0 * t;
    const double log_value = -0.5 * std::log(2.0 * M_PI * var) - (y - mean) * (y - mean) / (2.0 * var);
    KernelEstimate est;
    est.t = t;
    est.x = x;
    est.y = y;
    est.method = Method::Exact;
    est.kind = "k";
    est.value = std::exp(log_value);
    est.prefactor = free_kernel(t, x, y);
    est.series_part = std::exp(log_value - log_free_kernel(t, x, y, 1));
    return est;
}

SeriesKernel::SeriesKernel(ModelSpec model, int r_max, EvalMode mode, Interval interval, int jet_degree)
    : model_(std::move(model)), r_max_(r_max), mode_(mode), interval_(interval), jet_degree_(jet_degree) {
    if (model_.d != 1) throw std::invalid_argument("series kernels are one-dimensional");
    if (!model_.W_total.as_polynomial() && model_.W_total.symbolic())
        continuation_ = std::make_shared<const TransportContinuation>(model_.W_total);
}

const CoefficientTable& SeriesKernel::table(double base) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(base);
    if (it == cache_.end())
        it = cache_
                 .emplace(base, std::make_shared<const CoefficientTable>(
                                    table_for_potential(model_.W_total, base, r_max_, interval_, jet_degree_, 28,
                                                        continuation_)))
                 .first;
    return *it->second;
}

double SeriesKernel::u(double t, double x, double y) const {
    if ((x - y) * (x - y) / (4.0 * t) > kNegligibleExponent) return 0.0;
    return assemble_u(table(x), t, y, mode_).value;
}

double SeriesKernel::k(double t, double x, double y) const { return psi_ratio(model_, x, y) * u(t, x, y); }

double PDESolution::operator()(double x) const {
    const double s = (x - lo) / h;
    const long n = static_cast<long>(values.size());
    if (s < 0.0 || s > static_cast<double>(n - 1)) return 0.0;
    long i = std::clamp(static_cast<long>(std::floor(s)) - 1, 0L, std::max(0L, n - 4));
    double acc = 0.0;
    for (long j = i; j < i + 4 && j < n; ++j) {
        double w = 1.0;
        for (long m = i; m < i + 4 && m < n; ++m)
            if (m != j) w *= (s - static_cast<double>(m)) / static_cast<double>(j - m);
        acc += w * values[j];
    }
    return acc;
}

namespace {

// theta-scheme step (I - theta dt L) p+ = (I + (1 - theta) dt L) p with L tridiagonal
// (sub, diag, sup) on interior nodes and p = 0 at both ends.
void theta_step(std::vector<double>& p, const std::vector<double>& sub, const std::vector<double>& diag,
                const std::vector<double>& sup, double dt, double theta) {
    const size_t n = p.size();
    std::vector<double> rhs(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double lp = sub[i] * p[i - 1] + diag[i] * p[i] + sup[i] * p[i + 1];
        rhs[i] = p[i] + (1.0 - theta) * dt * lp;
    }
    // Thomas on interior nodes 1..n-2.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double a = -theta * dt * sub[i];
        const double b = 1.0 - theta * dt * diag[i];
        const double cc = -theta * dt * sup[i];
        const double denom = b - (i > 1 ? a * c[i - 1] : 0.0);
        c[i] = cc / denom;
        d[i] = (rhs[i] - (i > 1 ? a * d[i - 1] : 0.0)) / denom;
    }
    p.assign(n, 0.0);
    for (size_t i = n - 2; i >= 1; --i) {
        p[i] = d[i] - (i + 2 < n ? c[i] * p[i + 1] : 0.0);
        if (i == 1) break;
    }
}

PDESolution run_pde(const ModelSpec& model, double t, double y, const PDEGrid& g, double width) {
    const size_t n = static_cast<size_t>(std::llround((g.hi - g.lo) / g.h)) + 1;
    PDESolution sol;
    sol.lo = g.lo;
    sol.h = (g.hi - g.lo) / static_cast<double>(n - 1);
    sol.t = t;
    sol.y = y;
    sol.mollifier_width = width;
    const double h = sol.h;
    const double t0 = 0.5 * width * width;
    if (!(t > t0)) throw std::invalid_argument("PDE time must exceed the mollifier time 2h^2");

    std::vector<double> beta(n);
    for (size_t i = 0; i < n; ++i) beta[i] = model.beta_psi.components.front()(sol.x_at(i));
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        sub[i] = 1.0 / (h * h) + beta[i - 1] / (2.0 * h);
        diag[i] = -2.0 / (h * h);
        sup[i] = 1.0 / (h * h) - beta[i + 1] / (2.0 * h);
    }

    std::vector<double> p(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) p[i] = free_kernel(t0, sol.x_at(i), y);
    auto mass = [&] {
        CompensatedSum s;
        for (double v : p) s += v;
        return h * s.value();
    };
    sol.mass_initial = mass();

    const double span = t - t0;
    const double smooth_dt = 0.5 * g.dt;
    int smooth = g.smoothing_steps;
    while (smooth > 0 && smooth * smooth_dt > 0.5 * span) --smooth;
    for (int k = 0; k < smooth; ++k) theta_step(p, sub, diag, sup, smooth_dt, 1.0);
    const double rest = span - smooth * smooth_dt;
    const int steps = std::max(1, static_cast<int>(std::ceil(rest / g.dt - 1e-9)));
    const double dt = rest / steps;
    for (int k = 0; k < steps; ++k) theta_step(p, sub, diag, sup, dt, 0.5);
    sol.dt = dt;
    sol.steps = steps + smooth;
    sol.mass_final = mass();
    sol.values = std::move(p);
    return sol;
}

}  // namespace

PDESolution solve_pde_forward(const ModelSpec& model, double t, double y, const PDEGrid& grid) {
    if (model.d != 1) throw std::invalid_argument("PDE oracle is one-dimensional");
    if (!(grid.h > 0.0) || !(grid.dt > 0.0) || !(grid.hi > grid.lo)) throw std::invalid_argument("bad PDE grid");
    if (y <= grid.lo || y >= grid.hi) throw std::invalid_argument("start point outside the PDE grid");
    PDESolution sol = run_pde(model, t, y, grid, 2.0 * grid.h);
    if (grid.richardson) {
        // Error is linear in the mollifier time t0 = w^2/2; w -> 2w quadruples it.
        const PDESolution wide = run_pde(model, t, y, grid, 4.0 * grid.h);
        for (size_t i = 0; i < sol.values.size(); ++i)
            sol.values[i] = (4.0 * sol.values[i] - wide.values[i]) / 3.0;
        sol.mass_final = (4.0 * sol.mass_final - wide.mass_final) / 3.0;
        sol.mass_initial = (4.0 * sol.mass_initial - wide.mass_initial) / 3.0;
    }
    const double leak = std::abs(sol.mass_initial - sol.mass_final);
    if (leak > 1e-4)
        throw MassLoss("PDE lost " + std::to_string(leak) + " of its mass through the boundary; enlarge the grid");
    return sol;
}

ConsistencyReport consistency_suite(const ModelSpec& model, const KernelFn& u, double t, double s,
                                    const std::vector<double>& points) {
    if (!(t > 0.0) || !(s > 0.0)) throw std::invalid_argument("consistency suite needs positive times");
    const double L = model.domain.hi.front();
    auto psi = [&](double x) { return model.psi(x); };

    struct Values {
        std::vector<double> ck, mass;
    };
    auto evaluate = [&](int nodes) {
        const quad::Rule rule = quad::gauss_legendre(nodes, -L, L);
        Values v;
        for (double x : points) {
            std::vector<double> ux(nodes);
            for (int q = 0; q < nodes; ++q) ux[q] = u(t, x, rule.nodes[q]);
            CompensatedSum m;
            for (int q = 0; q < nodes; ++q) m += rule.weights[q] * psi(rule.nodes[q]) * ux[q];
            v.mass.push_back(m.value() / psi(x));
            for (double y : points) {
                CompensatedSum c;
                for (int q = 0; q < nodes; ++q) c += rule.weights[q] * ux[q] * u(s, y, rule.nodes[q]);
                v.ck.push_back(psi(y) / psi(x) * c.value());
            }
        }
        return v;
    };
    auto rel_change = [](const std::vector<double>& a, const std::vector<double>& b) {
        double worst = 0.0;
        for (size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
        return worst;
    };

    ConsistencyReport rep;
    int nodes = 100;
    Values prev = evaluate(nodes);
    while (nodes < 1600) {
        nodes *= 2;
        Values cur = evaluate(nodes);
        const double change = std::max(rel_change(prev.ck, cur.ck), rel_change(prev.mass, cur.mass));
        prev = std::move(cur);
        if (change < 1e-10) {
            rep.quadrature_converged = true;
            break;
        }
    }
    rep.quadrature_nodes = nodes;

    size_t idx = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        const double x = points[i];
        rep.mass = std::max(rep.mass, std::abs(prev.mass[i] - 1.0));
        for (double y : points) {
            const double target = psi(y) / psi(x) * u(t + s, x, y);
            const double diff = std::abs(prev.ck[idx++] - target);
            rep.chapman_kolmogorov = std::max(rep.chapman_kolmogorov, diff);
            rep.chapman_kolmogorov_relative =
                std::max(rep.chapman_kolmogorov_relative, diff / std::max(std::abs(target), 1e-300));
            // psi^2(x) k(t,x,y) = psi(x) psi(y) u(t,x,y).
            rep.detailed_balance =
                std::max(rep.detailed_balance, psi(x) * psi(y) * std::abs(u(t, x, y) - u(t, y, x)));
        }
    }
    return rep;
}

HeatResidualReport heat_residual_order(const CoefficientTable& table, double x, int terms,
                                       const std::vector<double>& times) {
    if (terms < 2 || terms > table.r_max() + 1) throw OrderOutOfRange("heat residual needs 2 <= terms <= r_max + 1");
    if (times.size() < 2) throw std::invalid_argument("heat residual needs at least two times");
    using ld = long double;
    auto eval = [&](const PolynomialRep& p, int deriv) {
        // Horner in long double on the stored coefficients.
        const ld z = static_cast<ld>(x) - static_cast<ld>(p.center);
        ld acc = 0.0L;
        const auto& c = p.coefficients;
        for (size_t k = c.size(); k-- > static_cast<size_t>(deriv);) {
            ld f = 1.0L;
            for (int m = 0; m < deriv; ++m) f *= static_cast<ld>(k - m);
            acc = acc * z + f * static_cast<ld>(c[k]);
        }
        return acc;
    };
    std::vector<ld> a(terms), a1(terms), a2(terms);
    for (int j = 0; j < terms; ++j) {
        a[j] = eval(table.orders[j], 0);
        a1[j] = eval(table.orders[j], 1);
        a2[j] = eval(table.orders[j], 2);
    }
    const ld W = eval(table.potential, 0);
    const ld z = static_cast<ld>(x) - static_cast<ld>(table.y);

    HeatResidualReport rep;
    rep.times = times;
    for (double td : times) {
        const ld t = td;
        ld S = 0, St = 0, Sx = 0, Sxx = 0, tp = 1;
        for (int j = 0; j < terms; ++j) {
            S += a[j] * tp;
            Sx += a1[j] * tp;
            Sxx += a2[j] * tp;
            if (j + 1 < terms) St += static_cast<ld>(j + 1) * a[j + 1] * tp;
            tp *= t;
        }
        const ld rho = St + (z / t) * Sx - Sxx + W * S;
        rep.residuals.push_back(static_cast<double>(std::fabs(rho)));
    }
    const size_t n = times.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += std::log(times[i]) / n;
        my += std::log(rep.residuals[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (std::log(times[i]) - mx) * (std::log(rep.residuals[i]) - my);
        sxx += (std::log(times[i]) - mx) * (std::log(times[i]) - mx);
    }
    rep.observed_order = sxy / sxx;
    rep.min_step_order = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < n; ++i)
        rep.min_step_order =
            std::min(rep.min_step_order, std::log(rep.residuals[i - 1] / rep.residuals[i]) / std::log(times[i - 1] / times[i]));
    return rep;
}

void write_kernel_csv(std::ostream& os, const std::vector<KernelEstimate>& rows) {
    os << "t,x,y,method,value,diag_quad_error,diag_clearance\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.t << ',' << r.x << ',' << r.y << ',' << method_name(r.method) << ',' << r.value << ',';
        if (r.diagnostics) {
            os << r.diagnostics->quadrature_error << ',';
            if (std::isfinite(r.diagnostics->pole_clearance)) os << r.diagnostics->pole_clearance;
            else os << "inf";
        } else {
            os << ',';
        }
        os << '\n';
    }
}

void write_pde_csv(std::ostream& os, const PDESolution& sol, int stride) {
    os << "x,density\n";
    os << std::setprecision(17);
    for (size_t i = 0; i < sol.values.size(); i += std::max(1, stride)) os << sol.x_at(i) << ',' << sol.values[i] << '\n';
}

}  // namespace borelheat
