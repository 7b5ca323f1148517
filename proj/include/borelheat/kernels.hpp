#pragma once

#include "borelheat/borel.hpp"
#include "borelheat/coeffs.hpp"
#include "borelheat/model.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace borelheat {

enum class Method { Truncated, Borel, Exact, PDE };

std::string method_name(Method m);

struct EvalMode {
    Method method = Method::Borel;
    int terms = 0;  // truncated: sum of a_j t^j for j < terms (0 = all available)
    std::optional<std::pair<int, int>> orders;  // borel: fixed [m/n]; otherwise borel_sum_auto

    static EvalMode truncated(int terms) { return {Method::Truncated, terms, std::nullopt}; }
    static EvalMode borel(std::optional<std::pair<int, int>> orders = std::nullopt) {
        return {Method::Borel, 0, orders};
    }
};

struct KernelEstimate {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    Method method = Method::Exact;
    std::string kind = "u";   // u, k, k_tilde
    double prefactor = 1.0;   // (4 pi t)^{-1/2} exp(-(x-y)^2 / 4t) for u and k
    double series_part = 1.0; // value = prefactor * series_part
    std::optional<BorelSumResult> diagnostics;
    double stability_spread = 0.0;
};

/// (4 pi t)^{-d/2} exp(-|x-y|^2 / 4t).
double free_kernel(double t, double x, double y, int d = 1);

/// Builds the table for W at base point y. Exact polynomials are used as they are;
/// other symbolic potentials enter through a Taylor jet of degree `jet_degree` and
/// carry a TransportContinuation (`continuation`, or a fresh one) for far points;
/// plain callables go through a Chebyshev fit of degree `fit_degree` on `interval`.
CoefficientTable table_for_potential(const ScalarField& W, double y, int r_max, Interval interval,
                                     int jet_degree = 400, int fit_degree = 28,
                                     std::shared_ptr<const TransportContinuation> continuation = nullptr);

KernelEstimate assemble_u(const CoefficientTable& table, double t, double x, EvalMode mode);

/// Same from precomputed a_0(x, y) .. a_R(x, y).
KernelEstimate assemble_u(const std::vector<double>& series, double t, double x, double y, EvalMode mode);

/// k(t, x, y) = psi(y) / psi(x) u(t, x, y) with the table based at y.
KernelEstimate assemble_k(const ModelSpec& model, const CoefficientTable& table, double t, double x, double y,
                          EvalMode mode);

/// k~ = (4 pi t)^{1/2} exp((x-y)^2 / 4t) k = psi(y) / psi(x) times the series part.
KernelEstimate modified_kernel(const ModelSpec& model, const CoefficientTable& table, double t, double x, double y,
                               EvalMode mode);

/// Kernel of d/dt - d^2/dx^2 + omega^2 x^2 / 4.
KernelEstimate mehler_exact(double omega, double t, double x, double y);

/// Transition density of dX = -omega X dt + sqrt(2) dB: Gaussian in y with mean
/// x e^{-omega t} and variance (1 - e^{-2 omega t}) / omega.
KernelEstimate ou_exact(double omega, double t, double x, double y);

/// u and k from coefficient tables cached by base point. u(t, x, y) is evaluated
/// from the table based at x (u is symmetric), so loops over the second argument
/// reuse one table. All tables share one TransportContinuation. Where the Gaussian prefactor is below 1e-20 of its
/// peak, u is returned as 0 without summing the series.
class SeriesKernel {
public:
    SeriesKernel(ModelSpec model, int r_max, EvalMode mode, Interval interval, int jet_degree = 400);

    double u(double t, double x, double y) const;
    double k(double t, double x, double y) const;
    const CoefficientTable& table(double base) const;
    const ModelSpec& model() const { return model_; }

private:
    ModelSpec model_;
    int r_max_;
    EvalMode mode_;
    Interval interval_;
    int jet_degree_;
    std::shared_ptr<const TransportContinuation> continuation_;
    mutable std::mutex mu_;
    mutable std::map<double, std::shared_ptr<const CoefficientTable>> cache_;
};

struct PDEGrid {
    double lo = -12.0;
    double hi = 12.0;
    double h = 1.0 / 512.0;
    double dt = 1e-4;
    bool richardson = false;  // extrapolate in the mollifier width (2h and 4h runs)
    int smoothing_steps = 4;  // backward Euler half steps before Crank-Nicolson
};

struct PDESolution {
    double lo = 0.0;
    double h = 0.0;
    double dt = 0.0;
    double t = 0.0;
    double y = 0.0;
    double mollifier_width = 0.0;
    std::vector<double> values;  // density at lo + i h
    double mass_initial = 0.0;
    double mass_final = 0.0;
    int steps = 0;

    double x_at(size_t i) const { return lo + h * static_cast<double>(i); }
    /// Cubic interpolation of the density.
    double operator()(double x) const;
};

/// Crank-Nicolson for p_t = p_xx - (beta_psi p)_x with absorbing ends, started
/// from a Gaussian of standard deviation 2h about y, which is the free kernel at
/// t0 = 2h^2; the run covers t - t0. Throws MassLoss when more than 1e-4 of the
/// mass leaves through the boundary.
PDESolution solve_pde_forward(const ModelSpec& model, double t, double y, const PDEGrid& grid = {});

/// u(t, x, y); called with a fixed first argument inside inner loops.
using KernelFn = std::function<double(double t, double x, double y)>;

struct ConsistencyReport {
    double chapman_kolmogorov = 0.0;  // max |int k(t,x,z) k(s,z,y) dz - k(t+s,x,y)|
    double chapman_kolmogorov_relative = 0.0;
    double mass = 0.0;                // max |int k(t,x,y) dy - 1|
    double detailed_balance = 0.0;    // max |psi^2(x) k(t,x,y) - psi^2(y) k(t,y,x)|
    int quadrature_nodes = 0;
    bool quadrature_converged = false;
};

/// Residuals (i)-(iii) for a kernel given through u and the model's psi, on all
/// pairs of `points`. Integrals are Gauss-Legendre on the model's domain with node
/// doubling from 100 until the relative change is below 1e-10 (cap 1600).
ConsistencyReport consistency_suite(const ModelSpec& model, const KernelFn& u, double t, double s,
                                    const std::vector<double>& points);

struct HeatResidualReport {
    std::vector<double> times;
    std::vector<double> residuals;  // |rho(t)| at the probe point
    double observed_order = 0.0;    // least-squares slope of log|rho| against log t
    double min_step_order = 0.0;    // smallest order between consecutive halvings
};

/// Residual of the truncated expansion S = sum_{j<terms} a_j t^j, normalized by the
/// free prefactor: rho = S_t + (z/t) S_x - S_xx + W S with z = x - y. For the
/// transport recursion rho = -t^{terms-1} (a''_{terms-1} - W a_{terms-1}).
/// All derivatives come from the polynomial representation.
HeatResidualReport heat_residual_order(const CoefficientTable& table, double x, int terms,
                                       const std::vector<double>& times);

void write_kernel_csv(std::ostream& os, const std::vector<KernelEstimate>& rows);
void write_pde_csv(std::ostream& os, const PDESolution& sol, int stride = 1);

}  // namespace borelheat
