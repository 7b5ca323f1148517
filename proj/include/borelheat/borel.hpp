#pragma once

#include "borelheat/coeffs.hpp"
#include "borelheat/model.hpp"

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace borelheat {

/// f(t) ~ sum_r a_r t^r.
struct FormalSeries {
    std::vector<double> coeffs;
};

/// b_r = a_r / r!.
struct BorelSeries {
    std::vector<double> coeffs;
};

struct RationalApproximant {
    PolynomialRep numerator;    // in tau, centered at 0
    PolynomialRep denominator;  // denominator(0) = 1
    std::pair<int, int> order{0, 0};
    std::vector<std::complex<double>> poles;
    /// tau scale used to balance the linear system; poles and polynomials are in tau.
    double tau_scale = 1.0;
    /// Max relative defect of q c - p through order m + n (the Pade conditions, scaled by term size).
    double match_residual = 0.0;

    double operator()(double tau) const;
    /// Distance from [0, inf) to the nearest pole (inf without poles).
    double pole_clearance() const;
};

struct BorelSumResult {
    double value = 0.0;
    double t = 0.0;
    double quadrature_error = 0.0;
    double pole_clearance = 0.0;
    int truncation_order = 0;  // m + n
    std::pair<int, int> order{0, 0};
    std::vector<std::complex<double>> poles;
    int quadrature_nodes = 0;
    bool trusted = false;
};

BorelSeries borel_transform(const FormalSeries& s);

/// [m/n] Pade approximant of the Borel series. Throws DegenerateHankel when the
/// column-normalized denominator system has condition estimate above 1e12.
RationalApproximant pade_continue(const BorelSeries& b, int m, int n);

/// (1/t) int_0^inf g(tau) e^{-tau/t} dtau by Gauss-Laguerre in u = tau/t, doubling
/// nodes from 16 up to 512 until the relative change drops below 1e-10.
/// Throws PoleOnContour when a pole lies within 1e-8 of [0, inf).
BorelSumResult laplace_sum(const RationalApproximant& g, double t);

/// borel_transform -> pade_continue -> laplace_sum. A DegenerateHankel at (m, n)
/// is retried at (m-1, n-1) while both stay nonnegative.
BorelSumResult borel_sum(const FormalSeries& s, double t, std::pair<int, int> orders);

/// Default orders (floor(r_max/2), floor(r_max/2)) adjusted so m + n <= r_max.
std::pair<int, int> default_orders(const FormalSeries& s);

struct StabilitySweep {
    BorelSumResult best;
    std::vector<BorelSumResult> neighbours;  // successful adjacent orders
    double spread = 0.0;                     // max relative deviation of neighbours from best
    bool flagged = false;                    // spread > 1e-4
};

/// Sums at the default orders, falling back to nearby orders when the default
/// hits a degenerate system or a pole on the contour, then sweeps (m+1, n-1),
/// (m-1, n+1) and (m-1, n-1) for a stability estimate.
StabilitySweep borel_sum_auto(const FormalSeries& s, double t);

struct GrowthReport {
    double max_ratio = 0.0;  // max |g(tau)| exp(-C sqrt(tau))
    double argmax_tau = 0.0;
    int samples = 0;
    bool flagged = false;  // max_ratio > 1
};

GrowthReport growth_check(const RationalApproximant& g, const RegularityCertificate& cert, double tau_max);

}  // namespace borelheat
