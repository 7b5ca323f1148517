#pragma once

#include "borelheat/field.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace borelheat {

/// Polynomial sum_k c_k (x - center)^k.
struct PolynomialRep {
    std::vector<double> coefficients{0.0};
    double center = 0.0;

    PolynomialRep() = default;
    PolynomialRep(std::vector<double> coeffs, double center = 0.0);

    int degree() const { return static_cast<int>(coefficients.size()) - 1; }
    double operator()(double x) const;
    PolynomialRep derivative() const;
    /// Same polynomial expanded about `new_center` (repeated synthetic division).
    PolynomialRep recentered(double new_center) const;
    /// Drops trailing coefficients that are exactly zero.
    void trim();
};

/// Product with compensated accumulation of every output coefficient. Centers must agree.
PolynomialRep multiply(const PolynomialRep& a, const PolynomialRep& b);
PolynomialRep add(const PolynomialRep& a, const PolynomialRep& b, double scale_b = 1.0);

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
};

struct PotentialFit {
    PolynomialRep polynomial;
    double max_error = 0.0;  // on a dense sample of the interval
    bool exact = false;      // W was already a polynomial
    Interval interval;
};

/// Chebyshev interpolation of W at `degree` + 1 Chebyshev points, converted to
/// the monomial basis about the interval midpoint. Polynomial fields pass through.
PotentialFit approximate_potential(const ScalarField& W, Interval interval, int degree);

/// Taylor polynomial of a symbolic W about y through z^order. Used instead of a
/// Chebyshev fit when high orders are needed: a_r depends on W^{(2r-2)}(y), which
/// an interpolant only reproduces to a few digits.
PolynomialRep potential_jet(const ScalarField& W, double y, int order);

class TransportContinuation;

struct CoefficientTable {
    double y = 0.0;
    Interval interval;
    PolynomialRep potential;  // centered at y
    int potential_degree = 0;
    /// -1 when W is an exact polynomial. Otherwise W is a Taylor jet of this degree
    /// and a_r is kept through z^(jet_degree - 2(r-1)), the coefficients the jet determines.
    int jet_degree = -1;
    std::vector<PolynomialRep> orders;  // a_r(., y), centered at y
    /// Set for jet tables by table_for_potential; evaluation far from y then goes
    /// through it instead of the truncated Taylor polynomials. Not serialized.
    std::shared_ptr<const TransportContinuation> continuation;

    int r_max() const { return static_cast<int>(orders.size()) - 1; }
};

inline constexpr int kDefaultDegreeCap = 512;

/// Transport recursion: a_0 = 1 and, with z = x - y,
///   a_r(x) = int_0^1 s^{r-1} [a_{r-1}'' - W a_{r-1}](y + s z) ds,
/// done coefficient-wise (the z^k term picks up 1/(r + k)).
CoefficientTable expansion_coefficients(const PolynomialRep& W, double y, int r_max,
                                        Interval interval = {-1e300, 1e300}, int degree_cap = kDefaultDegreeCap,
                                        int jet_degree = -1);

double coefficient_at(const CoefficientTable& table, int r, double x);

/// a_0(x, y) .. a_{r_max}(x, y), continued analytically when the table carries a continuation.
std::vector<double> coefficient_series(const CoefficientTable& table, double x);

/// Analytic continuation of a jet-based table along the segment from its base y
/// to a far point x. The Taylor series of a non-polynomial W has a finite radius
/// (poles of W off the real axis), and a_r's Taylor coefficients grow like
/// k^(2r) / radius^k, so the base table is only used within half its estimated radius. Further out, the coefficients are re-expanded at lattice
/// centers c = k*step from the ray form of the transport equation,
///   (c - y + w) a_r'(w) + r a_r(w) = a_{r-1}'' - W a_{r-1},
/// stepping outward and carrying the values a_r(c). This forward recurrence is
/// stable once |c - y| exceeds the local radius of W, so the hand-off from the
/// base table is placed at the first center where that holds.
class TransportContinuation {
public:
    TransportContinuation(ScalarField W, double step = 0.125, int jet_degree = 80);

    /// a_0(x, y) .. a_{r_max}(x, y) for the table's base y.
    std::vector<double> series(const CoefficientTable& base, double x) const;

    /// Root-test estimate of the convergence radius of a Taylor jet (inf for polynomials).
    static double radius(const PolynomialRep& jet);

private:
    struct Jet {
        PolynomialRep poly;
        double radius;
    };
    const Jet& jet(long k) const;
    /// Taylor polynomials of a_0..a_r_max at center c from their values there.
    std::vector<PolynomialRep> expand(double y, double c, const std::vector<double>& values) const;

    ScalarField W_;
    double step_;
    int jet_degree_;
    mutable std::mutex mu_;
    mutable std::map<long, Jet> jets_;
};

struct GevreyEstimate {
    double K = 0.0;
    double kappa = 0.0;
    std::pair<int, int> fit_window{0, 0};
    double residual = 0.0;  // max_r log(|a_r| kappa^r / (K r!)), <= 0 by construction
    double slope = 0.0;     // fitted slope of log(|a_r| / r!) against r
    /// Fitted slope is positive (kappa < 1): the coefficients outgrow r! on the window.
    /// Flagged, not fatal.
    bool unbounded = false;
    /// Fewer than two nonzero entries in the window; kappa is reported as +inf.
    bool terminating = false;
};

GevreyEstimate gevrey_fit(const std::vector<double>& values, std::pair<int, int> window);

nlohmann::json to_json(const CoefficientTable& table);
CoefficientTable table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GevreyEstimate& g);

}  // namespace borelheat
