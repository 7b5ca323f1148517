#pragma once

#include "borelheat/coeffs.hpp"
#include "borelheat/field.hpp"

#include <json.hpp>

#include <functional>
#include <utility>
#include <vector>

namespace borelheat {

struct DiffusionCoefficient {
    ScalarField sigma;
    double s0 = 0.0;  // anchor: gamma(s0) = 0
};

/// gamma(s) = int_{s0}^s dy / sigma(y) on a working interval, with its inverse.
/// Immutable once built.
class LampertiMap {
public:
    double gamma(double s) const;
    /// Newton with derivative 1/sigma, falling back to bisection inside the bracketing panel.
    double inverse(double x) const;
    double sigma(double s) const { return dc_.sigma(s); }

    const DiffusionCoefficient& coefficient() const { return dc_; }
    Interval s_interval() const { return {breaks_.front(), breaks_.back()}; }
    Interval x_interval() const { return {cumulative_.front() - offset_, cumulative_.back() - offset_}; }
    /// (s, gamma(s)) on n equally spaced points of the working interval.
    std::vector<std::pair<double, double>> sample(int n) const;

private:
    friend LampertiMap build_map(const DiffusionCoefficient& dc, Interval interval, int panels);
    double integral_from_break(size_t k, double s) const;

    DiffusionCoefficient dc_;
    std::vector<double> breaks_;
    std::vector<double> cumulative_;  // int_{breaks_[0]}^{breaks_[k]} 1/sigma
    double offset_ = 0.0;             // same integral up to s0
};

/// Throws NonPositiveSigma if sigma <= 0 anywhere on a dense sample of the interval,
/// and std::invalid_argument if s0 lies outside it.
LampertiMap build_map(const DiffusionCoefficient& dc, Interval interval, int panels = 64);

/// beta(s) / sigma(s) - sigma'(s) / 2, the unit-noise drift at x = gamma(s).
double transformed_drift(const ScalarField& beta, const DiffusionCoefficient& dc, double s);

/// Kernel p(t, x, x~) of the unit-noise process in the gamma coordinates.
using TransitionKernel = std::function<double(double t, double x, double x_tilde)>;

/// Density of the original process: p(t, s, s~) = p_tilde(t, gamma(s), gamma(s~)) / sigma(s~).
/// Throws OutOfImage when s or s~ is outside the map's working interval.
double pullback_density(const TransitionKernel& p_tilde, const LampertiMap& map, double t, double s,
                        double s_tilde);

struct HypothesisGrid {
    double inner = 1.0;    // |x| where the log-spaced grid starts
    int decades = 6;
    int per_decade = 40;
};

struct HypothesisFlag {
    bool pass = false;
    double max_value = 0.0;    // sup over the whole grid
    double outer_value = 0.0;  // outermost decade
    double inner_value = 0.0;  // decade before it
};

/// Sampled evidence for the conditions of the transformation theorem. Advisory only.
struct HypothesisReport {
    /// Values are the ratio of the last two decade integrals of 1/sigma (worst side);
    /// passes when that ratio stays >= 0.9, i.e. the tail does not decay like an L1 tail.
    HypothesisFlag one_over_sigma_not_L1_at_infinity;
    /// sup |f| / (1 + |x|) over each decade; passes when finite and not growing
    /// more than 2x from the second-to-last to the last decade.
    HypothesisFlag linear_bound_sigma;
    HypothesisFlag linear_bound_beta;
    HypothesisFlag linear_bound_transformed_drift;
    /// sup |beta' - beta sigma'/sigma - sigma sigma''/2|, same stability rule.
    HypothesisFlag bounded_combination;

    bool all_pass() const;
};

HypothesisReport check_hypotheses(const ScalarField& beta, const DiffusionCoefficient& dc,
                                  const HypothesisGrid& grid = {});

nlohmann::json to_json(const HypothesisReport& report);

}  // namespace borelheat
