#include "borelheat/lamperti.hpp"

#include "borelheat/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace borelheat {

namespace {

double reciprocal_integral(const ScalarField& sigma, double a, double b) {
    auto f = [&](double y) { return 1.0 / sigma(y); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

double checked_sigma(const DiffusionCoefficient& dc, double s) {
    const double v = dc.sigma(s);
    if (!(v > 0.0)) throw NonPositiveSigma("sigma(" + std::to_string(s) + ") = " + std::to_string(v));
    return v;
}

}  // namespace

LampertiMap build_map(const DiffusionCoefficient& dc, Interval interval, int panels) {
    if (!(interval.hi > interval.lo) || panels < 1) throw std::invalid_argument("bad Lamperti interval");
    if (dc.s0 < interval.lo || dc.s0 > interval.hi) throw std::invalid_argument("anchor s0 outside the interval");
    const int samples = 2000;
    for (int i = 0; i <= samples; ++i)
        checked_sigma(dc, interval.lo + (interval.hi - interval.lo) * i / samples);

    LampertiMap map;
    map.dc_ = dc;
    map.breaks_.resize(panels + 1);
    for (int k = 0; k <= panels; ++k)
        map.breaks_[k] = interval.lo + (interval.hi - interval.lo) * k / panels;
    map.breaks_.back() = interval.hi;
    map.cumulative_.assign(panels + 1, 0.0);
    for (int k = 1; k <= panels; ++k)
        map.cumulative_[k] =
            map.cumulative_[k - 1] + reciprocal_integral(dc.sigma, map.breaks_[k - 1], map.breaks_[k]);
    map.offset_ = 0.0;
    map.offset_ = map.gamma(dc.s0);
    return map;
}

double LampertiMap::integral_from_break(size_t k, double s) const {
    return cumulative_[k] + reciprocal_integral(dc_.sigma, breaks_[k], s);
}

double LampertiMap::gamma(double s) const {
    if (s < breaks_.front() || s > breaks_.back())
        throw OutOfImage("s = " + std::to_string(s) + " is outside the Lamperti working interval");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
    size_t k = static_cast<size_t>(std::max<std::ptrdiff_t>(0, it - breaks_.begin() - 1));
    if (k + 1 >= breaks_.size()) k = breaks_.size() - 2;
    return integral_from_break(k, s) - offset_;
}

double LampertiMap::inverse(double x) const {
    const double target = x + offset_;
    if (target < cumulative_.front() || target > cumulative_.back())
        throw OutOfImage("x = " + std::to_string(x) + " is outside the image of the Lamperti map");
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    size_t k = static_cast<size_t>(std::max<std::ptrdiff_t>(0, it - cumulative_.begin() - 1));
    if (k + 1 >= breaks_.size()) k = breaks_.size() - 2;

    double lo = breaks_[k], hi = breaks_[k + 1];
    const double span = cumulative_[k + 1] - cumulative_[k];
    double s = span > 0.0 ? lo + (hi - lo) * (target - cumulative_[k]) / span : lo;
    for (int iter = 0; iter < 50; ++iter) {
        const double f = integral_from_break(k, s) - target;
        if (f > 0.0) hi = s;
        else lo = s;
        double next = s - f * dc_.sigma(s);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-15 * (1.0 + std::abs(s))) return next;
        s = next;
    }
    // Newton stalled: finish by bisection.
    while (hi - lo > 1e-15 * (1.0 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (integral_from_break(k, mid) > target) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> LampertiMap::sample(int n) const {
    std::vector<std::pair<double, double>> out;
    const double a = breaks_.front(), b = breaks_.back();
    for (int i = 0; i < n; ++i) {
        const double s = n > 1 ? a + (b - a) * i / (n - 1) : a;
        out.emplace_back(s, gamma(s));
    }
    return out;
}

double transformed_drift(const ScalarField& beta, const DiffusionCoefficient& dc, double s) {
    const double sig = checked_sigma(dc, s);
    return beta(s) / sig - 0.5 * dc.sigma.partial(0, std::span<const double>(&s, 1));
}

double pullback_density(const TransitionKernel& p_tilde, const LampertiMap& map, double t, double s,
                        double s_tilde) {
    const double x = map.gamma(s);
    const double x_tilde = map.gamma(s_tilde);
    return p_tilde(t, x, x_tilde) / checked_sigma(map.coefficient(), s_tilde);
}

bool HypothesisReport::all_pass() const {
    return one_over_sigma_not_L1_at_infinity.pass && linear_bound_sigma.pass && linear_bound_beta.pass &&
           linear_bound_transformed_drift.pass && bounded_combination.pass;
}

namespace {

// Maximum of f over the log-spaced points of decade `k` on both sides.
double decade_max(const std::function<double(double)>& f, const HypothesisGrid& g, int k) {
    double m = 0.0;
    for (int j = 0; j <= g.per_decade; ++j) {
        const double r = g.inner * std::pow(10.0, k + static_cast<double>(j) / g.per_decade);
        for (double x : {r, -r}) {
            const double v = std::abs(f(x));
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            m = std::max(m, v);
        }
    }
    return m;
}

HypothesisFlag stability_flag(const std::function<double(double)>& f, const HypothesisGrid& g) {
    HypothesisFlag flag;
    for (int k = 0; k < g.decades; ++k) flag.max_value = std::max(flag.max_value, decade_max(f, g, k));
    flag.outer_value = decade_max(f, g, g.decades - 1);
    flag.inner_value = decade_max(f, g, g.decades - 2);
    flag.pass = std::isfinite(flag.max_value) && flag.outer_value <= 2.0 * flag.inner_value + 1e-12;
    return flag;
}

}  // namespace

HypothesisReport check_hypotheses(const ScalarField& beta, const DiffusionCoefficient& dc, const HypothesisGrid& g) {
    if (g.decades < 2 || g.per_decade < 1 || !(g.inner > 0.0)) throw std::invalid_argument("bad hypothesis grid");
    HypothesisReport rep;

    auto d1 = [](const ScalarField& f, double x) { return f.partial(0, std::span<const double>(&x, 1)); };
    auto d2 = [](const ScalarField& f, double x) { return f.partial2(0, std::span<const double>(&x, 1)); };

    {
        HypothesisFlag& flag = rep.one_over_sigma_not_L1_at_infinity;
        double worst = std::numeric_limits<double>::infinity();
        for (double side : {1.0, -1.0}) {
            auto decade = [&](int k) {
                const double a = side * g.inner * std::pow(10.0, k), b = side * g.inner * std::pow(10.0, k + 1);
                return std::abs(reciprocal_integral(dc.sigma, std::min(a, b), std::max(a, b)));
            };
            const double outer = decade(g.decades - 1), inner = decade(g.decades - 2);
            const double ratio = inner > 0.0 ? outer / inner : 0.0;
            if (ratio < worst) {
                worst = ratio;
                flag.outer_value = outer;
                flag.inner_value = inner;
            }
        }
        flag.max_value = worst;
        flag.pass = std::isfinite(worst) && worst >= 0.9;
    }

    auto per_linear = [](double fx, double x) { return fx / (1.0 + std::abs(x)); };
    rep.linear_bound_sigma = stability_flag([&](double x) { return per_linear(dc.sigma(x), x); }, g);
    rep.linear_bound_beta = stability_flag([&](double x) { return per_linear(beta(x), x); }, g);
    rep.linear_bound_transformed_drift = stability_flag(
        [&](double x) {
            const double s = dc.sigma(x);
            if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
            return per_linear(beta(x) / s - 0.5 * d1(dc.sigma, x), x);
        },
        g);
    rep.bounded_combination = stability_flag(
        [&](double x) {
            const double s = dc.sigma(x);
            if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
            return d1(beta, x) - beta(x) * d1(dc.sigma, x) / s - 0.5 * s * d2(dc.sigma, x);
        },
        g);
    return rep;
}

nlohmann::json to_json(const HypothesisReport& report) {
    auto flag = [](const HypothesisFlag& f) {
        return nlohmann::json{{"pass", f.pass},
                              {"max_value", f.max_value},
                              {"outer_decade", f.outer_value},
                              {"inner_decade", f.inner_value}};
    };
    return nlohmann::json{{"one_over_sigma_not_L1_at_infinity", flag(report.one_over_sigma_not_L1_at_infinity)},
                          {"linear_bound_sigma", flag(report.linear_bound_sigma)},
                          {"linear_bound_beta", flag(report.linear_bound_beta)},
                          {"linear_bound_transformed_drift", flag(report.linear_bound_transformed_drift)},
                          {"bounded_combination", flag(report.bounded_combination)},
                          {"all_pass", report.all_pass()}};
}

}  // namespace borelheat
