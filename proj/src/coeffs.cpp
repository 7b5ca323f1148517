#include "borelheat/coeffs.hpp"

#include "borelheat/compensated.hpp"
#include "borelheat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace borelheat {

PolynomialRep::PolynomialRep(std::vector<double> coeffs, double c) : coefficients(std::move(coeffs)), center(c) {
    if (coefficients.empty()) coefficients.push_back(0.0);
}

double PolynomialRep::operator()(double x) const {
    const double z = x - center;
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
    return acc;
}

PolynomialRep PolynomialRep::derivative() const {
    if (coefficients.size() <= 1) return PolynomialRep({0.0}, center);
    std::vector<double> d(coefficients.size() - 1);
    for (size_t k = 1; k < coefficients.size(); ++k) d[k - 1] = static_cast<double>(k) * coefficients[k];
    return PolynomialRep(std::move(d), center);
}

PolynomialRep PolynomialRep::recentered(double new_center) const {
    std::vector<double> p = coefficients;
    const double delta = new_center - center;
    const size_t n = p.size();
    if (delta != 0.0)
        for (size_t i = 0; i + 1 < n; ++i)
            for (size_t j = n - 1; j-- > i;) p[j] += delta * p[j + 1];
    return PolynomialRep(std::move(p), new_center);
}

void PolynomialRep::trim() {
    while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();
}

PolynomialRep multiply(const PolynomialRep& a, const PolynomialRep& b) {
    if (a.center != b.center) throw std::invalid_argument("polynomial product needs a common center");
    const size_t na = a.coefficients.size(), nb = b.coefficients.size();
    std::vector<double> out(na + nb - 1);
    for (size_t k = 0; k < out.size(); ++k) {
        CompensatedSum s;
        const size_t lo = k >= nb - 1 ? k - (nb - 1) : 0;
        const size_t hi = std::min(k, na - 1);
        for (size_t i = lo; i <= hi; ++i) s += a.coefficients[i] * b.coefficients[k - i];
        out[k] = s.value();
    }
    return PolynomialRep(std::move(out), a.center);
}

PolynomialRep add(const PolynomialRep& a, const PolynomialRep& b, double scale_b) {
    if (a.center != b.center) throw std::invalid_argument("polynomial sum needs a common center");
    std::vector<double> out(std::max(a.coefficients.size(), b.coefficients.size()), 0.0);
    for (size_t i = 0; i < a.coefficients.size(); ++i) out[i] += a.coefficients[i];
    for (size_t i = 0; i < b.coefficients.size(); ++i) out[i] += scale_b * b.coefficients[i];
    return PolynomialRep(std::move(out), a.center);
}

namespace {

struct ChebFit {
    PolynomialRep poly;
    double error;
};

ChebFit chebyshev_fit(const ScalarField& W, Interval iv, int n) {
    const double mid = 0.5 * (iv.lo + iv.hi), half = 0.5 * (iv.hi - iv.lo);
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double x = mid + half * std::cos(M_PI * (j + 0.5) / (n + 1));
        f[j] = W(x);
        if (!std::isfinite(f[j])) throw FitDiverged("potential is not finite at a Chebyshev node");
    }
    std::vector<double> c(n + 1);
    for (int k = 0; k <= n; ++k) {
        CompensatedSum s;
        for (int j = 0; j <= n; ++j) s += f[j] * std::cos(M_PI * k * (j + 0.5) / (n + 1));
        c[k] = 2.0 * s.value() / (n + 1);
    }
    c[0] *= 0.5;
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    while (c.size() > 1 && std::abs(c.back()) <= 1e-16 * cmax) c.pop_back();

    // Monomial coefficients in u = (x - mid) / half via the three-term recurrence.
    std::vector<double> mono(c.size(), 0.0);
    std::vector<double> t_prev{1.0}, t_cur{0.0, 1.0};
    mono[0] += c[0];
    if (c.size() > 1) mono[1] += c[1];
    for (size_t k = 2; k < c.size(); ++k) {
        std::vector<double> t_next(k + 1, 0.0);
        for (size_t i = 0; i < t_cur.size(); ++i) t_next[i + 1] += 2.0 * t_cur[i];
        for (size_t i = 0; i < t_prev.size(); ++i) t_next[i] -= t_prev[i];
        for (size_t i = 0; i <= k; ++i) mono[i] += c[k] * t_next[i];
        t_prev = std::move(t_cur);
        t_cur = std::move(t_next);
    }
    double scale = 1.0;
    for (auto& m : mono) {
        m /= scale;
        scale *= half;
    }
    PolynomialRep p(std::move(mono), mid);
    p.trim();

    double err = 0.0;
    const int samples = 2001;
    for (int i = 0; i < samples; ++i) {
        const double x = iv.lo + (iv.hi - iv.lo) * i / (samples - 1);
        err = std::max(err, std::abs(W(x) - p(x)));
    }
    return {std::move(p), err};
}

}  // namespace

PotentialFit approximate_potential(const ScalarField& W, Interval interval, int degree) {
    if (degree < 2) throw std::invalid_argument("approximation degree must be at least 2");
    if (!(interval.hi > interval.lo)) throw std::invalid_argument("empty approximation interval");
    if (W.dimension() != 1) throw std::invalid_argument("potential approximation is one-dimensional");
    PotentialFit out;
    out.interval = interval;
    if (auto poly = W.as_polynomial()) {
        out.polynomial = PolynomialRep(*poly, 0.0);
        out.polynomial.trim();
        out.exact = true;
        return out;
    }
    const ChebFit coarse = chebyshev_fit(W, interval, std::max(2, degree / 2));
    ChebFit fine = chebyshev_fit(W, interval, degree);
    double scale = 0.0;
    for (int i = 0; i <= 200; ++i) scale = std::max(scale, std::abs(W(interval.lo + (interval.hi - interval.lo) * i / 200)));
    if (fine.error > 1e-10 * (1.0 + scale) && fine.error > 0.5 * coarse.error)
        throw FitDiverged("Chebyshev error does not decrease with degree (" + std::to_string(coarse.error) + " -> " +
                          std::to_string(fine.error) + "); the potential is not smooth on the interval");
    out.polynomial = std::move(fine.poly);
    out.max_error = fine.error;
    return out;
}

PolynomialRep potential_jet(const ScalarField& W, double y, int order) {
    if (!W.symbolic()) throw MissingDerivative("Taylor jets need a symbolic potential");
    if (W.dimension() != 1) throw std::invalid_argument("potential jets are one-dimensional");
    PolynomialRep p(W.expr()->taylor(y, order), y);
    for (double c : p.coefficients)
        if (!std::isfinite(c)) throw FitDiverged("potential jet is not finite at the base point");
    return p;
}

CoefficientTable expansion_coefficients(const PolynomialRep& W, double y, int r_max, Interval interval,
                                        int degree_cap, int jet_degree) {
    if (r_max < 1) throw std::invalid_argument("r_max must be at least 1");
    if (y < interval.lo || y > interval.hi) throw std::invalid_argument("base point lies outside the working interval");
    CoefficientTable table;
    table.y = y;
    table.interval = interval;
    table.potential = W.recentered(y);
    table.potential.trim();
    const int D = table.potential.degree();
    table.potential_degree = D;
    table.jet_degree = jet_degree;
    if (jet_degree >= 0 && jet_degree < 2 * (r_max - 1))
        throw std::invalid_argument("jet degree must be at least 2 (r_max - 1)");
    const long top_degree = jet_degree >= 0 ? std::min<long>(static_cast<long>(D) * r_max, jet_degree)
                                            : static_cast<long>(D) * r_max;
    if (top_degree > degree_cap)
        throw DegreeOverflow("potential degree " + std::to_string(D) + " times r_max " + std::to_string(r_max) +
                             " exceeds the degree cap " + std::to_string(degree_cap));

    table.orders.emplace_back(std::vector<double>{1.0}, y);
    for (int r = 1; r <= r_max; ++r) {
        const PolynomialRep& prev = table.orders.back();
        const PolynomialRep F = add(prev.derivative().derivative(), multiply(table.potential, prev), -1.0);
        std::vector<double> a(F.coefficients.size());
        for (size_t k = 0; k < a.size(); ++k) a[k] = F.coefficients[k] / static_cast<double>(r + k);
        if (jet_degree >= 0) a.resize(std::min<size_t>(a.size(), jet_degree - 2 * (r - 1) + 1));
        PolynomialRep next(std::move(a), y);
        next.trim();
        if (next.degree() > r * std::max(D, 0))
            throw std::logic_error("transport recursion produced an unexpected degree");
        table.orders.push_back(std::move(next));
    }
    return table;
}

namespace {

void check_in_interval(const CoefficientTable& table, double x) {
    if (x < table.interval.lo || x > table.interval.hi)
        throw std::invalid_argument("evaluation point lies outside the working interval");
}

std::vector<double> direct_series(const CoefficientTable& table, double x) {
    check_in_interval(table, x);
    std::vector<double> out;
    for (const auto& p : table.orders) out.push_back(p(x));
    return out;
}

}  // namespace

double coefficient_at(const CoefficientTable& table, int r, double x) {
    if (r < 0 || r > table.r_max())
        throw OrderOutOfRange("order " + std::to_string(r) + " outside 0.." + std::to_string(table.r_max()));
    check_in_interval(table, x);
    if (table.continuation) return table.continuation->series(table, x)[r];
    return table.orders[r](x);
}

std::vector<double> coefficient_series(const CoefficientTable& table, double x) {
    if (table.continuation) {
        check_in_interval(table, x);
        return table.continuation->series(table, x);
    }
    return direct_series(table, x);
}

TransportContinuation::TransportContinuation(ScalarField W, double step, int jet_degree)
    : W_(std::move(W)), step_(step), jet_degree_(jet_degree) {
    if (!W_.symbolic()) throw MissingDerivative("continuation needs a symbolic potential");
    if (!(step_ > 0.0)) throw std::invalid_argument("continuation step must be positive");
}

double TransportContinuation::radius(const PolynomialRep& jet) {
    const int n = jet.degree();
    double growth = 0.0;
    for (int k = std::max(1, n / 2); k <= n; ++k)
        if (jet.coefficients[k] != 0.0) growth = std::max(growth, std::pow(std::abs(jet.coefficients[k]), 1.0 / k));
    return growth > 0.0 ? 1.0 / growth : std::numeric_limits<double>::infinity();
}

const TransportContinuation::Jet& TransportContinuation::jet(long k) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = jets_.find(k);
    if (it == jets_.end()) {
        PolynomialRep p = potential_jet(W_, static_cast<double>(k) * step_, jet_degree_);
        const double r = radius(p);
        it = jets_.emplace(k, Jet{std::move(p), r}).first;
    }
    return it->second;
}

std::vector<PolynomialRep> TransportContinuation::expand(double y, double c, const std::vector<double>& values) const {
    const PolynomialRep& W = jet(std::lround(c / step_)).poly;
    const double Z = c - y;
    const int r_max = static_cast<int>(values.size()) - 1;
    if (jet_degree_ < 2 * r_max + 2) throw std::invalid_argument("continuation jet degree too small for r_max");
    std::vector<PolynomialRep> a;
    a.emplace_back(std::vector<double>(jet_degree_ + 1, 0.0), c);
    a[0].coefficients[0] = 1.0;
    for (int r = 1; r <= r_max; ++r) {
        const auto& prev = a.back().coefficients;
        const int deg = static_cast<int>(prev.size()) - 3;  // F = a'' - W a is known through w^deg
        std::vector<double> f(deg + 1);
        for (int m = 0; m <= deg; ++m) {
            CompensatedSum s;
            s += static_cast<double>((m + 2) * (m + 1)) * prev[m + 2];
            for (int i = 0; i <= m; ++i) s += -W.coefficients[i] * prev[m - i];
            f[m] = s.value();
        }
        std::vector<double> next(deg + 2);
        next[0] = values[r];
        for (int m = 0; m <= deg; ++m)
            next[m + 1] = (f[m] - static_cast<double>(m + r) * next[m]) / (Z * static_cast<double>(m + 1));
        a.emplace_back(std::move(next), c);
    }
    return a;
}

std::vector<double> TransportContinuation::series(const CoefficientTable& base, double x) const {
    const double y = base.y;
    const double reach = 0.5 * radius(base.potential);
    if (std::abs(x - y) <= reach) return direct_series(base, x);
    const double dir = x > y ? 1.0 : -1.0;

    // Hand-off center: the first lattice point (at least 2 steps out) where the
    // forward recurrence is stable, |c - y| >= radius(c); failing that, the reachable
    // point with the largest |c - y| / radius(c). Rounding grows like that ratio^(-2r).
    long k = dir > 0 ? static_cast<long>(std::ceil((y + 2.0 * step_) / step_))
                     : static_cast<long>(std::floor((y - 2.0 * step_) / step_));
    long handoff = k;
    double best = -1.0;
    for (; std::abs(static_cast<double>(k) * step_ - y) <= reach && dir * (x - static_cast<double>(k) * step_) > 0.0;
         k += static_cast<long>(dir)) {
        const double ratio = std::abs(static_cast<double>(k) * step_ - y) / jet(k).radius;
        if (ratio > best) {
            best = ratio;
            handoff = k;
        }
        if (ratio >= 1.0) break;
    }
    double c = static_cast<double>(handoff) * step_;
    if (c < base.interval.lo || c > base.interval.hi)
        throw std::invalid_argument("continuation leaves the working interval");
    std::vector<PolynomialRep> a = expand(y, c, direct_series(base, c));
    while (dir * (x - c) > step_) {
        const double next = c + dir * step_;
        std::vector<double> values;
        for (const auto& p : a) values.push_back(p(next));
        c = step_ * std::round(next / step_);
        a = expand(y, c, values);
    }
    std::vector<double> out;
    for (const auto& p : a) out.push_back(p(x));
    return out;
}

GevreyEstimate gevrey_fit(const std::vector<double>& values, std::pair<int, int> window) {
    const auto [lo, hi] = window;
    if (lo < 0 || hi - lo + 1 < 3) throw std::invalid_argument("Gevrey window needs at least three orders");
    if (hi >= static_cast<int>(values.size()))
        throw OrderOutOfRange("Gevrey window exceeds the available orders");
    double amax = 0.0;
    for (int r = lo; r <= hi; ++r) {
        if (!std::isfinite(values[r])) throw std::invalid_argument("non-finite coefficient in Gevrey window");
        amax = std::max(amax, std::abs(values[r]));
    }
    // Entries at rounding level relative to the window are treated as exact zeros.
    const double floor = 1e-13 * amax;
    std::vector<int> rs;
    std::vector<double> ls;
    for (int r = lo; r <= hi; ++r) {
        const double a = std::abs(values[r]);
        if (a > floor) {
            rs.push_back(r);
            ls.push_back(std::log(a) - std::lgamma(r + 1.0));
        }
    }
    if (rs.empty()) throw AllZero("all coefficients in the window vanish; the series terminates");

    GevreyEstimate g;
    g.fit_window = window;
    if (rs.size() < 2) {
        g.terminating = true;
        g.kappa = std::numeric_limits<double>::infinity();
        g.K = std::abs(values[rs.front()]);
        return g;
    }
    const double n = static_cast<double>(rs.size());
    double mr = 0.0, ml = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
        mr += rs[i] / n;
        ml += ls[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < rs.size(); ++i) {
        sxy += (rs[i] - mr) * (ls[i] - ml);
        sxx += (rs[i] - mr) * (rs[i] - mr);
    }
    g.slope = sxy / sxx;
    g.kappa = std::exp(-g.slope);
    const double log_kappa = -g.slope;
    double log_k = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rs.size(); ++i) log_k = std::max(log_k, ls[i] + rs[i] * log_kappa);
    g.K = std::exp(log_k);
    g.residual = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rs.size(); ++i) g.residual = std::max(g.residual, ls[i] + rs[i] * log_kappa - log_k);

    g.unbounded = g.slope > 1e-12;
    return g;
}

namespace {

nlohmann::json bound_to_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double bound_from_json(const nlohmann::json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

}  // namespace

nlohmann::json to_json(const CoefficientTable& table) {
    nlohmann::json orders = nlohmann::json::array();
    for (const auto& p : table.orders) orders.push_back(p.coefficients);
    return {{"y", table.y},
            {"interval", {bound_to_json(table.interval.lo), bound_to_json(table.interval.hi)}},
            {"r_max", table.r_max()},
            {"potential_degree", table.potential_degree},
            {"jet_degree", table.jet_degree},
            {"potential", table.potential.coefficients},
            {"orders", orders}};
}

CoefficientTable table_from_json(const nlohmann::json& j) {
    CoefficientTable t;
    try {
        t.y = j.at("y").get<double>();
        t.interval = {bound_from_json(j.at("interval").at(0), -1e300), bound_from_json(j.at("interval").at(1), 1e300)};
        t.potential = PolynomialRep(j.at("potential").get<std::vector<double>>(), t.y);
        t.potential_degree = j.at("potential_degree").get<int>();
        t.jet_degree = j.value("jet_degree", -1);
        for (const auto& o : j.at("orders")) t.orders.emplace_back(o.get<std::vector<double>>(), t.y);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed coefficient table: ") + e.what());
    }
    if (t.orders.empty()) throw ParseError("coefficient table has no orders");
    return t;
}

nlohmann::json to_json(const GevreyEstimate& g) {
    return {{"K", g.K},
            {"kappa", bound_to_json(g.kappa)},
            {"window", {g.fit_window.first, g.fit_window.second}},
            {"residual", g.residual},
            {"slope", g.slope},
            {"unbounded", g.unbounded},
            {"terminating", g.terminating}};
}

}  // namespace borelheat
