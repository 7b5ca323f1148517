#include "borelheat/borel.hpp"

#include "borelheat/compensated.hpp"
#include "borelheat/errors.hpp"
#include "borelheat/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace borelheat {

namespace {

constexpr double kHankelConditionLimit = 1e12;
constexpr double kClearanceLimit = 1e-8;

double clearance_of(std::complex<double> p) {
    return p.real() >= 0.0 ? std::abs(p.imag()) : std::abs(p);
}

// b_r ~ rho^r on the nonzero tail; returns 1/rho clamped to a sane range.
double balancing_scale(const std::vector<double>& b) {
    std::vector<double> rs, ls;
    for (size_t r = 1; r < b.size(); ++r)
        if (b[r] != 0.0 && std::isfinite(b[r])) {
            rs.push_back(static_cast<double>(r));
            ls.push_back(std::log(std::abs(b[r])));
        }
    if (rs.size() < 2) return 1.0;
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
    return std::clamp(std::exp(-sxy / sxx), 1e-3, 1e3);
}

std::vector<std::complex<double>> polynomial_roots(std::vector<double> q) {
    double qmax = 0.0;
    for (double v : q) qmax = std::max(qmax, std::abs(v));
    while (q.size() > 1 && std::abs(q.back()) <= 1e-14 * qmax) q.pop_back();
    const int n = static_cast<int>(q.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -q[i] / q[n];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    std::vector<std::complex<double>> roots;
    for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
    std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
    return roots;
}

}  // namespace

double RationalApproximant::operator()(double tau) const { return numerator(tau) / denominator(tau); }

double RationalApproximant::pole_clearance() const {
    double c = std::numeric_limits<double>::infinity();
    for (auto p : poles) c = std::min(c, clearance_of(p));
    return c;
}

BorelSeries borel_transform(const FormalSeries& s) {
    BorelSeries b;
    b.coeffs.resize(s.coeffs.size(), 0.0);
    int last = -1;
    for (size_t r = 0; r < s.coeffs.size(); ++r) {
        const double a = s.coeffs[r];
        if (a == 0.0) continue;
        double v;
        size_t from;
        if (last < 0) {
            v = a;
            from = 1;
        } else {
            v = b.coeffs[last] * (a / s.coeffs[last]);
            from = static_cast<size_t>(last) + 1;
        }
        for (size_t k = from; k <= r; ++k) v /= static_cast<double>(k);
        b.coeffs[r] = v;
        last = static_cast<int>(r);
    }
    return b;
}

RationalApproximant pade_continue(const BorelSeries& b, int m, int n) {
    if (m < 0 || n < 0) throw OrderOutOfRange("Pade orders must be nonnegative");
    if (static_cast<size_t>(m + n + 1) > b.coeffs.size())
        throw OrderOutOfRange("Pade order [" + std::to_string(m) + "/" + std::to_string(n) + "] needs " +
                              std::to_string(m + n + 1) + " coefficients, have " + std::to_string(b.coeffs.size()));
    const double lambda = balancing_scale(b.coeffs);
    std::vector<double> c(m + n + 1);
    double scale = 1.0;
    for (int r = 0; r <= m + n; ++r) {
        c[r] = b.coeffs[r] * scale;
        scale *= lambda;
    }
    auto coef = [&](int k) { return k < 0 ? 0.0 : c[k]; };

    std::vector<double> q(n + 1, 0.0);
    q[0] = 1.0;
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    bool tail_vanishes = true;
    for (int k = 1; k <= n; ++k) tail_vanishes = tail_vanishes && std::abs(c[m + k]) <= 1e-15 * cmax;
    if (n > 0 && !tail_vanishes) {
        // sum_{j=1..n} q_j c_{m+k-j} = -c_{m+k}, k = 1..n.
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd rhs(n);
        for (int k = 1; k <= n; ++k) {
            rhs(k - 1) = -c[m + k];
            for (int j = 1; j <= n; ++j) A(k - 1, j - 1) = coef(m + k - j);
        }
        Eigen::VectorXd colscale(n);
        for (int j = 0; j < n; ++j) {
            const double norm = A.col(j).norm();
            colscale(j) = norm > 0.0 ? norm : 1.0;
            A.col(j) /= colscale(j);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        const auto R = qr.matrixR();
        const double r0 = std::abs(R(0, 0)), rn = std::abs(R(n - 1, n - 1));
        if (!(rn > 0.0) || r0 / rn > kHankelConditionLimit)
            throw DegenerateHankel("Pade [" + std::to_string(m) + "/" + std::to_string(n) +
                                   "] denominator system has condition estimate " +
                                   (rn > 0.0 ? std::to_string(r0 / rn) : std::string("inf")));
        Eigen::VectorXd sol = qr.solve(rhs);
        // Refinement with extended-precision residuals; near the condition limit a
        // single solve leaves the Pade equations satisfied only to cond * eps.
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd res(n);
            for (int i = 0; i < n; ++i) {
                long double acc = rhs(i);
                for (int j = 0; j < n; ++j) acc -= static_cast<long double>(A(i, j)) * sol(j);
                res(i) = static_cast<double>(acc);
            }
            sol += qr.solve(res);
        }
        for (int j = 1; j <= n; ++j) q[j] = sol(j - 1) / colscale(j - 1);
    }
    std::vector<double> p(m + 1, 0.0);
    for (int i = 0; i <= m; ++i) {
        CompensatedSum s;
        for (int j = 0; j <= std::min(i, n); ++j) s += q[j] * c[i - j];
        p[i] = s.value();
    }

    RationalApproximant g;
    g.order = {m, n};
    g.tau_scale = lambda;

    // Defect of q c - p through order m + n, relative to the size of the terms. The
    // recursive re-expansion of p / q is equivalent but amplifies rounding by
    // |pole|^-k when a pole sits near the origin.
    for (int k = 0; k <= m + n; ++k) {
        CompensatedSum s;
        double size = 0.0;
        for (int j = 0; j <= std::min(k, n); ++j) {
            s += q[j] * c[k - j];
            size += std::abs(q[j] * c[k - j]);
        }
        if (k <= m) {
            s += -p[k];
            size += std::abs(p[k]);
        }
        if (size > 0.0) g.match_residual = std::max(g.match_residual, std::abs(s.value()) / size);
    }

    for (auto& root : polynomial_roots(q)) g.poles.push_back(root * lambda);
    double inv = 1.0;
    for (int i = 0; i <= m; ++i, inv /= lambda) p[i] *= inv;
    inv = 1.0;
    for (int j = 0; j <= n; ++j, inv /= lambda) q[j] *= inv;
    g.numerator = PolynomialRep(std::move(p), 0.0);
    g.denominator = PolynomialRep(std::move(q), 0.0);
    return g;
}

BorelSumResult laplace_sum(const RationalApproximant& g, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("Laplace sum needs t > 0");
    BorelSumResult res;
    res.t = t;
    res.order = g.order;
    res.truncation_order = g.order.first + g.order.second;
    res.poles = g.poles;
    res.pole_clearance = g.pole_clearance();
    if (res.pole_clearance <= kClearanceLimit)
        throw PoleOnContour("Pade [" + std::to_string(g.order.first) + "/" + std::to_string(g.order.second) +
                            "] has a pole within 1e-8 of the positive real axis");
    auto integrate = [&](int nodes) {
        const quad::Rule& rule = quad::gauss_laguerre(nodes);
        CompensatedSum s;
        for (int k = 0; k < nodes; ++k) s += rule.weights[k] * g(t * rule.nodes[k]);
        return s.value();
    };
    int nodes = 16;
    double prev = integrate(nodes);
    double change = std::numeric_limits<double>::infinity();
    while (nodes < 512) {
        nodes *= 2;
        const double cur = integrate(nodes);
        change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
        prev = cur;
        if (change < 1e-10) break;
    }
    res.value = prev;
    res.quadrature_error = change;
    res.quadrature_nodes = nodes;
    res.trusted = std::isfinite(res.value) && change < 1e-10;
    return res;
}

BorelSumResult borel_sum(const FormalSeries& s, double t, std::pair<int, int> orders) {
    const BorelSeries b = borel_transform(s);
    auto [m, n] = orders;
    for (;;) {
        try {
            return laplace_sum(pade_continue(b, m, n), t);
        } catch (const DegenerateHankel&) {
            if (m == 0 || n == 0) throw;
            --m;
            --n;
        }
    }
}

std::pair<int, int> default_orders(const FormalSeries& s) {
    if (s.coeffs.empty()) throw OrderOutOfRange("empty series");
    const int r_max = static_cast<int>(s.coeffs.size()) - 1;
    return {r_max / 2, r_max / 2};
}

StabilitySweep borel_sum_auto(const FormalSeries& s, double t) {
    const int r_max = static_cast<int>(s.coeffs.size()) - 1;
    auto [m0, n0] = default_orders(s);
    if (m0 + n0 > r_max) --m0;
    const std::vector<std::pair<int, int>> fallbacks = {
        {m0, n0}, {m0 - 1, n0 - 1}, {m0 + 1, n0 - 1}, {m0 - 1, n0 + 1}, {m0 + 2, n0 - 2}, {m0 - 2, n0 + 2},
        {m0 - 2, n0 - 2}, {m0 + 3, n0 - 3}, {m0 - 3, n0 - 3}, {r_max, 0}};
    auto valid = [&](std::pair<int, int> o) { return o.first >= 0 && o.second >= 0 && o.first + o.second <= r_max; };

    StabilitySweep sweep;
    std::optional<std::pair<int, int>> chosen;
    std::string last_error;
    for (const auto& o : fallbacks) {
        if (!valid(o)) continue;
        try {
            BorelSumResult r = borel_sum(s, t, o);
            if (!r.trusted && o != fallbacks.back()) continue;
            sweep.best = r;
            chosen = o;
            break;
        } catch (const DegenerateHankel& e) {
            last_error = e.what();
        } catch (const PoleOnContour& e) {
            last_error = e.what();
        }
    }
    if (!chosen) throw PoleOnContour("no Pade order near the default gave a usable Borel sum: " + last_error);

    const auto [m, n] = sweep.best.order;
    for (const auto& o : std::vector<std::pair<int, int>>{{m + 1, n - 1}, {m - 1, n + 1}, {m - 1, n - 1}}) {
        if (!valid(o)) continue;
        try {
            BorelSumResult r = laplace_sum(pade_continue(borel_transform(s), o.first, o.second), t);
            sweep.spread = std::max(sweep.spread, std::abs(r.value - sweep.best.value) /
                                                      std::max(std::abs(sweep.best.value), 1e-300));
            sweep.neighbours.push_back(std::move(r));
        } catch (const Error&) {
        }
    }
    sweep.flagged = sweep.spread > 1e-4;
    return sweep;
}

GrowthReport growth_check(const RationalApproximant& g, const RegularityCertificate& cert, double tau_max) {
    if (!(tau_max > 0.0)) throw std::invalid_argument("growth check needs tau_max > 0");
    GrowthReport rep;
    auto probe = [&](double tau) {
        const double ratio = std::abs(g(tau)) * std::exp(-cert.C * std::sqrt(tau));
        if (ratio > rep.max_ratio || rep.samples == 0) {
            rep.max_ratio = ratio;
            rep.argmax_tau = tau;
        }
        ++rep.samples;
    };
    probe(0.0);
    const int n = 256;
    for (int i = 0; i < n; ++i) probe(tau_max * std::pow(10.0, -6.0 + 6.0 * i / (n - 1)));
    rep.flagged = rep.max_ratio > 1.0;
    return rep;
}

}  // namespace borelheat
