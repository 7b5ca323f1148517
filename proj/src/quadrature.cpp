#include "borelheat/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace borelheat::quad {

namespace {

Rule build_legendre(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        dp = n * (z * p1 - p2) / (z * z - 1.0);
        r.nodes[i] = -z;
        r.nodes[n - 1 - i] = z;
        r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

Rule build_laguerre(int n) {
    // Jacobi matrix of the monic Laguerre recurrence: diag 2k+1, off-diagonal k.
    Eigen::VectorXd diag(n), sub(n > 1 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) sub(k - 1) = k;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("Gauss-Laguerre eigen solve failed");
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        r.weights[k] = v0 * v0;
    }
    return r;
}

template <class Builder>
const Rule& cached(std::map<int, Rule>& cache, std::mutex& mu, int n, Builder build) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, build_legendre);
}

const Rule& gauss_laguerre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, build_laguerre);
}

Rule gauss_legendre(int n, double a, double b) {
    const Rule& base = gauss_legendre(n);
    Rule r;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < n; ++k) {
        r.nodes.push_back(mid + half * base.nodes[k]);
        r.weights.push_back(half * base.weights[k]);
    }
    return r;
}

double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                                int order) {
    const Rule& base = gauss_legendre(order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        double s = 0.0;
        for (int k = 0; k < order; ++k) s += base.weights[k] * f(mid + 0.5 * width * base.nodes[k]);
        total += 0.5 * width * s;
    }
    return total;
}

}  // namespace borelheat::quad
