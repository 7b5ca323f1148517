#pragma once

#include <functional>
#include <vector>

namespace borelheat::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on the three-term recurrence).
const Rule& gauss_legendre(int n);

/// n-point Gauss-Laguerre rule for weight e^{-u} on [0, inf) (Golub-Welsch).
const Rule& gauss_laguerre(int n);

/// Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes on [a, b].
double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                                int order = 10);

}  // namespace borelheat::quad
