#pragma once

#include "borelheat/expr.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace borelheat {

/// Axis-aligned box [lo_i, hi_i]^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box cube(int dimension, double half_width);
    int dimension() const { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> x) const;
};

/// Scalar field on R^d with derivatives.
///
/// Symbolic fields differentiate exactly. Fields wrapping a plain callable fall
/// back to central differences with step 1e-5 * scale.
class ScalarField {
public:
    using Function = std::function<double(std::span<const double>)>;

    ScalarField() = default;
    ScalarField(Expr expr, int dimension, Box domain, int derivative_order = 4);
    ScalarField(Function f, int dimension, Box domain, double fd_scale = 1.0, int derivative_order = 2);

    int dimension() const { return dimension_; }
    const Box& domain() const { return domain_; }
    int derivative_order() const { return derivative_order_; }
    bool symbolic() const { return expr_.has_value(); }
    const std::optional<Expr>& expr() const { return expr_; }

    double operator()(std::span<const double> x) const;
    double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

    double partial(int axis, std::span<const double> x) const;
    double partial2(int axis, std::span<const double> x) const;
    double laplacian(std::span<const double> x) const;

    /// Field of the `order`-th derivative along `axis`.
    ScalarField derivative(int axis, int order = 1) const;

    /// Ascending monomial coefficients when the field is an exact polynomial in 1-D.
    std::optional<std::vector<double>> as_polynomial() const;

private:
    std::optional<Expr> expr_;
    Function fn_;
    int dimension_ = 1;
    Box domain_;
    int derivative_order_ = 4;
    double fd_scale_ = 1.0;
};

/// Vector field with one component per axis.
struct DriftField {
    std::vector<ScalarField> components;
    bool gradient_flag = false;

    int dimension() const { return static_cast<int>(components.size()); }
    std::vector<double> operator()(std::span<const double> x) const;
    double divergence(std::span<const double> x) const;
    /// Max |d_i b_j - d_j b_i| over the sample points.
    double curl_residual(std::span<const std::vector<double>> points) const;
};

/// Regular sample grid of `per_axis` points per axis inside `box`, shrunk by `fraction`.
std::vector<std::vector<double>> sample_grid(const Box& box, int per_axis, double fraction = 1.0);

}  // namespace borelheat
