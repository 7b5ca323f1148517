#include "borelheat/field.hpp"

#include "borelheat/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace borelheat {

Box Box::cube(int dimension, double half_width) {
    return Box{std::vector<double>(dimension, -half_width), std::vector<double>(dimension, half_width)};
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != lo.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

ScalarField::ScalarField(Expr expr, int dimension, Box domain, int derivative_order)
    : expr_(std::move(expr)), dimension_(dimension), domain_(std::move(domain)),
      derivative_order_(derivative_order) {
    if (dimension < 1) throw std::invalid_argument("field dimension must be positive");
    if (expr_->max_axis() >= dimension)
        throw std::invalid_argument("expression references an axis beyond the field dimension");
}

ScalarField::ScalarField(Function f, int dimension, Box domain, double fd_scale, int derivative_order)
    : fn_(std::move(f)), dimension_(dimension), domain_(std::move(domain)), derivative_order_(derivative_order),
      fd_scale_(fd_scale) {
    if (dimension < 1) throw std::invalid_argument("field dimension must be positive");
}

double ScalarField::operator()(std::span<const double> x) const {
    if (expr_) return (*expr_)(x);
    if (!fn_) throw std::logic_error("empty scalar field");
    return fn_(x);
}

double ScalarField::partial(int axis, std::span<const double> x) const {
    if (expr_) return expr_->diff(axis)(x);
    if (derivative_order_ < 1) throw MissingDerivative("field declares no derivatives");
    const double h = 1e-5 * fd_scale_;
    std::vector<double> p(x.begin(), x.end());
    p[axis] = x[axis] + h;
    const double fp = fn_(p);
    p[axis] = x[axis] - h;
    const double fm = fn_(p);
    return (fp - fm) / (2.0 * h);
}

double ScalarField::partial2(int axis, std::span<const double> x) const {
    if (expr_) return expr_->diff(axis, 2)(x);
    if (derivative_order_ < 2) throw MissingDerivative("field declares fewer than two derivatives");
    // Second differences lose half the digits at 1e-5; use a wider step here.
    const double h = 1e-3 * fd_scale_;
    std::vector<double> p(x.begin(), x.end());
    p[axis] = x[axis] + h;
    const double fp = fn_(p);
    p[axis] = x[axis] - h;
    const double fm = fn_(p);
    return (fp - 2.0 * fn_(x) + fm) / (h * h);
}

double ScalarField::laplacian(std::span<const double> x) const {
    double s = 0.0;
    for (int i = 0; i < dimension_; ++i) s += partial2(i, x);
    return s;
}

ScalarField ScalarField::derivative(int axis, int order) const {
    if (expr_) return ScalarField(expr_->diff(axis, order), dimension_, domain_, derivative_order_);
    if (order > derivative_order_)
        throw MissingDerivative("finite-difference field supports derivatives up to order " +
                                std::to_string(derivative_order_));
    const ScalarField self = *this;
    if (order == 1)
        return ScalarField([self, axis](std::span<const double> x) { return self.partial(axis, x); },
                           dimension_, domain_, fd_scale_, derivative_order_ - 1);
    if (order == 2)
        return ScalarField([self, axis](std::span<const double> x) { return self.partial2(axis, x); },
                           dimension_, domain_, fd_scale_, derivative_order_ - 2);
    if (order == 0) return *this;
    throw MissingDerivative("finite-difference fields provide at most second derivatives");
}

std::optional<std::vector<double>> ScalarField::as_polynomial() const {
    if (!expr_ || dimension_ != 1) return std::nullopt;
    return expr_->as_polynomial();
}

std::vector<double> DriftField::operator()(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c(x));
    return out;
}

double DriftField::divergence(std::span<const double> x) const {
    double s = 0.0;
    for (size_t i = 0; i < components.size(); ++i) s += components[i].partial(static_cast<int>(i), x);
    return s;
}

double DriftField::curl_residual(std::span<const std::vector<double>> points) const {
    double worst = 0.0;
    const int d = dimension();
    for (const auto& p : points)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                worst = std::max(worst, std::abs(components[j].partial(i, p) - components[i].partial(j, p)));
    return worst;
}

std::vector<std::vector<double>> sample_grid(const Box& box, int per_axis, double fraction) {
    const int d = box.dimension();
    std::vector<std::vector<double>> axes(d);
    for (int i = 0; i < d; ++i) {
        const double mid = 0.5 * (box.lo[i] + box.hi[i]);
        const double half = 0.5 * (box.hi[i] - box.lo[i]) * fraction;
        for (int k = 0; k < per_axis; ++k)
            axes[i].push_back(per_axis == 1 ? mid : mid - half + 2.0 * half * k / (per_axis - 1));
    }
    std::vector<std::vector<double>> points{{}};
    for (int i = 0; i < d; ++i) {
        std::vector<std::vector<double>> next;
        for (const auto& p : points)
            for (double v : axes[i]) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

}  // namespace borelheat
