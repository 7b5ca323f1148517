#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace borelheat {

/// Immutable symbolic expression over variables x_0..x_{d-1}.
///
/// Fields built from the whitelist grammar (polynomials, Gaussian factors,
/// cos/cosh/tanh atoms) are represented this way so that every derivative the
/// model and Lamperti code needs is exact. Construction applies light
/// algebraic simplification (constant folding, flattening, neutral elements),
/// which keeps derivative trees from growing needlessly.
class Expr {
public:
    enum class Kind { Const, Var, Add, Mul, Pow, Exp, Cos, Sin, Cosh, Sinh, Tanh };

    Expr();
    Expr(double value);  // NOLINT(google-explicit-constructor)

    static Expr var(int axis);

    Kind kind() const;
    bool is_constant() const;
    double constant_value() const;  // only meaningful when is_constant()

    double operator()(std::span<const double> x) const;
    double operator()(double x) const;

    /// Partial derivative along `axis`.
    Expr diff(int axis) const;
    /// `order`-th derivative along `axis`.
    Expr diff(int axis, int order) const;

    /// Ascending monomial coefficients when the expression is a polynomial in x_0
    /// alone; nullopt otherwise.
    std::optional<std::vector<double>> as_polynomial() const;
    /// Total degree when the expression is a (multivariate) polynomial.
    std::optional<int> polynomial_degree() const;
    /// Taylor coefficients of x_0 -> f(y + z) in z through z^order (jet arithmetic,
    /// no differentiation trees). Only valid for expressions in x_0 alone.
    std::vector<double> taylor(double y, int order) const;
    /// Largest variable index referenced, or -1 for constants.
    int max_axis() const;

    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

    friend Expr pow(const Expr& base, double exponent);
    friend Expr exp(const Expr& a);
    friend Expr cos(const Expr& a);
    friend Expr sin(const Expr& a);
    friend Expr cosh(const Expr& a);
    friend Expr sinh(const Expr& a);
    friend Expr tanh(const Expr& a);
    friend Expr sqrt(const Expr& a);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    static Expr make(Kind kind, std::vector<Expr> children, double value = 0.0, int axis = 0);

    std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, double exponent);
Expr exp(const Expr& a);
Expr cos(const Expr& a);
Expr sin(const Expr& a);
Expr cosh(const Expr& a);
Expr sinh(const Expr& a);
Expr tanh(const Expr& a);
Expr sqrt(const Expr& a);

/// Parses the whitelist grammar used in model files and on the command line.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*    divisors must be numeric constants
///   unary   := '-' unary | power
///   power   := primary ('^' integer)?
///   primary := number | var | func '(' expr ')' | '(' expr ')'
///
/// Variables are `x` (or `s`) for axis 0 and `x1`..`x9` for axes 0..8.
/// Functions: exp (argument of total degree <= 2), cos, cosh, tanh (affine
/// arguments) and sqrt (polynomial argument). Anything else is a ParseError.
Expr parse_expression(std::string_view text);

}  // namespace borelheat
