#include "borelheat/expr.hpp"

#include "borelheat/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace borelheat {

struct Expr::Node {
    Kind kind;
    double value;  // constant value, or exponent for Pow
    int axis;
    std::vector<Expr> children;
};

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) : node_(std::make_shared<const Node>(Node{Kind::Const, value, 0, {}})) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::var(int axis) {
    if (axis < 0) throw std::invalid_argument("variable axis must be nonnegative");
    return Expr(std::make_shared<const Node>(Node{Kind::Var, 0.0, axis, {}}));
}

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_constant() const { return node_->kind == Kind::Const; }
double Expr::constant_value() const { return node_->value; }

Expr Expr::make(Kind kind, std::vector<Expr> children, double value, int axis) {
    switch (kind) {
    case Kind::Add: {
        std::vector<Expr> terms;
        double c = 0.0;
        for (auto& ch : children) {
            if (ch.is_constant()) {
                c += ch.constant_value();
            } else if (ch.kind() == Kind::Add) {
                for (const auto& g : ch.node_->children) {
                    if (g.is_constant()) c += g.constant_value();
                    else terms.push_back(g);
                }
            } else {
                terms.push_back(std::move(ch));
            }
        }
        if (c != 0.0) terms.emplace_back(c);
        if (terms.empty()) return Expr(0.0);
        if (terms.size() == 1) return terms.front();
        return Expr(std::make_shared<const Node>(Node{Kind::Add, 0.0, 0, std::move(terms)}));
    }
    case Kind::Mul: {
        std::vector<Expr> factors;
        double c = 1.0;
        for (auto& ch : children) {
            if (ch.is_constant()) {
                c *= ch.constant_value();
            } else if (ch.kind() == Kind::Mul) {
                for (const auto& g : ch.node_->children) {
                    if (g.is_constant()) c *= g.constant_value();
                    else factors.push_back(g);
                }
            } else {
                factors.push_back(std::move(ch));
            }
        }
        if (c == 0.0) return Expr(0.0);
        if (factors.empty()) return Expr(c);
        if (c != 1.0) factors.insert(factors.begin(), Expr(c));
        if (factors.size() == 1) return factors.front();
        return Expr(std::make_shared<const Node>(Node{Kind::Mul, 0.0, 0, std::move(factors)}));
    }
    case Kind::Pow: {
        const Expr& base = children.front();
        if (value == 0.0) return Expr(1.0);
        if (value == 1.0) return base;
        if (base.is_constant()) return Expr(std::pow(base.constant_value(), value));
        if (base.kind() == Kind::Pow && is_integer(value) && is_integer(base.node_->value))
            return make(Kind::Pow, {base.node_->children.front()}, value * base.node_->value);
        return Expr(std::make_shared<const Node>(Node{Kind::Pow, value, 0, std::move(children)}));
    }
    case Kind::Exp:
    case Kind::Cos:
    case Kind::Sin:
    case Kind::Cosh:
    case Kind::Sinh:
    case Kind::Tanh: {
        const Expr& arg = children.front();
        if (arg.is_constant()) {
            Expr folded(std::make_shared<const Node>(Node{kind, 0.0, 0, std::move(children)}));
            return Expr(folded(std::span<const double>{}));
        }
        return Expr(std::make_shared<const Node>(Node{kind, 0.0, 0, std::move(children)}));
    }
    case Kind::Const:
        return Expr(value);
    case Kind::Var:
        return var(axis);
    }
    throw std::logic_error("unreachable expression kind");
}

double Expr::operator()(std::span<const double> x) const {
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Const:
        return n.value;
    case Kind::Var:
        if (static_cast<size_t>(n.axis) >= x.size())
            throw std::out_of_range("expression references axis beyond the point dimension");
        return x[n.axis];
    case Kind::Add: {
        double s = 0.0;
        for (const auto& c : n.children) s += c(x);
        return s;
    }
    case Kind::Mul: {
        double p = 1.0;
        for (const auto& c : n.children) p *= c(x);
        return p;
    }
    case Kind::Pow: {
        const double b = n.children.front()(x);
        if (n.value == 2.0) return b * b;
        if (n.value == -1.0) return 1.0 / b;
        if (n.value == 0.5) return std::sqrt(b);
        return std::pow(b, n.value);
    }
    case Kind::Exp: return std::exp(n.children.front()(x));
    case Kind::Cos: return std::cos(n.children.front()(x));
    case Kind::Sin: return std::sin(n.children.front()(x));
    case Kind::Cosh: return std::cosh(n.children.front()(x));
    case Kind::Sinh: return std::sinh(n.children.front()(x));
    case Kind::Tanh: return std::tanh(n.children.front()(x));
    }
    throw std::logic_error("unreachable expression kind");
}

double Expr::operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

Expr Expr::diff(int axis) const {
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Const:
        return Expr(0.0);
    case Kind::Var:
        return Expr(n.axis == axis ? 1.0 : 0.0);
    case Kind::Add: {
        std::vector<Expr> terms;
        terms.reserve(n.children.size());
        for (const auto& c : n.children) terms.push_back(c.diff(axis));
        return make(Kind::Add, std::move(terms));
    }
    case Kind::Mul: {
        std::vector<Expr> terms;
        for (size_t k = 0; k < n.children.size(); ++k) {
            Expr dk = n.children[k].diff(axis);
            if (dk.is_constant() && dk.constant_value() == 0.0) continue;
            std::vector<Expr> factors;
            for (size_t j = 0; j < n.children.size(); ++j)
                factors.push_back(j == k ? dk : n.children[j]);
            terms.push_back(make(Kind::Mul, std::move(factors)));
        }
        return make(Kind::Add, std::move(terms));
    }
    case Kind::Pow: {
        const Expr& u = n.children.front();
        return n.value * pow(u, n.value - 1.0) * u.diff(axis);
    }
    case Kind::Exp: return *this * n.children.front().diff(axis);
    case Kind::Cos: return -sin(n.children.front()) * n.children.front().diff(axis);
    case Kind::Sin: return cos(n.children.front()) * n.children.front().diff(axis);
    case Kind::Cosh: return sinh(n.children.front()) * n.children.front().diff(axis);
    case Kind::Sinh: return cosh(n.children.front()) * n.children.front().diff(axis);
    case Kind::Tanh: return (1.0 - pow(*this, 2.0)) * n.children.front().diff(axis);
    }
    throw std::logic_error("unreachable expression kind");
}

Expr Expr::diff(int axis, int order) const {
    Expr e = *this;
    for (int k = 0; k < order; ++k) e = e.diff(axis);
    return e;
}

std::optional<std::vector<double>> Expr::as_polynomial() const {
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Const:
        return std::vector<double>{n.value};
    case Kind::Var:
        if (n.axis != 0) return std::nullopt;
        return std::vector<double>{0.0, 1.0};
    case Kind::Add: {
        std::vector<double> acc{0.0};
        for (const auto& c : n.children) {
            auto p = c.as_polynomial();
            if (!p) return std::nullopt;
            acc = poly_add(acc, *p);
        }
        return acc;
    }
    case Kind::Mul: {
        std::vector<double> acc{1.0};
        for (const auto& c : n.children) {
            auto p = c.as_polynomial();
            if (!p) return std::nullopt;
            acc = poly_mul(acc, *p);
        }
        return acc;
    }
    case Kind::Pow: {
        if (!is_integer(n.value) || n.value < 0) return std::nullopt;
        auto base = n.children.front().as_polynomial();
        if (!base) return std::nullopt;
        std::vector<double> acc{1.0};
        for (int k = 0; k < static_cast<int>(n.value); ++k) acc = poly_mul(acc, *base);
        return acc;
    }
    default:
        return std::nullopt;
    }
}

std::optional<int> Expr::polynomial_degree() const {
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Const: return 0;
    case Kind::Var: return 1;
    case Kind::Add: {
        int d = 0;
        for (const auto& c : n.children) {
            auto cd = c.polynomial_degree();
            if (!cd) return std::nullopt;
            d = std::max(d, *cd);
        }
        return d;
    }
    case Kind::Mul: {
        int d = 0;
        for (const auto& c : n.children) {
            auto cd = c.polynomial_degree();
            if (!cd) return std::nullopt;
            d += *cd;
        }
        return d;
    }
    case Kind::Pow: {
        if (!is_integer(n.value) || n.value < 0) return std::nullopt;
        auto cd = n.children.front().polynomial_degree();
        if (!cd) return std::nullopt;
        return *cd * static_cast<int>(n.value);
    }
    default:
        return std::nullopt;
    }
}

namespace {

using Jet = std::vector<double>;

Jet jet_mul(const Jet& a, const Jet& b) {
    Jet out(a.size(), 0.0);
    for (size_t k = 0; k < a.size(); ++k) {
        double s = 0.0;
        for (size_t i = 0; i <= k; ++i) s += a[i] * b[k - i];
        out[k] = s;
    }
    return out;
}

// g = f^a via (k f_0) g_k = sum_{j=1..k} ((a + 1) j - k) f_j g_{k-j}.
Jet jet_pow(const Jet& f, double a) {
    Jet g(f.size(), 0.0);
    if (is_integer(a) && a >= 0.0) {
        g[0] = 1.0;
        for (int k = 0; k < static_cast<int>(a); ++k) g = jet_mul(g, f);
        return g;
    }
    if (f[0] == 0.0) throw std::domain_error("Taylor expansion of a power at a zero of its base");
    g[0] = std::pow(f[0], a);
    for (size_t k = 1; k < f.size(); ++k) {
        double s = 0.0;
        for (size_t j = 1; j <= k; ++j) s += ((a + 1.0) * j - static_cast<double>(k)) * f[j] * g[k - j];
        g[k] = s / (static_cast<double>(k) * f[0]);
    }
    return g;
}

// (s, c) with s' = c f' and c' = sign * s f'.
std::pair<Jet, Jet> jet_sincos(const Jet& f, bool hyperbolic) {
    Jet s(f.size(), 0.0), c(f.size(), 0.0);
    s[0] = hyperbolic ? std::sinh(f[0]) : std::sin(f[0]);
    c[0] = hyperbolic ? std::cosh(f[0]) : std::cos(f[0]);
    const double sign = hyperbolic ? 1.0 : -1.0;
    for (size_t k = 1; k < f.size(); ++k) {
        double ss = 0.0, cc = 0.0;
        for (size_t j = 1; j <= k; ++j) {
            ss += j * f[j] * c[k - j];
            cc += j * f[j] * s[k - j];
        }
        s[k] = ss / k;
        c[k] = sign * cc / k;
    }
    return {s, c};
}

}  // namespace

std::vector<double> Expr::taylor(double y, int order) const {
    if (order < 0) throw std::invalid_argument("Taylor order must be nonnegative");
    if (max_axis() > 0) throw std::invalid_argument("Taylor expansion is implemented for x_0 only");
    const size_t n = static_cast<size_t>(order) + 1;
    std::map<const Node*, Jet> memo;
    std::function<Jet(const Expr&)> rec = [&](const Expr& e) -> Jet {
        auto it = memo.find(e.node_.get());
        if (it != memo.end()) return it->second;
        const Node& nd = *e.node_;
        Jet out(n, 0.0);
        switch (nd.kind) {
        case Kind::Const: out[0] = nd.value; break;
        case Kind::Var:
            out[0] = y;
            if (n > 1) out[1] = 1.0;
            break;
        case Kind::Add:
            for (const auto& c : nd.children) {
                const Jet j = rec(c);
                for (size_t k = 0; k < n; ++k) out[k] += j[k];
            }
            break;
        case Kind::Mul:
            out[0] = 1.0;
            for (const auto& c : nd.children) out = jet_mul(out, rec(c));
            break;
        case Kind::Pow: out = jet_pow(rec(nd.children.front()), nd.value); break;
        case Kind::Exp: {
            const Jet f = rec(nd.children.front());
            out[0] = std::exp(f[0]);
            for (size_t k = 1; k < n; ++k) {
                double s = 0.0;
                for (size_t j = 1; j <= k; ++j) s += j * f[j] * out[k - j];
                out[k] = s / k;
            }
            break;
        }
        case Kind::Cos: out = jet_sincos(rec(nd.children.front()), false).second; break;
        case Kind::Sin: out = jet_sincos(rec(nd.children.front()), false).first; break;
        case Kind::Cosh: out = jet_sincos(rec(nd.children.front()), true).second; break;
        case Kind::Sinh: out = jet_sincos(rec(nd.children.front()), true).first; break;
        case Kind::Tanh: {
            auto [s, c] = jet_sincos(rec(nd.children.front()), true);
            out = jet_mul(s, jet_pow(c, -1.0));
            break;
        }
        }
        memo.emplace(e.node_.get(), out);
        return out;
    };
    return rec(*this);
}

int Expr::max_axis() const {
    const Node& n = *node_;
    if (n.kind == Kind::Var) return n.axis;
    int m = -1;
    for (const auto& c : n.children) m = std::max(m, c.max_axis());
    return m;
}

std::string Expr::str() const {
    const Node& n = *node_;
    std::ostringstream os;
    os.precision(17);
    auto unary = [&](const char* name) {
        os << name << '(' << n.children.front().str() << ')';
    };
    switch (n.kind) {
    case Kind::Const:
        if (n.value < 0) os << '(' << n.value << ')';
        else os << n.value;
        break;
    case Kind::Var: os << "x" << n.axis + 1; break;
    case Kind::Add:
        os << '(';
        for (size_t i = 0; i < n.children.size(); ++i) os << (i ? " + " : "") << n.children[i].str();
        os << ')';
        break;
    case Kind::Mul:
        for (size_t i = 0; i < n.children.size(); ++i) os << (i ? "*" : "") << n.children[i].str();
        break;
    case Kind::Pow: os << '(' << n.children.front().str() << ")^" << n.value; break;
    case Kind::Exp: unary("exp"); break;
    case Kind::Cos: unary("cos"); break;
    case Kind::Sin: unary("sin"); break;
    case Kind::Cosh: unary("cosh"); break;
    case Kind::Sinh: unary("sinh"); break;
    case Kind::Tanh: unary("tanh"); break;
    }
    return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::Add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Expr::Kind::Mul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return a * pow(b, -1.0); }
Expr operator-(const Expr& a) { return Expr(-1.0) * a; }

Expr pow(const Expr& base, double exponent) { return Expr::make(Expr::Kind::Pow, {base}, exponent); }
Expr exp(const Expr& a) { return Expr::make(Expr::Kind::Exp, {a}); }
Expr cos(const Expr& a) { return Expr::make(Expr::Kind::Cos, {a}); }
Expr sin(const Expr& a) { return Expr::make(Expr::Kind::Sin, {a}); }
Expr cosh(const Expr& a) { return Expr::make(Expr::Kind::Cosh, {a}); }
Expr sinh(const Expr& a) { return Expr::make(Expr::Kind::Sinh, {a}); }
Expr tanh(const Expr& a) { return Expr::make(Expr::Kind::Tanh, {a}); }
Expr sqrt(const Expr& a) { return pow(a, 0.5); }

// ---------------------------------------------------------------------------
// Whitelist parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) + "'");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                const Expr d = unary();
                if (!d.is_constant()) fail("divisor must be a numeric constant");
                if (d.constant_value() == 0.0) fail("division by zero");
                e = e * Expr(1.0 / d.constant_value());
            } else {
                return e;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) {
            skip_ws();
            const size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be a nonnegative integer");
            const int n = std::stoi(std::string(text_.substr(start, pos_ - start)));
            return pow(base, static_cast<double>(n));
        }
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (accept('(')) {
            Expr e = expression();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string name(text_.substr(start, pos_ - start));
            if (name == "x" || name == "s") return Expr::var(0);
            if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '9')
                return Expr::var(name[1] - '1');
            if (name == "pi") return Expr(M_PI);
            return function(name);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr function(const std::string& name) {
        expect('(');
        Expr arg = expression();
        expect(')');
        const auto degree = arg.polynomial_degree();
        if (!degree) fail(name + "() argument must be polynomial");
        if (name == "exp") {
            if (*degree > 2) fail("exp() argument must be at most quadratic");
            return exp(arg);
        }
        if (name == "cos" || name == "cosh" || name == "tanh") {
            if (*degree > 1) fail(name + "() argument must be affine");
            if (name == "cos") return cos(arg);
            if (name == "cosh") return cosh(arg);
            return tanh(arg);
        }
        if (name == "sqrt") return sqrt(arg);
        fail("function '" + name + "' is not in the whitelist");
    }

    Expr number() {
        const std::string rest(text_.substr(pos_));
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        return Expr(v);
    }

    std::string_view text_;
    size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

}  // namespace borelheat
