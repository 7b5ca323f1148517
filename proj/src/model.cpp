#include "borelheat/model.hpp"

#include "borelheat/errors.hpp"
#include "borelheat/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace borelheat {

namespace {

bool same_location(const std::vector<double>& a, const std::vector<double>& b, double sign) {
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - sign * b[i]) > 1e-12 * (1.0 + std::abs(a[i]))) return false;
    return true;
}

bool is_origin(const std::vector<double>& xi) {
    return std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; });
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

int grid_points_per_axis(int d) { return d == 1 ? 201 : (d == 2 ? 41 : 15); }

// Tensor-product composite Gauss-Legendre over [-L, L]^d.
double integrate_box(const std::function<double(std::span<const double>)>& f, int d, double L, int panels) {
    const quad::Rule& base = quad::gauss_legendre(10);
    std::vector<double> nodes, weights;
    const double width = 2.0 * L / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -L + (p + 0.5) * width;
        for (size_t k = 0; k < base.nodes.size(); ++k) {
            nodes.push_back(mid + 0.5 * width * base.nodes[k]);
            weights.push_back(0.5 * width * base.weights[k]);
        }
    }
    const size_t n = nodes.size();
    std::vector<size_t> idx(d, 0);
    std::vector<double> point(d);
    double total = 0.0;
    for (;;) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            point[i] = nodes[idx[i]];
            w *= weights[idx[i]];
        }
        total += w * f(point);
        int axis = 0;
        while (axis < d && ++idx[axis] == n) idx[axis++] = 0;
        if (axis == d) break;
    }
    return total;
}

// Panel doubling until the relative change drops below 1e-10.
double converged_box_integral(const std::function<double(std::span<const double>)>& f, int d, double L) {
    const int max_panels = d == 1 ? 4096 : (d == 2 ? 128 : 32);
    int panels = d == 1 ? 16 : 4;
    double prev = integrate_box(f, d, L, panels);
    while (panels < max_panels) {
        panels *= 2;
        const double cur = integrate_box(f, d, L, panels);
        if (!std::isfinite(cur)) break;
        if (std::abs(cur - prev) <= 1e-10 * std::abs(cur)) return cur;
        prev = cur;
    }
    throw NormalizationDivergent("normalization quadrature did not converge on [-L, L]^d with L = " +
                                 std::to_string(L));
}

}  // namespace

void SymmetricMeasure::validate() const {
    if (dimension < 1) throw SymmetryViolation("measure dimension must be positive");
    std::vector<bool> used(atoms.size(), false);
    for (size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (static_cast<int>(a.location.size()) != dimension)
            throw SymmetryViolation("atom " + std::to_string(i) + " has the wrong dimension");
        if (std::abs(a.weight.imag()) > 1e-14 * (1.0 + std::abs(a.weight)))
            throw SymmetryViolation("atom " + std::to_string(i) +
                                    " has a non-real weight; the potential would be complex");
        if (!std::isfinite(std::abs(a.weight))) throw SymmetryViolation("non-finite atom weight");
    }
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (used[i]) continue;
        if (is_origin(atoms[i].location)) {
            used[i] = true;
            continue;
        }
        bool paired = false;
        for (size_t j = 0; j < atoms.size(); ++j) {
            if (j == i || used[j]) continue;
            if (same_location(atoms[i].location, atoms[j].location, -1.0) &&
                std::abs(atoms[i].weight - atoms[j].weight) <= 1e-12 * (1.0 + std::abs(atoms[i].weight))) {
                used[i] = used[j] = true;
                paired = true;
                break;
            }
        }
        if (!paired) throw SymmetryViolation("atom " + std::to_string(i) + " has no mirror atom with equal weight");
    }
}

double SymmetricMeasure::total_variation() const {
    double s = 0.0;
    for (const auto& a : atoms) s += std::abs(a.weight);
    return s;
}

bool ModelInvariantReport::ok(double tol) const {
    return drift_residual <= tol && shift_identity_residual <= tol && potential_identity_residual <= tol &&
           ground_state_residual <= tol && normalization_residual <= tol && curl_residual <= tol;
}

ScalarField potential_from_measure(const SymmetricMeasure& mu, const Box& domain) {
    mu.validate();
    const int d = mu.dimension;
    Expr v(0.0);
    std::vector<bool> used(mu.atoms.size(), false);
    for (size_t i = 0; i < mu.atoms.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const Atom& a = mu.atoms[i];
        const double w = a.weight.real();
        if (is_origin(a.location)) {
            v = v - w;
            continue;
        }
        for (size_t j = i + 1; j < mu.atoms.size(); ++j) {
            if (!used[j] && same_location(a.location, mu.atoms[j].location, -1.0)) {
                used[j] = true;
                break;
            }
        }
        Expr phase(0.0);
        for (int k = 0; k < d; ++k)
            if (a.location[k] != 0.0) phase = phase + a.location[k] * Expr::var(k);
        v = v - 2.0 * w * cos(phase);
    }
    return ScalarField(v, d, domain);
}

DriftField drift_from_ground_state(const ScalarField& phi) {
    const int d = phi.dimension();
    for (const auto& p : sample_grid(phi.domain(), grid_points_per_axis(d)))
        if (!(phi(p) > 0.0)) throw NonPositiveGroundState("phi is not strictly positive on its domain");
    DriftField beta;
    beta.gradient_flag = true;
    if (phi.symbolic()) {
        const Expr& e = *phi.expr();
        for (int i = 0; i < d; ++i)
            beta.components.emplace_back(2.0 * e.diff(i) / e, d, phi.domain(), phi.derivative_order() - 1);
    } else {
        for (int i = 0; i < d; ++i) {
            const ScalarField dphi = phi.derivative(i);
            beta.components.emplace_back(
                ScalarField::Function([phi, dphi](std::span<const double> x) { return 2.0 * dphi(x) / phi(x); }), d,
                phi.domain(), 1.0, phi.derivative_order() - 1);
        }
    }
    return beta;
}

ScalarField potential_from_drift(const DriftField& beta) {
    const int d = beta.dimension();
    if (d == 0) throw std::invalid_argument("empty drift field");
    const Box& domain = beta.components.front().domain();
    const bool symbolic = std::all_of(beta.components.begin(), beta.components.end(),
                                      [](const ScalarField& c) { return c.symbolic(); });
    if (symbolic) {
        Expr v(0.0);
        for (int i = 0; i < d; ++i) {
            const Expr& b = *beta.components[i].expr();
            v = v + 0.25 * b * b + 0.5 * b.diff(i);
        }
        return ScalarField(v, d, domain);
    }
    for (const auto& c : beta.components)
        if (c.derivative_order() < 1) throw MissingDerivative("drift component has no first derivative");
    return ScalarField(
        [beta](std::span<const double> x) {
            double s = 0.0;
            for (const auto& c : beta.components) {
                const double b = c(x);
                s += 0.25 * b * b;
            }
            return s + 0.5 * beta.divergence(x);
        },
        d, domain);
}

RegularityCertificate regularity_certificate(const SymmetricMeasure& mu, double a, double R, double kappa) {
    if (!(a > 0.0) || !(R >= 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("regularity certificate needs a > 0, R >= 0, kappa > 0");
    mu.validate();
    double integral = 0.0;
    for (const auto& atom : mu.atoms) {
        const double r2 = norm2(atom.location);
        integral += std::abs(atom.weight) * std::exp(0.5 * a * r2 + R * std::sqrt(r2));
    }
    if (!(integral > 0.0)) throw std::invalid_argument("regularity certificate needs a nonzero measure");
    RegularityCertificate cert;
    cert.a = a;
    cert.R = R;
    cert.kappa = kappa;
    cert.integral_value = integral;
    cert.C = 2.0 * std::exp(kappa / a) * std::sqrt(integral);
    return cert;
}

double default_domain_half_width(const ScalarField& phi, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    const int d = phi.dimension();
    auto density = [&](std::span<const double> x) {
        const double p = phi(x);
        return p * p * std::exp(-0.5 * omega * norm2(x));
    };
    double L = std::sqrt(60.0 / omega);
    for (int iter = 0; iter < 40; ++iter) {
        const Box box = Box::cube(d, L);
        double interior = 0.0, boundary = 0.0;
        for (const auto& p : sample_grid(box, grid_points_per_axis(d))) {
            const double v = std::abs(density(p));
            interior = std::max(interior, v);
            bool on_face = false;
            for (double c : p) on_face = on_face || std::abs(std::abs(c) - L) < 1e-12 * L;
            if (on_face) boundary = std::max(boundary, v);
        }
        if (std::isfinite(boundary) && interior > 0.0 && boundary <= 1e-14 * interior) return L;
        L *= 1.2;
    }
    throw NormalizationDivergent("phi^2 exp(-omega|x|^2/2) does not decay on any tested box");
}

ModelSpec build_ou_shifted_model(const ScalarField& phi, double omega, const std::optional<SymmetricMeasure>& mu,
                                 const std::optional<RegularityParams>& regularity,
                                 std::optional<double> domain_half_width) {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    if (!phi.symbolic())
        throw MissingDerivative("build_ou_shifted_model needs a symbolic phi for exact drift derivatives");
    const int d = phi.dimension();
    const double L = domain_half_width ? *domain_half_width : default_domain_half_width(phi, omega);
    const Box box = Box::cube(d, L);
    const ScalarField phi_on_box(*phi.expr(), d, box, phi.derivative_order());

    ModelSpec m;
    m.d = d;
    m.omega = omega;
    m.phi = phi_on_box;
    m.domain = box;
    m.beta_phi = drift_from_ground_state(phi_on_box);  // also checks positivity on the box

    const double gauss_norm = std::pow(4.0 * M_PI / omega, static_cast<double>(d));
    const double integral = converged_box_integral(
        [&](std::span<const double> x) {
            const double p = phi_on_box(x);
            return p * p * std::exp(-0.5 * omega * norm2(x));
        },
        d, L);
    if (!(integral > 0.0) || !std::isfinite(integral))
        throw NormalizationDivergent("phi^2 exp(-omega|x|^2/2) has no finite positive integral");
    m.c_phi = std::pow(integral / gauss_norm, -0.5);

    std::vector<Expr> x;
    Expr r2(0.0);
    for (int i = 0; i < d; ++i) {
        x.push_back(Expr::var(i));
        r2 = r2 + x[i] * x[i];
    }
    const Expr& phi_e = *phi.expr();
    const Expr psi_e = (m.c_phi / std::sqrt(gauss_norm)) * phi_e * exp((-0.25 * omega) * r2);
    m.psi = ScalarField(psi_e, d, box);

    Expr x_dot_beta(0.0);
    for (int i = 0; i < d; ++i) {
        const Expr& b = *m.beta_phi.components[i].expr();
        m.beta_psi.components.emplace_back(b - omega * x[i], d, box);
        x_dot_beta = x_dot_beta + x[i] * b;
    }
    m.beta_psi.gradient_flag = true;

    m.V_phi = potential_from_drift(m.beta_phi);
    const Expr v_tilde = *m.V_phi.expr() + (0.25 * omega * omega) * r2 - (0.5 * omega) * x_dot_beta - 0.5 * omega * d;
    m.V_tilde = ScalarField(v_tilde, d, box);
    m.W_total = m.V_tilde;

    if (mu) {
        mu->validate();
        if (mu->dimension != d) throw std::invalid_argument("measure dimension does not match phi");
        m.measure = mu;
        if (regularity) m.certificate = regularity_certificate(*mu, regularity->a, regularity->R, regularity->kappa);
    }
    return m;
}

ModelSpec free_model(int d, double domain_half_width) {
    const Box box = Box::cube(d, domain_half_width);
    ModelSpec m;
    m.d = d;
    m.omega = 0.0;
    m.phi = ScalarField(Expr(1.0), d, box);
    m.c_phi = 1.0;
    m.psi = m.phi;
    for (int i = 0; i < d; ++i) {
        m.beta_phi.components.emplace_back(Expr(0.0), d, box);
        m.beta_psi.components.emplace_back(Expr(0.0), d, box);
    }
    m.beta_phi.gradient_flag = m.beta_psi.gradient_flag = true;
    m.V_phi = m.V_tilde = m.W_total = ScalarField(Expr(0.0), d, box);
    m.domain = box;
    m.normalized = false;
    return m;
}

ModelInvariantReport check_model_invariants(const ModelSpec& m, int per_axis) {
    ModelInvariantReport r;
    const int d = m.d;
    const auto points = sample_grid(m.domain, d == 1 ? per_axis : std::min(per_axis, d == 2 ? 15 : 7), 0.5);
    const bool symbolic = m.psi.symbolic();
    std::vector<Expr> dpsi;
    Expr lap(0.0);
    if (symbolic) {
        for (int i = 0; i < d; ++i) {
            dpsi.push_back(m.psi.expr()->diff(i));
            lap = lap + dpsi.back().diff(i);
        }
    }
    for (const auto& p : points) {
        const double psi = m.psi(p);
        const auto bphi = m.beta_phi(p);
        const auto bpsi = m.beta_psi(p);
        double x_dot_b = 0.0, r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double from_psi = symbolic ? 2.0 * dpsi[i](p) / psi : 2.0 * m.psi.partial(i, p) / psi;
            r.drift_residual = std::max(r.drift_residual, std::abs(bpsi[i] - from_psi) / (1.0 + std::abs(bpsi[i])));
            const double shifted = bphi[i] - m.omega * p[i];
            r.shift_identity_residual =
                std::max(r.shift_identity_residual, std::abs(bpsi[i] - shifted) / (1.0 + std::abs(bpsi[i])));
            x_dot_b += p[i] * bphi[i];
            r2 += p[i] * p[i];
        }
        const double vt = m.V_tilde(p);
        const double expected =
            m.V_phi(p) + 0.25 * m.omega * m.omega * r2 - 0.5 * m.omega * x_dot_b - 0.5 * m.omega * d;
        r.potential_identity_residual =
            std::max(r.potential_identity_residual, std::abs(vt - expected) / (1.0 + std::abs(vt)));
        const double lap_psi = symbolic ? lap(p) : m.psi.laplacian(p);
        r.ground_state_residual = std::max(r.ground_state_residual, std::abs(vt * psi - lap_psi));
    }
    r.curl_residual = m.beta_psi.curl_residual(points);
    if (m.normalized) {
        const double mass = converged_box_integral(
            [&](std::span<const double> x) {
                const double p = m.psi(x);
                return p * p;
            },
            d, m.domain.hi.front());
        r.normalization_residual = std::abs(mass - 1.0);
    }
    return r;
}

PeriodicGroundState periodic_ground_state(const SymmetricMeasure& mu, int modes) {
    mu.validate();
    if (mu.dimension != 1) throw std::invalid_argument("periodic ground state is implemented for d = 1");
    if (modes < 4) throw std::invalid_argument("need at least 4 Fourier modes");
    double q = 0.0;
    for (const auto& a : mu.atoms) {
        const double xi = std::abs(a.location[0]);
        if (xi > 0.0 && (q == 0.0 || xi < q)) q = xi;
    }
    // Potential as a cosine series v_k cos(k q x).
    std::vector<double> v;
    for (const auto& a : mu.atoms) {
        const double ratio = q > 0.0 ? std::abs(a.location[0]) / q : 0.0;
        const double k = std::round(ratio);
        if (std::abs(ratio - k) > 1e-9 * (1.0 + ratio))
            throw std::invalid_argument("measure atoms are not on a common lattice; potential is not periodic");
        const auto ki = static_cast<size_t>(k);
        if (v.size() <= ki) v.resize(ki + 1, 0.0);
        // Each atom contributes -w cos(k q x); mirror atoms add up to -2w cos.
        v[ki] -= a.weight.real();
    }
    if (q == 0.0) q = 1.0;

    // Galerkin matrix in the orthonormal cosine basis {1, sqrt2 cos(n q x)}.
    auto mean_triple = [](long a, long b, long c) {
        int hits = 0;
        hits += (a + b + c == 0);
        hits += (a + b - c == 0);
        hits += (a - b + c == 0);
        hits += (a - b - c == 0);
        return 0.25 * hits;
    };
    auto norm = [](int n) { return n == 0 ? 1.0 : std::sqrt(2.0); };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(modes, modes);
    for (int m = 0; m < modes; ++m)
        for (int n = 0; n < modes; ++n) {
            double h = (m == n) ? (n * q) * (n * q) : 0.0;
            for (size_t k = 0; k < v.size(); ++k)
                if (v[k] != 0.0) h += v[k] * norm(m) * norm(n) * mean_triple(m, static_cast<long>(k), n);
            H(m, n) = h;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("ground state eigen solve failed");
    const Eigen::VectorXd vec = es.eigenvectors().col(0);

    PeriodicGroundState gs;
    gs.energy = es.eigenvalues()(0);
    gs.frequency = q;
    const double c0 = vec(0);
    if (c0 == 0.0) throw NonPositiveGroundState("ground state has zero mean");
    for (int n = 0; n < modes; ++n) gs.cos_coefficients.push_back(norm(n) * vec(n) / c0);
    while (gs.cos_coefficients.size() > 1 && std::abs(gs.cos_coefficients.back()) < 1e-18)
        gs.cos_coefficients.pop_back();

    Expr phi(gs.cos_coefficients.front());
    for (size_t n = 1; n < gs.cos_coefficients.size(); ++n)
        phi = phi + gs.cos_coefficients[n] * cos((static_cast<double>(n) * q) * Expr::var(0));
    gs.phi = phi;
    for (int k = 0; k < 2000; ++k) {
        const double x = 2.0 * M_PI / q * k / 2000.0;
        if (!(phi(x) > 0.0)) throw NonPositiveGroundState("computed periodic ground state changes sign");
    }

    gs.shifted_measure = mu;
    gs.shifted_measure.atoms.push_back(Atom{{0.0}, {gs.energy, 0.0}});
    return gs;
}

}  // namespace borelheat
