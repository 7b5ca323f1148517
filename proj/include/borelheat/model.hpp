#pragma once

#include "borelheat/field.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace borelheat {

struct Atom {
    std::vector<double> location;
    std::complex<double> weight;
};

/// Finite atomic measure whose Fourier transform defines a potential.
/// Symmetric: every atom (xi, w) is matched by (-xi, w).
struct SymmetricMeasure {
    int dimension = 1;
    std::vector<Atom> atoms;

    /// Throws SymmetryViolation on unpaired atoms, mismatched dimensions, or
    /// non-real weights (which would make the potential complex).
    void validate() const;
    double total_variation() const;
};

struct RegularityCertificate {
    double a = 0.0;
    double R = 0.0;
    double kappa = 0.0;
    double C = 0.0;
    double integral_value = 0.0;
};

struct RegularityParams {
    double a = 1.0;
    double R = 0.0;
    double kappa = 1.0;
};

/// Diffusion model with drift 2 grad(ln psi), psi = c_phi phi exp(-omega|x|^2/4) / (4 pi/omega)^{d/2}.
struct ModelSpec {
    int d = 1;
    double omega = 0.0;
    ScalarField phi;
    double c_phi = 1.0;
    ScalarField psi;
    DriftField beta_phi;
    DriftField beta_psi;
    ScalarField V_phi;
    ScalarField V_tilde;
    ScalarField W_total;
    std::optional<SymmetricMeasure> measure;
    std::optional<RegularityCertificate> certificate;
    Box domain;
    /// False only for the free model, whose psi is the constant 1.
    bool normalized = true;
};

struct ModelInvariantReport {
    double drift_residual = 0.0;         // |beta_psi - 2 grad psi / psi|
    double shift_identity_residual = 0.0;  // |beta_psi - (beta_phi - omega x)|
    double potential_identity_residual = 0.0;
    double ground_state_residual = 0.0;  // |V_tilde psi - laplacian psi|
    double normalization_residual = 0.0; // |int psi^2 - 1|
    double curl_residual = 0.0;

    bool ok(double tol = 1e-8) const;
};

/// V(x) = -sum_k w_k exp(i x.xi_k), summed pairwise as a cosine series.
ScalarField potential_from_measure(const SymmetricMeasure& mu, const Box& domain);

/// beta = 2 grad(phi) / phi.
DriftField drift_from_ground_state(const ScalarField& phi);

/// V = |beta|^2 / 4 + div(beta) / 2.
ScalarField potential_from_drift(const DriftField& beta);

RegularityCertificate regularity_certificate(const SymmetricMeasure& mu, double a, double R, double kappa);

/// Half-width L such that the mass of phi^2 exp(-omega|x|^2/2) outside [-L, L]^d is negligible (< 1e-10).
double default_domain_half_width(const ScalarField& phi, double omega);

ModelSpec build_ou_shifted_model(const ScalarField& phi, double omega,
                                 const std::optional<SymmetricMeasure>& mu = std::nullopt,
                                 const std::optional<RegularityParams>& regularity = std::nullopt,
                                 std::optional<double> domain_half_width = std::nullopt);

/// Zero-drift model with psi = 1 (omega = 0); not normalizable, kept as the reference case.
ModelSpec free_model(int d = 1, double domain_half_width = 8.0);

ModelInvariantReport check_model_invariants(const ModelSpec& model, int per_axis = 41);

/// Positive periodic ground state of -d^2/dx^2 + V for a 1-D measure whose atoms
/// sit on a lattice q*Z. phi is returned as a finite cosine series.
struct PeriodicGroundState {
    double energy = 0.0;
    double frequency = 0.0;
    std::vector<double> cos_coefficients;  // phi(x) = sum_n c_n cos(n q x)
    Expr phi;
    /// mu + energy * delta_0, the measure of V - energy = phi''/phi.
    SymmetricMeasure shifted_measure;
};

PeriodicGroundState periodic_ground_state(const SymmetricMeasure& mu, int modes = 48);

}  // namespace borelheat
