// models.hpp — Closed-form solutions for the two exactly solvable benchmark
// systems: a two-level moment in a rotating field and arbitrary-spin
// precession. These serve as analytic oracles for the numerical modules.

#pragma once

#include "cflux/angular.hpp"
#include "cflux/dynamics.hpp"
#include "cflux/linalg.hpp"

namespace cflux::models {

// ------------------------------ Two-level model ------------------------------

// H(t) = (ω₁/2)[sinα cos(ωt) σx + sinα sin(ωt) σy + cosα σz], ħ = 1.
struct TwoLevelParams {
    double omega1; // field coupling, rad/time
    double omega;  // rotation rate of the field axis, rad/time
    double alpha;  // cone opening angle, rad

    TwoLevelParams(double omega1_, double omega_, double alpha_);

    // λ = √(ω² + ω₁² − 2ωω₁cosα), the dressed precession rate.
    double lambda() const;
};

dynamics::DriveProtocol two_level_drive(const TwoLevelParams& p);

// Instantaneous eigenvectors of H(t):
//   |χ₊⟩ = cos(α/2)|↑⟩ + e^{iωt} sin(α/2)|↓⟩,
//   |χ₋⟩ = e^{−iωt} sin(α/2)|↑⟩ − cos(α/2)|↓⟩.
struct TwoLevelEigenbasis {
    QuantumState chi_plus;
    QuantumState chi_minus;
};
TwoLevelEigenbasis two_level_eigenbasis(const TwoLevelParams& p, double t);

// Exact state started spin-up along the field axis at t = 0.
QuantumState two_level_exact_state(const TwoLevelParams& p, double t);

// Populations ρ±± in the instantaneous eigenbasis; they sum to one exactly.
struct TwoLevelPopulations {
    double rho_pp;
    double rho_mm;
};
TwoLevelPopulations two_level_populations(const TwoLevelParams& p, double t);

// Closed form of the coherence sum Σ_{n≠m} ρ_nm⟨m|∂H/∂t|n⟩ on the exact state:
//   −(ω₁/2λ)·ω²sin²α·sin(λt).
double two_level_coherence_flux(const TwoLevelParams& p, double t);

// ------------------------------ High-spin model ------------------------------

// H(t) = γB₀[Jx sinθ cos(ωt) + Jy sinθ sin(ωt) + Jz cosθ] for spin j,
// started in the instantaneous eigenstate labelled M.
struct HighSpinParams {
    angular::SpinQuantumNumber j;
    double gamma_b0; // γB₀, rad/time
    double theta;    // tilt of the field axis, rad
    double omega;    // rotation rate, rad/time
    int twice_M;     // initial eigenstate label, twice-value

    HighSpinParams(angular::SpinQuantumNumber j_, double gamma_b0_,
                   double theta_, double omega_, int twice_M_);
};

// Rotating-frame quantities: λ₀ = ω/γB₀, ω₀ = γB₀√(1 − 2λ₀cosθ + λ₀²),
// tanφ = sinθ/(cosθ − λ₀), β = θ − φ. ω₀ = 0 (λ₀ = 1 with θ = 0) is a
// degenerate frame and raises DegeneracyError.
struct RotatingFrameParams {
    double lambda0;
    double omega0;
    double phi;
    double beta;
};
RotatingFrameParams rotating_frame_params(const HighSpinParams& p);

dynamics::DriveProtocol highspin_drive(const HighSpinParams& p);

// Exact wavefunction
//   |ψ(t)⟩ = Σ_{m m'} d^j_{m'M}(β) d^j_{m m'}(φ) e^{−im'ω₀t} R_z(ωt)|j,m⟩.
QuantumState highspin_exact_state(const HighSpinParams& p, double t);

// Density-matrix elements ρ_nl = ⟨ψ_n|ρ̂|ψ_l⟩ in the instantaneous eigenbasis
// ψ_n = R_z(ωt)R_y(θ)|j,n⟩, computed by direct inner products against the
// exact state. Row/column order n = j..−j.
ComplexMatrix highspin_density_elements(const HighSpinParams& p, double t);

// Closed-form Σ_n ρ̇_nn E_n: the all-β Wigner double sum
//   Re[ −iω₀γB₀ Σ_{nmm'} (m−m')·n·e^{−i(m−m')ω₀t} d_{mM}d_{m'M}d_{mn}d_{m'n} ].
double highspin_diag_flux(const HighSpinParams& p, double t);

// Closed-form coherence sum Σ_{n≠m} ρ_nm⟨ψ_m|∂H/∂t|ψ_n⟩ via the ladder form
//   Re[ iω₀γB₀ (sinβ/2) Σ_{nmm'} e^{−i(m−m')ω₀t} d_{mM}d_{m'M}d_{mn}
//        (d_{m',n+1}√((j−n)(j+n+1)) − d_{m',n−1}√((j+n)(j−n+1))) ].
// Equals highspin_diag_flux identically; out-of-range ladder terms are zero.
double highspin_coherence_flux(const HighSpinParams& p, double t);

} // namespace cflux::models
