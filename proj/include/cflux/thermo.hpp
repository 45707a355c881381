// thermo.hpp — Four-term decomposition of the internal-energy rate,
// coherence-corrected heat/work fluxes with naive counterparts, first-law
// auditing, and the canonical process runners.

#pragma once

#include <optional>
#include <vector>

#include "cflux/dynamics.hpp"
#include "cflux/linalg.hpp"
#include "cflux/spectra.hpp"

namespace cflux::thermo {

// One time sample of the energy-flux decomposition (ħ = 1 units):
//   u̇ = Tr(ρ̇H) + Tr(ρḢ)                     (direct traces)
//   q̇ = Σ ρ̇_nn E_n − Σ_{n≠m} ρ_nm M_{mn}     (population flux minus coherence)
//   ẇ = Σ ρ_nn Ė_n + Σ_{n≠m} ρ_nm M_{mn}
// where ρ̇_nn is the moving-basis population derivative and M_{mn} = ⟨m|Ḣ|n⟩.
// The naive fluxes keep only the diagonal terms.
struct FluxSample {
    double t = 0.0;
    double u_dot = 0.0;
    double q_dot = 0.0;
    double w_dot = 0.0;
    double diag_pop_flux = 0.0;    // Σ ρ̇_nn E_n
    double diag_energy_flux = 0.0; // Σ ρ_nn Ė_n
    double coherence_flux = 0.0;   // Re Σ_{n≠m} ρ_nm M_{mn}
    double coherence_flux_imag = 0.0;
    double q_dot_naive = 0.0;      // = diag_pop_flux
    double w_dot_naive = 0.0;      // = diag_energy_flux
    double first_law_residual = 0.0; // u_dot − q_dot − w_dot
    std::optional<double> tau_adiabatic;
    double scale = 1.0; // max|E_n| · max(1, ‖ρ̇‖), for dimensionless residuals
};

struct EnergyLedger {
    std::vector<FluxSample> samples;
    double Q = 0.0;
    double W = 0.0;
    double U0 = 0.0;
    double U_final = 0.0;

    // Audit payload.
    double max_first_law_residual = 0.0;  // max |residual| / scale over samples
    double max_heat_trace_residual = 0.0; // |Tr(ρ̇H) − q̇| / scale
    double max_work_trace_residual = 0.0; // |Tr(ρḢ) − ẇ| / scale
    double quadrature_error_estimate = 0.0;

    double delta_u() const { return U_final - U0; }
};

// Decomposes one sample. rho_dot is the equation-of-motion derivative of ρ in
// the lab basis (never a finite difference); edot holds Ė_n. The moving-basis
// ρ̇_nn uses the nonadiabatic quotient M_{mn}/(E_n−E_m) pairwise; pairs with a
// gap at or below the floor use the exact degenerate limit of their net
// E-weighted contribution, so no error path is needed here.
FluxSample flux_decomposition(const spectra::SpectralFrame& frame, const DensityMatrix& rho,
                              const ComplexMatrix& rho_dot, const spectra::TransitionMatrix& M,
                              const RealVector& edot, double gap_floor = -1.0);

// Per-sample decomposition along a trajectory plus time integrals of q̇ and ẇ
// by trapezoid quadrature with Richardson extrapolation. diss must be supplied
// for trajectories produced by the dissipative propagator. Throws
// GridTooCoarseError when the quadrature error estimate exceeds quad_tol
// (quad_tol < 0 selects 1e-7·(1 + |ΔU|)).
EnergyLedger audit_trajectory(const dynamics::Trajectory& traj,
                              const dynamics::DriveProtocol& drive,
                              const dynamics::Dissipator* diss = nullptr,
                              double quad_tol = -1.0);

// Max over samples of the scaled residuals |Tr(ρ̇H)|/scale and
// |Σρ̇_nnE_n − Σρ_nmM_{mn}|/scale, both of which vanish for unitary evolution.
// Dissipative trajectories raise NotApplicableError.
double adiabaticity_audit(const dynamics::Trajectory& traj,
                          const dynamics::DriveProtocol& drive);

// Thermal state e^{−H/k_BT}/Z, diagonal in the eigenbasis of H. Temperature is
// measured in energy units (k_B = 1).
DensityMatrix gibbs_state(const ComplexMatrix& H, double temperature);

// Quasi-static isothermal process: ρ(t) is the instantaneous Gibbs state, so
// coherence vanishes and q̇ = −cov(E, Ė)/T, ẇ = ⟨Ė⟩ analytically. Integrals are
// refined internally until the quadrature estimate falls below 1e-8·scale.
EnergyLedger quasistatic_isothermal(const dynamics::DriveProtocol& drive, double temperature,
                                    const std::vector<double>& t_grid);

// Isochoric relaxation under a fixed H: runs the dissipative propagator; ẇ = 0
// identically and Q accounts for the whole internal-energy change.
EnergyLedger isochoric_process(const ComplexMatrix& H, const dynamics::Dissipator& diss,
                               const DensityMatrix& rho0, const std::vector<double>& t_grid,
                               double tol);

// Trapezoid integral of samples with two-level Richardson extrapolation and a
// computable error estimate. Exposed for the process runners and tests.
struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};
QuadratureResult integrate_samples(const std::vector<double>& t, const std::vector<double>& f);

} // namespace cflux::thermo
