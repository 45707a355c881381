// spectra.hpp — Instantaneous eigenframe of a time-dependent Hamiltonian:
// continuity-aligned eigendecomposition, fixed gauge, transition elements
// ⟨m|∂H/∂t|n⟩, nonadiabatic couplings, and the adiabatic parameter τ.

#pragma once

#include <optional>

#include "cflux/linalg.hpp"

namespace cflux::spectra {

struct SpectralFrame {
    double t = 0.0;
    RealVector energies;           // E_n; ascending for root frames, branch-aligned otherwise
    ComplexMatrix basis;           // column n = |n(t)⟩, orthonormal
    RealVector alignment_overlaps; // |⟨n(prev)|n(t)⟩|; empty for root frames

    int dim() const { return static_cast<int>(energies.size()); }
    QuantumState eigenvector(int n) const { return QuantumState(basis.col(n)); }

    ComplexMatrix to_frame(const ComplexMatrix& op) const; // V† op V
    ComplexMatrix hamiltonian() const;                     // Σ E_n |n⟩⟨n|
    double energy_scale() const;                           // max |E_n|
    double min_gap() const;

    // Resolved gap floor: explicit value, or 1e-8·max|E_n| when floor < 0.
    double resolve_gap_floor(double gap_floor) const;
};

// Eigendecomposition of a Hermitian H at time t. Without a predecessor the
// energies are ascending and each eigenvector's largest-magnitude component is
// made real positive. With a predecessor, branches are matched by greedy
// assignment on |⟨n_prev|n⟩| and phases chosen so ⟨n_prev|n⟩ is real positive
// (discrete parallel transport). A best overlap below 0.5 signals a step too
// large and raises ContinuityError.
SpectralFrame diagonalize_instantaneous(const ComplexMatrix& H, double t,
                                        const SpectralFrame* prev = nullptr);

// M_{mn} = ⟨m(t)|∂H/∂t|n(t)⟩; Hermitian since ∂H/∂t is.
struct TransitionMatrix {
    ComplexMatrix entries;
};

TransitionMatrix transition_elements(const SpectralFrame& frame, const ComplexMatrix& dHdt);

// ⟨m|ṅ⟩ = M_{mn}/(E_n − E_m) for n ≠ m, zero on the diagonal (parallel
// transport). Requires every pairwise gap above the floor; gap_floor < 0
// selects the default 1e-8·max|E_n|.
ComplexMatrix nonadiabatic_coupling(const SpectralFrame& frame, const TransitionMatrix& M,
                                    double gap_floor = -1.0);

// τ = max_{n≠m} |M_{mn}/(E_n − E_m)²| (ħ = 1). Same degeneracy precondition.
double adiabatic_parameter(const SpectralFrame& frame, const TransitionMatrix& M,
                           double gap_floor = -1.0);

} // namespace cflux::spectra
