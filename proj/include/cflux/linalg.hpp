// linalg.hpp — Dense complex operators, quantum states, and density matrices.
//
// Natural units throughout the library: ħ = 1. Angular frequencies double as
// energies; callers that want another unit system rescale reported energies.

#pragma once

#include <Eigen/Dense>

#include <complex>

#include "cflux/errors.hpp"

namespace cflux {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Tolerance split: user-supplied inputs are accepted to 1e-10, objects built
// by the library must hold to 1e-12.
inline constexpr double kInputTol = 1e-10;
inline constexpr double kConstructTol = 1e-12;

bool all_finite(const ComplexMatrix& a);
double max_abs(const ComplexMatrix& a);
double hermiticity_defect(const ComplexMatrix& a); // max |a - a†|
bool is_hermitian(const ComplexMatrix& a, double tol);
ComplexMatrix hermitize(const ComplexMatrix& a); // (a + a†)/2

// ab - ba; dimensions must agree.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Tr(ab); dimensions must agree.
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

// Normalized pure state. The constructor accepts amplitudes with norm within
// kInputTol of one and stores them renormalized.
class QuantumState {
public:
    explicit QuantumState(ComplexVector amplitudes);

    int dim() const { return static_cast<int>(amps_.size()); }
    const ComplexVector& amplitudes() const { return amps_; }

    // ⟨this|other⟩
    Complex overlap(const QuantumState& other) const;

private:
    ComplexVector amps_;
};

// Unit-trace positive Hermitian operator. The constructor symmetrizes and
// renormalizes the trace, so stored objects satisfy the invariants exactly;
// eigenvalues below -positivity_floor are rejected as unphysical input. The
// default floor suits analytically built states; propagators widen it to
// match the integration tolerance they were asked for.
class DensityMatrix {
public:
    explicit DensityMatrix(const ComplexMatrix& rho, double positivity_floor = 1e-8);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const ComplexMatrix& matrix() const { return rho_; }

private:
    ComplexMatrix rho_;
};

// Re Tr(ρ·obs) for a Hermitian observable. Throws if obs is not Hermitian or
// if the imaginary residual of the trace exceeds tolerance.
double expectation(const DensityMatrix& rho, const ComplexMatrix& obs);

// |ψ⟩⟨ψ|
DensityMatrix pure_state_density(const QuantumState& psi);

// Tr(ρ²) ∈ [1/dim, 1]
double purity(const DensityMatrix& rho);

// --------------------------- Small fixed operators --------------------------

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix identity(int dim);

} // namespace cflux
