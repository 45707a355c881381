// dynamics.hpp — Time evolution: unitary Liouville–von Neumann propagation and
// a GKSL dissipator hook for isochoric relaxation.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cflux/linalg.hpp"
#include "cflux/spectra.hpp"

namespace cflux::dynamics {

// A time-dependent Hamiltonian H(t) with its analytic derivative. Hermiticity
// of H and the consistency of the derivative against a central finite
// difference are validated at construction on sampled times.
class DriveProtocol {
public:
    DriveProtocol(int dim,
                  std::function<ComplexMatrix(double)> hamiltonian,
                  std::function<ComplexMatrix(double)> derivative,
                  std::optional<double> natural_period = std::nullopt);

    int dim() const { return dim_; }
    ComplexMatrix hamiltonian_at(double t) const { return hamiltonian_(t); }
    ComplexMatrix derivative_at(double t) const { return derivative_(t); }
    std::optional<double> natural_period() const { return period_; }

private:
    int dim_;
    std::function<ComplexMatrix(double)> hamiltonian_;
    std::function<ComplexMatrix(double)> derivative_;
    std::optional<double> period_;
};

// Jump operators with non-negative rates, applied in the GKSL form
//   L_D(ρ) = Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}).
struct Dissipator {
    std::vector<ComplexMatrix> jump_operators;
    std::vector<double> rates;

    Dissipator(std::vector<ComplexMatrix> ops, std::vector<double> gammas);

    int dim() const;
    ComplexMatrix apply(const ComplexMatrix& rho) const;
};

// −i[H, ρ]  (ħ = 1)
ComplexMatrix liouville_rhs(const ComplexMatrix& H, const ComplexMatrix& rho);

// −i[H, ρ] + L_D(ρ); diss may be null for the unitary case.
ComplexMatrix master_rhs(const ComplexMatrix& H, const Dissipator* diss, const ComplexMatrix& rho);

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<spectra::SpectralFrame> frames;
    bool unitary = true;

    // Largest re-Hermitization / trace corrections applied at output points.
    double max_hermiticity_correction = 0.0;
    double max_trace_correction = 0.0;

    int size() const { return static_cast<int>(times.size()); }
};

// Integrates ρ̇ = −i[H(t), ρ] with embedded 4(5) Runge–Kutta stepping and local
// error below tol. t_grid fixes the sampling points only; integration steps are
// chosen adaptively. Output states are re-Hermitized and trace-renormalized,
// with corrections logged on the trajectory; a correction above 10·tol means
// the tolerance was not met and raises IntegrationError.
Trajectory propagate_unitary(const DriveProtocol& drive, const DensityMatrix& rho0,
                             const std::vector<double>& t_grid, double tol);

// Same stepper on the GKSL master equation.
Trajectory propagate_lindblad(const DriveProtocol& drive, const Dissipator& diss,
                              const DensityMatrix& rho0,
                              const std::vector<double>& t_grid, double tol);

// Eigenbasis jump operators |m⟩⟨n| with downhill rate base_rate and uphill rate
// base_rate·exp(−ΔE/k_BT) (detailed balance); the fixed point is the Gibbs
// state of H at that temperature. H must be nondegenerate.
Dissipator thermal_dissipator(const ComplexMatrix& H, double temperature, double base_rate);

} // namespace cflux::dynamics
