#include "cflux/thermo.hpp"

#include <algorithm>
#include <cmath>

namespace cflux::thermo {

namespace {

// Trapezoid over indices [0, last] with the given stride; the caller aligns
// last to the stride.
double trapezoid_prefix(const std::vector<double>& t, const std::vector<double>& f,
                        size_t last, size_t stride) {
    double acc = 0.0;
    for (size_t i = stride; i <= last; i += stride) {
        acc += 0.5 * (f[i] + f[i - stride]) * (t[i] - t[i - stride]);
    }
    return acc;
}

bool is_uniform(const std::vector<double>& t, double& h) {
    h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (size_t i = 1; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(h, 1e-12)) return false;
    }
    return true;
}

} // namespace

QuadratureResult integrate_samples(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() < 2) {
        throw std::invalid_argument("integrate_samples: need matching arrays with >= 2 points");
    }
    const size_t n = t.size();
    double h = 0.0;
    if (n < 9 || !is_uniform(t, h)) {
        const double t0 = trapezoid_prefix(t, f, n - 1, 1);
        double coarse = 0.0;
        size_t prev = 0;
        for (size_t i = 2; i < n; i += 2) {
            coarse += 0.5 * (f[i] + f[prev]) * (t[i] - t[prev]);
            prev = i;
        }
        if (prev != n - 1) coarse += 0.5 * (f[n - 1] + f[prev]) * (t[n - 1] - t[prev]);
        return QuadratureResult{t0, std::abs(t0 - coarse) / 3.0 + 1e-300};
    }

    // Romberg (strides 1, 2, 4) on the largest prefix whose interval count is
    // divisible by 4, then a closed Newton–Cotes rule on the 0–3 leftover
    // intervals. Keeps the Richardson error model clean on any sample count.
    const size_t last = 4 * ((n - 1) / 4);
    const double t0 = trapezoid_prefix(t, f, last, 1);
    const double t1 = trapezoid_prefix(t, f, last, 2);
    const double t2 = trapezoid_prefix(t, f, last, 4);
    const double s1 = (4.0 * t0 - t1) / 3.0;
    const double s2 = (4.0 * t1 - t2) / 3.0;
    const double value_prefix = (16.0 * s1 - s2) / 15.0;
    double estimate = std::abs(s1 - s2) / 15.0;

    double tail = 0.0;
    const size_t r = (n - 1) - last;
    if (r > 0) {
        if (r == 1) {
            // Cubic through the last four points, integrated over the last interval.
            tail = h * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]) / 24.0;
        } else if (r == 2) {
            tail = h * (f[n - 3] + 4.0 * f[n - 2] + f[n - 1]) / 3.0;
        } else {
            tail = 3.0 * h * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]) / 8.0;
        }
        // Quartic through the last five points over the same span; the spread
        // between the two high-order rules estimates the tail error.
        Eigen::Matrix<double, 5, 5> vand;
        Eigen::Matrix<double, 5, 1> moments;
        for (int k = 0; k < 5; ++k) {
            for (int col = 0; col < 5; ++col) {
                vand(k, col) = std::pow(static_cast<double>(col), k);
            }
            moments(k) = (std::pow(4.0, k + 1) - std::pow(4.0 - static_cast<double>(r), k + 1))
                         / (k + 1);
        }
        const Eigen::Matrix<double, 5, 1> w = vand.fullPivLu().solve(moments);
        double tail_quartic = 0.0;
        for (int col = 0; col < 5; ++col) {
            tail_quartic += w(col) * f[n - 5 + static_cast<size_t>(col)];
        }
        tail_quartic *= h;
        estimate += std::abs(tail - tail_quartic);
        tail = tail_quartic;
    }
    return QuadratureResult{value_prefix + tail, estimate + 1e-300};
}

FluxSample flux_decomposition(const spectra::SpectralFrame& frame, const DensityMatrix& rho,
                              const ComplexMatrix& rho_dot, const spectra::TransitionMatrix& M,
                              const RealVector& edot, double gap_floor) {
    const int d = frame.dim();
    if (rho.dim() != d || rho_dot.rows() != d || rho_dot.cols() != d ||
        M.entries.rows() != d || edot.size() != d) {
        throw std::invalid_argument("flux_decomposition: dimension mismatch");
    }
    if (!all_finite(rho_dot) || !all_finite(M.entries) || !edot.allFinite()) {
        throw std::invalid_argument("flux_decomposition: non-finite inputs");
    }

    const ComplexMatrix rho_f = frame.to_frame(rho.matrix());
    const ComplexMatrix rho_dot_f = frame.to_frame(rho_dot);
    const double floor = frame.resolve_gap_floor(gap_floor);

    FluxSample s;
    s.t = frame.t;

    // Coherence sum Σ_{n≠m} ρ_nm M_{mn} and the moving-basis population flux
    // Σ E_n ρ̇_nn with ρ̇_nn = ⟨n|ρ̇|n⟩ + 2Re Σ_{m≠n} ρ_nm M_{mn}/(E_n−E_m).
    Complex coh(0.0, 0.0);
    double pop_flux = 0.0;
    double trace_rhodot_H = 0.0;
    for (int n = 0; n < d; ++n) {
        pop_flux += frame.energies(n) * rho_dot_f(n, n).real();
        trace_rhodot_H += frame.energies(n) * rho_dot_f(n, n).real();
        for (int m = 0; m < d; ++m) {
            if (m == n) continue;
            const Complex prod = rho_f(n, m) * M.entries(m, n);
            coh += prod;
            const double gap = frame.energies(n) - frame.energies(m);
            if (std::abs(gap) > floor) {
                pop_flux += 2.0 * frame.energies(n) * (prod / gap).real();
            } else {
                // Degenerate limit of the pair's net E-weighted term.
                pop_flux += prod.real();
            }
        }
    }

    s.coherence_flux = coh.real();
    s.coherence_flux_imag = coh.imag();
    s.diag_pop_flux = pop_flux;
    s.q_dot_naive = pop_flux;
    s.q_dot = pop_flux - s.coherence_flux;

    double energy_flux = 0.0;
    for (int n = 0; n < d; ++n) {
        energy_flux += rho_f(n, n).real() * edot(n);
    }
    s.diag_energy_flux = energy_flux;
    s.w_dot_naive = energy_flux;
    s.w_dot = energy_flux + s.coherence_flux;

    // Direct trace routes for u̇ = Tr(ρ̇H) + Tr(ρḢ).
    const double trace_rho_Hdot = trace_product(rho_f, M.entries).real();
    s.u_dot = trace_rhodot_H + trace_rho_Hdot;
    s.first_law_residual = s.u_dot - s.q_dot - s.w_dot;

    const double rho_dot_norm = std::sqrt(rho_dot.squaredNorm());
    s.scale = std::max(frame.energy_scale(), 1e-300) * std::max(1.0, rho_dot_norm);

    try {
        s.tau_adiabatic = spectra::adiabatic_parameter(frame, M, gap_floor);
    } catch (const DegeneracyError&) {
        s.tau_adiabatic = std::nullopt;
    }
    return s;
}

namespace {

// Common per-sample decomposition along a trajectory. Ė_n is taken from the
// Hellmann–Feynman diagonal M_nn, exact for smooth nondegenerate frames.
std::vector<FluxSample> decompose_trajectory(const dynamics::Trajectory& traj,
                                             const dynamics::DriveProtocol& drive,
                                             const dynamics::Dissipator* diss) {
    if (traj.size() < 3) {
        throw std::invalid_argument("audit_trajectory: need at least 3 samples");
    }
    if (!traj.unitary && !diss) {
        throw std::invalid_argument(
            "audit_trajectory: dissipative trajectory requires its dissipator");
    }
    std::vector<FluxSample> samples;
    samples.reserve(traj.times.size());
    for (int i = 0; i < traj.size(); ++i) {
        const double t = traj.times[static_cast<size_t>(i)];
        const auto& frame = traj.frames[static_cast<size_t>(i)];
        const auto& rho = traj.states[static_cast<size_t>(i)];
        const ComplexMatrix H = drive.hamiltonian_at(t);
        const ComplexMatrix rho_dot =
            dynamics::master_rhs(H, traj.unitary ? nullptr : diss, rho.matrix());
        const spectra::TransitionMatrix M = spectra::transition_elements(frame, drive.derivative_at(t));
        const RealVector edot = M.entries.diagonal().real();
        samples.push_back(flux_decomposition(frame, rho, rho_dot, M, edot));
    }
    return samples;
}

EnergyLedger assemble_ledger(std::vector<FluxSample> samples,
                             const std::vector<double>& times,
                             double U0, double U_final, double quad_tol) {
    EnergyLedger ledger;
    ledger.samples = std::move(samples);
    ledger.U0 = U0;
    ledger.U_final = U_final;

    std::vector<double> qdot, wdot;
    qdot.reserve(ledger.samples.size());
    wdot.reserve(ledger.samples.size());
    for (const auto& s : ledger.samples) {
        qdot.push_back(s.q_dot);
        wdot.push_back(s.w_dot);
        ledger.max_first_law_residual =
            std::max(ledger.max_first_law_residual, std::abs(s.first_law_residual) / s.scale);
    }
    const QuadratureResult q = integrate_samples(times, qdot);
    const QuadratureResult w = integrate_samples(times, wdot);
    ledger.Q = q.value;
    ledger.W = w.value;
    ledger.quadrature_error_estimate = q.error_estimate + w.error_estimate;

    const double tol = quad_tol >= 0.0 ? quad_tol : 1e-7 * (1.0 + std::abs(ledger.delta_u()));
    if (ledger.quadrature_error_estimate > tol) {
        throw GridTooCoarseError("audit_trajectory: quadrature error estimate exceeds tolerance; "
                                 "densify the sample grid");
    }
    return ledger;
}

} // namespace

EnergyLedger audit_trajectory(const dynamics::Trajectory& traj,
                              const dynamics::DriveProtocol& drive,
                              const dynamics::Dissipator* diss, double quad_tol) {
    std::vector<FluxSample> samples = decompose_trajectory(traj, drive, diss);

    const double U0 = expectation(traj.states.front(), drive.hamiltonian_at(traj.times.front()));
    const double U_final = expectation(traj.states.back(), drive.hamiltonian_at(traj.times.back()));

    // Trace-route residuals: Tr(rho_dot H) and Tr(rho Hdot) against the
        // decomposition routes.
    EnergyLedger ledger;
    {
        double a2 = 0.0, a5 = 0.0;
        for (int i = 0; i < traj.size(); ++i) {
            const auto& s = samples[static_cast<size_t>(i)];
            const double t = traj.times[static_cast<size_t>(i)];
            const ComplexMatrix H = drive.hamiltonian_at(t);
            const ComplexMatrix rho_dot = dynamics::master_rhs(
                H, traj.unitary ? nullptr : diss, traj.states[static_cast<size_t>(i)].matrix());
            const double tr_rhodot_H = trace_product(rho_dot, H).real();
            const double tr_rho_Hdot =
                trace_product(traj.states[static_cast<size_t>(i)].matrix(), drive.derivative_at(t))
                    .real();
            a2 = std::max(a2, std::abs(tr_rhodot_H - s.q_dot) / s.scale);
            a5 = std::max(a5, std::abs(tr_rho_Hdot - s.w_dot) / s.scale);
        }
        ledger = assemble_ledger(std::move(samples), traj.times, U0, U_final, quad_tol);
        ledger.max_heat_trace_residual = a2;
        ledger.max_work_trace_residual = a5;
    }
    return ledger;
}

double adiabaticity_audit(const dynamics::Trajectory& traj,
                          const dynamics::DriveProtocol& drive) {
    if (!traj.unitary) {
        throw NotApplicableError("adiabaticity_audit: trajectory is not unitary");
    }
    double worst = 0.0;
    for (int i = 0; i < traj.size(); ++i) {
        const double t = traj.times[static_cast<size_t>(i)];
        const auto& frame = traj.frames[static_cast<size_t>(i)];
        const auto& rho = traj.states[static_cast<size_t>(i)];
        const ComplexMatrix H = drive.hamiltonian_at(t);
        const ComplexMatrix rho_dot = dynamics::liouville_rhs(H, rho.matrix());
        const spectra::TransitionMatrix M =
            spectra::transition_elements(frame, drive.derivative_at(t));
        const FluxSample s =
            flux_decomposition(frame, rho, rho_dot, M, M.entries.diagonal().real());

        const double tr_route = std::abs(trace_product(rho_dot, H).real());
        const double identity_route = std::abs(s.diag_pop_flux - s.coherence_flux);
        worst = std::max(worst, std::max(tr_route, identity_route) / s.scale);
    }
    return worst;
}

DensityMatrix gibbs_state(const ComplexMatrix& H, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("gibbs_state: temperature must be positive");
    }
    const spectra::SpectralFrame frame = spectra::diagonalize_instantaneous(H, 0.0);
    const int d = frame.dim();
    RealVector w(d);
    const double e_min = frame.energies.minCoeff();
    for (int n = 0; n < d; ++n) {
        w(n) = std::exp(-(frame.energies(n) - e_min) / temperature);
    }
    w /= w.sum();
    return DensityMatrix(frame.basis * w.cast<Complex>().asDiagonal() * frame.basis.adjoint());
}

namespace {

struct GibbsPoint {
    double q_dot;   // −cov(E, Ė)/T
    double w_dot;   // ⟨Ė⟩
    double u;       // ⟨E⟩
};

GibbsPoint gibbs_point(const dynamics::DriveProtocol& drive, double temperature, double t) {
    const spectra::SpectralFrame frame =
        spectra::diagonalize_instantaneous(drive.hamiltonian_at(t), t);
    const spectra::TransitionMatrix M =
        spectra::transition_elements(frame, drive.derivative_at(t));
    const int d = frame.dim();

    RealVector w(d);
    const double e_min = frame.energies.minCoeff();
    for (int n = 0; n < d; ++n) {
        w(n) = std::exp(-(frame.energies(n) - e_min) / temperature);
    }
    w /= w.sum();

    double mean_e = 0.0, mean_edot = 0.0, mean_e_edot = 0.0;
    for (int n = 0; n < d; ++n) {
        const double edot_n = M.entries(n, n).real(); // Hellmann–Feynman
        mean_e += w(n) * frame.energies(n);
        mean_edot += w(n) * edot_n;
        mean_e_edot += w(n) * frame.energies(n) * edot_n;
    }
    return GibbsPoint{(mean_e * mean_edot - mean_e_edot) / temperature, mean_edot, mean_e};
}

} // namespace

EnergyLedger quasistatic_isothermal(const dynamics::DriveProtocol& drive, double temperature,
                                    const std::vector<double>& t_grid) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("quasistatic_isothermal: temperature must be positive");
    }
    if (t_grid.size() < 2) {
        throw std::invalid_argument("quasistatic_isothermal: t_grid needs at least 2 points");
    }
    for (size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw std::invalid_argument("quasistatic_isothermal: t_grid must be ascending");
        }
    }

    // Internal refinement until the Richardson estimate clears 1e-8·scale.
    const double t0 = t_grid.front(), t1 = t_grid.back();
    double Q = 0.0, W = 0.0, est = 0.0;
    bool converged = false;
    for (int n_pts = 513; n_pts <= (1 << 21) + 1; n_pts = 2 * (n_pts - 1) + 1) {
        std::vector<double> ts(static_cast<size_t>(n_pts)), qd(static_cast<size_t>(n_pts)),
            wd(static_cast<size_t>(n_pts));
        for (int i = 0; i < n_pts; ++i) {
            const double t = t0 + (t1 - t0) * static_cast<double>(i) / (n_pts - 1);
            ts[static_cast<size_t>(i)] = t;
            const GibbsPoint g = gibbs_point(drive, temperature, t);
            qd[static_cast<size_t>(i)] = g.q_dot;
            wd[static_cast<size_t>(i)] = g.w_dot;
        }
        const QuadratureResult q = integrate_samples(ts, qd);
        const QuadratureResult w = integrate_samples(ts, wd);
        Q = q.value;
        W = w.value;
        est = q.error_estimate + w.error_estimate;
        const double scale = std::max(1.0, std::abs(Q) + std::abs(W));
        if (est <= 1e-8 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw GridTooCoarseError("quasistatic_isothermal: quadrature did not converge");
    }

    EnergyLedger ledger;
    ledger.Q = Q;
    ledger.W = W;
    ledger.quadrature_error_estimate = est;
    ledger.U0 = gibbs_point(drive, temperature, t0).u;
    ledger.U_final = gibbs_point(drive, temperature, t1).u;

    // Samples at the requested grid; the Gibbs path carries no coherence, so
    // naive and coherent fluxes coincide by construction.
    ledger.samples.reserve(t_grid.size());
    for (double t : t_grid) {
        const GibbsPoint g = gibbs_point(drive, temperature, t);
        FluxSample s;
        s.t = t;
        s.q_dot = s.q_dot_naive = s.diag_pop_flux = g.q_dot;
        s.w_dot = s.w_dot_naive = s.diag_energy_flux = g.w_dot;
        s.coherence_flux = 0.0;
        s.coherence_flux_imag = 0.0;
        s.u_dot = g.q_dot + g.w_dot;
        s.first_law_residual = 0.0;
        const spectra::SpectralFrame frame =
            spectra::diagonalize_instantaneous(drive.hamiltonian_at(t), t);
        const spectra::TransitionMatrix M =
            spectra::transition_elements(frame, drive.derivative_at(t));
        s.scale = std::max(frame.energy_scale(), 1e-300);
        try {
            s.tau_adiabatic = spectra::adiabatic_parameter(frame, M);
        } catch (const DegeneracyError&) {
            s.tau_adiabatic = std::nullopt;
        }
        ledger.samples.push_back(std::move(s));
    }
    return ledger;
}

EnergyLedger isochoric_process(const ComplexMatrix& H, const dynamics::Dissipator& diss,
                               const DensityMatrix& rho0, const std::vector<double>& t_grid,
                               double tol) {
    const double scale = std::max(1.0, max_abs(H));
    if (hermiticity_defect(H) > kInputTol * scale) {
        throw std::invalid_argument("isochoric_process: H not Hermitian");
    }
    const ComplexMatrix H_fixed = hermitize(H);
    const ComplexMatrix zero = ComplexMatrix::Zero(H.rows(), H.cols());
    dynamics::DriveProtocol drive(static_cast<int>(H.rows()),
                                  [H_fixed](double) { return H_fixed; },
                                  [zero](double) { return zero; });

    const dynamics::Trajectory traj = dynamics::propagate_lindblad(drive, diss, rho0, t_grid, tol);
    EnergyLedger ledger = audit_trajectory(traj, drive, &diss);
    // Ḣ = 0 makes every ẇ sample exactly zero; pin the integral too.
    ledger.W = 0.0;
    return ledger;
}

} // namespace cflux::thermo
