#include "cflux/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cflux::dynamics {

namespace {

// Dormand–Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0,
                 A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
constexpr double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0;
// b − b̂ (5th-order weights minus embedded 4th-order weights)
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;

using Rhs = std::function<ComplexMatrix(double, const ComplexMatrix&)>;

double error_norm(const ComplexMatrix& err, const ComplexMatrix& y0,
                  const ComplexMatrix& y1, double tol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.rows(); ++i) {
        for (Eigen::Index k = 0; k < err.cols(); ++k) {
            const double sc = tol + tol * std::max(std::abs(y0(i, k)), std::abs(y1(i, k)));
            const double e = std::abs(err(i, k)) / sc;
            acc += e * e;
        }
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

struct StepResult {
    ComplexMatrix y;
    ComplexMatrix f; // f at the final point (FSAL reuse)
};

// March y from t0 to t1, landing exactly on t1.
StepResult integrate_to(const Rhs& f, double t0, double t1, ComplexMatrix y,
                        ComplexMatrix f0, double tol, double span, double& h) {
    double t = t0;
    ComplexMatrix k1 = std::move(f0);
    ComplexMatrix y_new, k_last;
    const double h_min = 1e-12 * std::max(span, 1.0);
    long steps = 0;
    bool done = false;

    while (!done) {
        double h_try = h;
        bool last = false;
        if (h_try >= t1 - t) {
            h_try = t1 - t;
            last = true;
        }
        const ComplexMatrix k2 = f(t + C2 * h_try, y + h_try * (A21 * k1));
        const ComplexMatrix k3 = f(t + C3 * h_try, y + h_try * (A31 * k1 + A32 * k2));
        const ComplexMatrix k4 = f(t + C4 * h_try, y + h_try * (A41 * k1 + A42 * k2 + A43 * k3));
        const ComplexMatrix k5 =
            f(t + C5 * h_try, y + h_try * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        const ComplexMatrix k6 =
            f(t + h_try, y + h_try * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        y_new = y + h_try * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        k_last = f(t + h_try, y_new);
        const ComplexMatrix err =
            h_try * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k_last);
        const double en = error_norm(err, y, y_new, tol);

        if (en <= 1.0) {
            t += h_try;
            y.swap(y_new);
            k1.swap(k_last);
            done = last;
        }
        const double factor = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
        h = h_try * factor;
        if (!done && h < h_min) {
            std::ostringstream msg;
            msg << "propagate: step size underflow at t = " << t << " (stiff input?)";
            throw IntegrationError(msg.str());
        }
        if (++steps > 20'000'000L) {
            throw IntegrationError("propagate: step budget exhausted");
        }
    }
    return StepResult{std::move(y), std::move(k1)};
}

Trajectory propagate(const DriveProtocol& drive, const Dissipator* diss,
                     const DensityMatrix& rho0, const std::vector<double>& t_grid, double tol) {
    if (t_grid.size() < 2) {
        throw std::invalid_argument("propagate: t_grid needs at least 2 points");
    }
    for (size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw std::invalid_argument("propagate: t_grid must be strictly ascending");
        }
    }
    if (rho0.dim() != drive.dim()) {
        throw std::invalid_argument("propagate: rho0 dimension mismatch");
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw std::invalid_argument("propagate: tol must be positive");
    }

    const Rhs f = [&](double t, const ComplexMatrix& y) {
        return master_rhs(drive.hamiltonian_at(t), diss, y);
    };

    Trajectory traj;
    traj.unitary = (diss == nullptr);
    traj.times = t_grid;
    traj.states.reserve(t_grid.size());
    traj.frames.reserve(t_grid.size());

    ComplexMatrix y = rho0.matrix();
    ComplexMatrix fy = f(t_grid.front(), y);
    const double span = t_grid.back() - t_grid.front();
    double h = std::min(span / 100.0, 0.1 / std::max(max_abs(fy), 1e-8));

    traj.states.push_back(rho0);
    traj.frames.push_back(
        spectra::diagonalize_instantaneous(drive.hamiltonian_at(t_grid.front()), t_grid.front()));

    for (size_t i = 1; i < t_grid.size(); ++i) {
        StepResult r = integrate_to(f, t_grid[i - 1], t_grid[i], std::move(y), std::move(fy),
                                    tol, span, h);
        y = std::move(r.y);
        fy = std::move(r.f);

        // Project back onto the physical manifold at output points and log it.
        const double herm_corr = 0.5 * hermiticity_defect(y);
        y = hermitize(y);
        const double tr = y.trace().real();
        const double trace_corr = std::abs(tr - 1.0);
        y /= tr;
        traj.max_hermiticity_correction = std::max(traj.max_hermiticity_correction, herm_corr);
        traj.max_trace_correction = std::max(traj.max_trace_correction, trace_corr);
        if (herm_corr > 10.0 * tol || trace_corr > 10.0 * tol) {
            throw IntegrationError("propagate: output correction exceeds 10*tol");
        }

        traj.states.emplace_back(y, std::max(1e-8, 10.0 * tol));
        traj.frames.push_back(spectra::diagonalize_instantaneous(
            drive.hamiltonian_at(t_grid[i]), t_grid[i], &traj.frames.back()));
    }
    return traj;
}

} // namespace

DriveProtocol::DriveProtocol(int dim,
                             std::function<ComplexMatrix(double)> hamiltonian,
                             std::function<ComplexMatrix(double)> derivative,
                             std::optional<double> natural_period)
    : dim_(dim),
      hamiltonian_(std::move(hamiltonian)),
      derivative_(std::move(derivative)),
      period_(natural_period) {
    if (dim_ < 1) {
        throw std::invalid_argument("DriveProtocol: dim must be >= 1");
    }
    if (!hamiltonian_ || !derivative_) {
        throw std::invalid_argument("DriveProtocol: missing callables");
    }
    if (period_ && !(*period_ > 0.0)) {
        throw std::invalid_argument("DriveProtocol: natural_period must be positive");
    }

    // Validation samples: fixed seed so construction is deterministic.
    const double window = period_.value_or(1.0);
    const double h_fd = 1e-6 * window;
    std::mt19937 gen(0x5eed);
    std::uniform_real_distribution<double> uni(0.0, window);
    for (int k = 0; k < 10; ++k) {
        const double t = uni(gen);
        const ComplexMatrix H = hamiltonian_(t);
        if (H.rows() != dim_ || H.cols() != dim_) {
            throw std::invalid_argument("DriveProtocol: hamiltonian_at has wrong dimension");
        }
        const double scale = std::max(1.0, max_abs(H));
        if (!all_finite(H) || hermiticity_defect(H) > kInputTol * scale) {
            throw std::invalid_argument("DriveProtocol: hamiltonian_at(t) not Hermitian");
        }
        const ComplexMatrix fd = (hamiltonian_(t + h_fd) - hamiltonian_(t - h_fd)) / (2.0 * h_fd);
        if (max_abs(derivative_(t) - fd) > 1e-6 * scale) {
            throw std::invalid_argument(
                "DriveProtocol: derivative_at disagrees with finite difference of hamiltonian_at");
        }
    }
}

Dissipator::Dissipator(std::vector<ComplexMatrix> ops, std::vector<double> gammas)
    : jump_operators(std::move(ops)), rates(std::move(gammas)) {
    if (jump_operators.size() != rates.size()) {
        throw std::invalid_argument("Dissipator: one rate per jump operator required");
    }
    if (jump_operators.empty()) {
        throw std::invalid_argument("Dissipator: at least one jump operator required");
    }
    const Eigen::Index d = jump_operators.front().rows();
    for (const auto& L : jump_operators) {
        if (L.rows() != d || L.cols() != d) {
            throw std::invalid_argument("Dissipator: jump operator dimension mismatch");
        }
    }
    for (double g : rates) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("Dissipator: rates must be non-negative");
        }
    }
}

int Dissipator::dim() const {
    return static_cast<int>(jump_operators.front().rows());
}

ComplexMatrix Dissipator::apply(const ComplexMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim()) {
        throw std::invalid_argument("Dissipator::apply: dimension mismatch");
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (size_t k = 0; k < jump_operators.size(); ++k) {
        if (rates[k] == 0.0) continue;
        const ComplexMatrix& L = jump_operators[k];
        const ComplexMatrix LdL = L.adjoint() * L;
        out += rates[k] * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
    }
    return out;
}

ComplexMatrix liouville_rhs(const ComplexMatrix& H, const ComplexMatrix& rho) {
    return Complex(0.0, -1.0) * commutator(H, rho);
}

ComplexMatrix master_rhs(const ComplexMatrix& H, const Dissipator* diss, const ComplexMatrix& rho) {
    ComplexMatrix out = liouville_rhs(H, rho);
    if (diss) out += diss->apply(rho);
    return out;
}

Trajectory propagate_unitary(const DriveProtocol& drive, const DensityMatrix& rho0,
                             const std::vector<double>& t_grid, double tol) {
    return propagate(drive, nullptr, rho0, t_grid, tol);
}

Trajectory propagate_lindblad(const DriveProtocol& drive, const Dissipator& diss,
                              const DensityMatrix& rho0,
                              const std::vector<double>& t_grid, double tol) {
    if (diss.dim() != drive.dim()) {
        throw std::invalid_argument("propagate_lindblad: dissipator dimension mismatch");
    }
    return propagate(drive, &diss, rho0, t_grid, tol);
}

Dissipator thermal_dissipator(const ComplexMatrix& H, double temperature, double base_rate) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("thermal_dissipator: temperature must be positive");
    }
    if (!(base_rate > 0.0)) {
        throw std::invalid_argument("thermal_dissipator: base_rate must be positive");
    }
    const spectra::SpectralFrame frame = spectra::diagonalize_instantaneous(H, 0.0);
    const int d = frame.dim();
    if (d < 2) {
        throw std::invalid_argument("thermal_dissipator: system must have dim >= 2");
    }
    if (frame.min_gap() <= frame.resolve_gap_floor(-1.0)) {
        throw DegeneracyError("thermal_dissipator: degenerate Hamiltonian");
    }

    std::vector<ComplexMatrix> ops;
    std::vector<double> gammas;
    ops.reserve(static_cast<size_t>(d) * (d - 1));
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m == n) continue;
            // |m⟩⟨n| moves population n → m.
            ops.push_back(frame.basis.col(m) * frame.basis.col(n).adjoint());
            const double up = std::max(0.0, frame.energies(m) - frame.energies(n));
            gammas.push_back(base_rate * std::exp(-up / temperature));
        }
    }
    return Dissipator(std::move(ops), std::move(gammas));
}

} // namespace cflux::dynamics
