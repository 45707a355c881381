#include "cflux/spectra.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cflux::spectra {

ComplexMatrix SpectralFrame::to_frame(const ComplexMatrix& op) const {
    if (op.rows() != dim() || op.cols() != dim()) {
        throw std::invalid_argument("SpectralFrame::to_frame: dimension mismatch");
    }
    return basis.adjoint() * op * basis;
}

ComplexMatrix SpectralFrame::hamiltonian() const {
    return basis * energies.asDiagonal() * basis.adjoint();
}

double SpectralFrame::energy_scale() const {
    return energies.size() ? energies.cwiseAbs().maxCoeff() : 0.0;
}

double SpectralFrame::min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (int n = 0; n < dim(); ++n) {
        for (int m = n + 1; m < dim(); ++m) {
            g = std::min(g, std::abs(energies(n) - energies(m)));
        }
    }
    return g;
}

double SpectralFrame::resolve_gap_floor(double gap_floor) const {
    return gap_floor >= 0.0 ? gap_floor : 1e-8 * energy_scale();
}

SpectralFrame diagonalize_instantaneous(const ComplexMatrix& H, double t,
                                        const SpectralFrame* prev) {
    if (H.rows() != H.cols() || H.rows() < 1) {
        throw std::invalid_argument("diagonalize_instantaneous: H must be square");
    }
    if (!all_finite(H)) {
        throw std::invalid_argument("diagonalize_instantaneous: non-finite entries");
    }
    const double scale = std::max(1.0, max_abs(H));
    if (hermiticity_defect(H) > kInputTol * scale) {
        throw std::invalid_argument("diagonalize_instantaneous: H not Hermitian");
    }
    if (prev && prev->dim() != H.rows()) {
        throw std::invalid_argument("diagonalize_instantaneous: predecessor dimension mismatch");
    }

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(H));
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("diagonalize_instantaneous: eigendecomposition failed");
    }

    const int d = static_cast<int>(H.rows());
    SpectralFrame frame;
    frame.t = t;

    if (!prev) {
        frame.energies = es.eigenvalues();
        frame.basis = es.eigenvectors();
        // Gauge: largest-magnitude component real positive.
        for (int n = 0; n < d; ++n) {
            int imax = 0;
            double vmax = 0.0;
            for (int i = 0; i < d; ++i) {
                const double v = std::abs(frame.basis(i, n));
                if (v > vmax) { vmax = v; imax = i; }
            }
            const Complex z = frame.basis(imax, n);
            frame.basis.col(n) *= std::conj(z) / std::abs(z);
        }
        return frame;
    }

    // Greedy assignment on |⟨n_prev|n_new⟩| to follow branches through crossings.
    const ComplexMatrix overlap = prev->basis.adjoint() * es.eigenvectors();
    const RealMatrix mag = overlap.cwiseAbs();
    std::vector<int> pick(static_cast<size_t>(d), -1);
    std::vector<bool> row_done(static_cast<size_t>(d), false), col_done(static_cast<size_t>(d), false);
    for (int step = 0; step < d; ++step) {
        int br = -1, bc = -1;
        double best = -1.0;
        for (int r = 0; r < d; ++r) {
            if (row_done[static_cast<size_t>(r)]) continue;
            for (int c = 0; c < d; ++c) {
                if (col_done[static_cast<size_t>(c)]) continue;
                if (mag(r, c) > best) { best = mag(r, c); br = r; bc = c; }
            }
        }
        if (best < 0.5) {
            throw ContinuityError("diagonalize_instantaneous: eigenvector overlap < 0.5; "
                                  "time step too large for branch tracking");
        }
        pick[static_cast<size_t>(br)] = bc;
        row_done[static_cast<size_t>(br)] = true;
        col_done[static_cast<size_t>(bc)] = true;
    }

    frame.energies.resize(d);
    frame.basis.resize(d, d);
    frame.alignment_overlaps.resize(d);
    for (int n = 0; n < d; ++n) {
        const int c = pick[static_cast<size_t>(n)];
        frame.energies(n) = es.eigenvalues()(c);
        const Complex z = overlap(n, c);
        frame.basis.col(n) = es.eigenvectors().col(c) * (std::conj(z) / std::abs(z));
        frame.alignment_overlaps(n) = std::abs(z);
    }
    return frame;
}

TransitionMatrix transition_elements(const SpectralFrame& frame, const ComplexMatrix& dHdt) {
    if (dHdt.rows() != frame.dim() || dHdt.cols() != frame.dim()) {
        throw std::invalid_argument("transition_elements: dimension mismatch");
    }
    const double scale = std::max(1.0, max_abs(dHdt));
    if (hermiticity_defect(dHdt) > kInputTol * scale) {
        throw std::invalid_argument("transition_elements: dH/dt not Hermitian");
    }
    return TransitionMatrix{frame.to_frame(dHdt)};
}

ComplexMatrix nonadiabatic_coupling(const SpectralFrame& frame, const TransitionMatrix& M,
                                    double gap_floor) {
    const int d = frame.dim();
    if (M.entries.rows() != d || M.entries.cols() != d) {
        throw std::invalid_argument("nonadiabatic_coupling: dimension mismatch");
    }
    const double floor = frame.resolve_gap_floor(gap_floor);
    if (frame.min_gap() <= floor) {
        throw DegeneracyError("nonadiabatic_coupling: energy gap below floor");
    }
    ComplexMatrix c = ComplexMatrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (n == m) continue;
            c(m, n) = M.entries(m, n) / (frame.energies(n) - frame.energies(m));
        }
    }
    return c;
}

double adiabatic_parameter(const SpectralFrame& frame, const TransitionMatrix& M,
                           double gap_floor) {
    const int d = frame.dim();
    if (M.entries.rows() != d || M.entries.cols() != d) {
        throw std::invalid_argument("adiabatic_parameter: dimension mismatch");
    }
    const double floor = frame.resolve_gap_floor(gap_floor);
    if (d > 1 && frame.min_gap() <= floor) {
        throw DegeneracyError("adiabatic_parameter: energy gap below floor");
    }
    double tau = 0.0;
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (n == m) continue;
            const double gap = frame.energies(n) - frame.energies(m);
            tau = std::max(tau, std::abs(M.entries(m, n)) / (gap * gap));
        }
    }
    return tau;
}

} // namespace cflux::spectra
