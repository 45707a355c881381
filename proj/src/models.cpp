#include "cflux/models.hpp"

#include <cmath>
#include <string>

namespace cflux::models {

namespace {

// sin(x)/x, series near zero.
double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

} // namespace

// ------------------------------ Two-level model ------------------------------

TwoLevelParams::TwoLevelParams(double omega1_, double omega_, double alpha_)
    : omega1(omega1_), omega(omega_), alpha(alpha_) {
    if (!(omega1 > 0.0)) {
        throw std::invalid_argument("TwoLevelParams: omega1 must be positive");
    }
    if (!(alpha >= 0.0 && alpha <= M_PI)) {
        throw std::invalid_argument("TwoLevelParams: alpha must lie in [0, pi]");
    }
    if (!std::isfinite(omega)) {
        throw std::invalid_argument("TwoLevelParams: omega must be finite");
    }
}

double TwoLevelParams::lambda() const {
    return std::sqrt(omega * omega + omega1 * omega1 - 2.0 * omega * omega1 * std::cos(alpha));
}

dynamics::DriveProtocol two_level_drive(const TwoLevelParams& p) {
    const double w1 = p.omega1, w = p.omega, a = p.alpha;
    auto H = [w1, w, a](double t) {
        const double sa = std::sin(a);
        return ComplexMatrix(0.5 * w1 * (sa * std::cos(w * t) * pauli_x()
                                       + sa * std::sin(w * t) * pauli_y()
                                       + std::cos(a) * pauli_z()));
    };
    auto dH = [w1, w, a](double t) {
        const double sa = std::sin(a);
        return ComplexMatrix(0.5 * w1 * w * sa * (-std::sin(w * t) * pauli_x()
                                                 + std::cos(w * t) * pauli_y()));
    };
    std::optional<double> period;
    if (p.omega != 0.0) period = 2.0 * M_PI / std::abs(p.omega);
    return dynamics::DriveProtocol(2, H, dH, period);
}

TwoLevelEigenbasis two_level_eigenbasis(const TwoLevelParams& p, double t) {
    const double c = std::cos(0.5 * p.alpha);
    const double s = std::sin(0.5 * p.alpha);
    const Complex phase = std::exp(Complex(0.0, p.omega * t));

    ComplexVector plus(2), minus(2);
    plus << c, phase * s;
    minus << std::conj(phase) * s, -c;
    return TwoLevelEigenbasis{QuantumState(plus), QuantumState(minus)};
}

QuantumState two_level_exact_state(const TwoLevelParams& p, double t) {
    const double lam = p.lambda();
    const double x = 0.5 * lam * t;
    const double half_t_sinc = 0.5 * t * sinc(x); // sin(λt/2)/λ, valid at λ = 0

    const Complex c_plus =
        (Complex(std::cos(x), 0.0)
         - Complex(0.0, (p.omega1 - p.omega * std::cos(p.alpha)) * half_t_sinc))
        * std::exp(Complex(0.0, -0.5 * p.omega * t));
    const Complex c_minus =
        Complex(0.0, p.omega * std::sin(p.alpha) * half_t_sinc)
        * std::exp(Complex(0.0, 0.5 * p.omega * t));

    const TwoLevelEigenbasis basis = two_level_eigenbasis(p, t);
    return QuantumState(c_plus * basis.chi_plus.amplitudes()
                        + c_minus * basis.chi_minus.amplitudes());
}

TwoLevelPopulations two_level_populations(const TwoLevelParams& p, double t) {
    const double lam = p.lambda();
    const double x = 0.5 * lam * t;
    const double half_t_sinc = 0.5 * t * sinc(x);
    const double cx = std::cos(x);

    const double a = (p.omega1 - p.omega * std::cos(p.alpha)) * half_t_sinc;
    const double b = p.omega * std::sin(p.alpha) * half_t_sinc;
    return TwoLevelPopulations{cx * cx + a * a, b * b};
}

double two_level_coherence_flux(const TwoLevelParams& p, double t) {
    const double lam = p.lambda();
    if (lam == 0.0) return 0.0;
    const double sa = std::sin(p.alpha);
    return -(0.5 * p.omega1 / lam) * p.omega * p.omega * sa * sa * std::sin(lam * t);
}

// ------------------------------ High-spin model ------------------------------

HighSpinParams::HighSpinParams(angular::SpinQuantumNumber j_, double gamma_b0_,
                               double theta_, double omega_, int twice_M_)
    : j(j_), gamma_b0(gamma_b0_), theta(theta_), omega(omega_), twice_M(twice_M_) {
    if (!(gamma_b0 > 0.0)) {
        throw std::invalid_argument("HighSpinParams: gamma_b0 must be positive");
    }
    if (!std::isfinite(theta) || !std::isfinite(omega)) {
        throw std::invalid_argument("HighSpinParams: theta and omega must be finite");
    }
    if (!j.holds(twice_M)) {
        throw std::invalid_argument("HighSpinParams: |M| must not exceed j");
    }
}

RotatingFrameParams rotating_frame_params(const HighSpinParams& p) {
    const double lambda0 = p.omega / p.gamma_b0;
    const double ct = std::cos(p.theta);
    const double s2 = 1.0 - 2.0 * lambda0 * ct + lambda0 * lambda0;
    if (s2 <= 0.0) {
        throw DegeneracyError("rotating_frame_params: omega0 = 0 (degenerate frame)");
    }
    const double s = std::sqrt(s2);
    // cosφ = (cosθ − λ₀)/s turns negative past resonance; atan2 picks the branch.
    const double phi = std::atan2(std::sin(p.theta) / s, (ct - lambda0) / s);
    return RotatingFrameParams{lambda0, p.gamma_b0 * s, phi, p.theta - phi};
}

dynamics::DriveProtocol highspin_drive(const HighSpinParams& p) {
    const auto ops = angular::angular_momentum_ops(p.j);
    const double g = p.gamma_b0, th = p.theta, w = p.omega;
    auto H = [ops, g, th, w](double t) {
        const double st = std::sin(th);
        return ComplexMatrix(g * (ops.jx * st * std::cos(w * t)
                                + ops.jy * st * std::sin(w * t)
                                + ops.jz * std::cos(th)));
    };
    auto dH = [ops, g, th, w](double t) {
        const double st = std::sin(th);
        return ComplexMatrix(g * w * st * (-ops.jx * std::sin(w * t)
                                          + ops.jy * std::cos(w * t)));
    };
    std::optional<double> period;
    if (p.omega != 0.0) period = 2.0 * M_PI / std::abs(p.omega);
    return dynamics::DriveProtocol(p.j.dimension(), H, dH, period);
}

QuantumState highspin_exact_state(const HighSpinParams& p, double t) {
    const RotatingFrameParams rf = rotating_frame_params(p);
    const angular::WignerDMatrix d_beta = angular::wigner_small_d(p.j, rf.beta);
    const angular::WignerDMatrix d_phi = angular::wigner_small_d(p.j, rf.phi);
    const int dim = p.j.dimension();

    ComplexVector amps = ComplexVector::Zero(dim);
    for (int row = 0; row < dim; ++row) {
        const int tm = p.j.twice_m_at(row);
        Complex sum(0.0, 0.0);
        for (int k = 0; k < dim; ++k) {
            const int tmp = p.j.twice_m_at(k); // m'
            sum += d_beta.at(tmp, p.twice_M) * d_phi.at(tm, tmp)
                 * std::exp(Complex(0.0, -0.5 * tmp * rf.omega0 * t));
        }
        // R_z(ωt) phase on |j,m⟩
        amps(row) = sum * std::exp(Complex(0.0, -0.5 * tm * p.omega * t));
    }
    // The factorial-sum d-matrices lose ~j²-growing cancellation precision;
    // past j ≈ 16 the assembled state can miss the normalization gate.
    if (std::abs(amps.norm() - 1.0) > kInputTol) {
        throw std::runtime_error(
            "highspin_exact_state: rotation-sum precision exhausted at twice_j = "
            + std::to_string(p.j.twice()) + "; use numeric propagation for spins this large");
    }
    return QuantumState(amps);
}

ComplexMatrix highspin_density_elements(const HighSpinParams& p, double t) {
    // Instantaneous eigenbasis column n: R_z(ωt) R_y(θ) |j,n⟩.
    const ComplexMatrix basis = angular::rotation_z(p.j, p.omega * t)
                              * angular::rotation_y(p.j, p.theta);
    const ComplexVector a = basis.adjoint() * highspin_exact_state(p, t).amplitudes();
    return a * a.adjoint();
}

double highspin_diag_flux(const HighSpinParams& p, double t) {
    const RotatingFrameParams rf = rotating_frame_params(p);
    const angular::WignerDMatrix d = angular::wigner_small_d(p.j, rf.beta);
    const int tj = p.j.twice();
    const int tM = p.twice_M;

    Complex sum(0.0, 0.0);
    for (int tm = tj; tm >= -tj; tm -= 2) {
        for (int tmp = tj; tmp >= -tj; tmp -= 2) {
            if (tm == tmp) continue; // (m − m') factor vanishes
            const double dm = 0.5 * (tm - tmp);
            const Complex phase = std::exp(Complex(0.0, -dm * rf.omega0 * t));
            double inner = 0.0;
            for (int tn = tj; tn >= -tj; tn -= 2) {
                inner += 0.5 * tn * d.at(tm, tn) * d.at(tmp, tn);
            }
            sum += dm * inner * phase * d.at(tm, tM) * d.at(tmp, tM);
        }
    }
    return (Complex(0.0, -1.0) * rf.omega0 * p.gamma_b0 * sum).real();
}

double highspin_coherence_flux(const HighSpinParams& p, double t) {
    const RotatingFrameParams rf = rotating_frame_params(p);
    const angular::WignerDMatrix d = angular::wigner_small_d(p.j, rf.beta);
    const int tj = p.j.twice();
    const int tM = p.twice_M;

    Complex sum(0.0, 0.0);
    for (int tm = tj; tm >= -tj; tm -= 2) {
        for (int tmp = tj; tmp >= -tj; tmp -= 2) {
            const double dm = 0.5 * (tm - tmp);
            const Complex phase = std::exp(Complex(0.0, -dm * rf.omega0 * t));
            double inner = 0.0;
            for (int tn = tj; tn >= -tj; tn -= 2) {
                inner += d.at(tm, tn) * (d.at(tmp, tn + 2) * angular::ladder_plus(tj, tn)
                                       - d.at(tmp, tn - 2) * angular::ladder_minus(tj, tn));
            }
            sum += inner * phase * d.at(tm, tM) * d.at(tmp, tM);
        }
    }
    return (Complex(0.0, 1.0) * rf.omega0 * p.gamma_b0 * 0.5 * std::sin(rf.beta) * sum).real();
}

} // namespace cflux::models
