#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cflux/models.hpp"
#include "cflux/spectra.hpp"

using namespace cflux;
using angular::SpinQuantumNumber;

namespace {

std::mt19937 gen(90210);

double uni(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen);
}

// Coherence sum Σ_{n≠m} ρ_nm M_{mn} evaluated numerically from a frame.
double coherence_sum(const spectra::SpectralFrame& frame, const DensityMatrix& rho,
                     const ComplexMatrix& dHdt) {
    const auto m = spectra::transition_elements(frame, dHdt);
    const ComplexMatrix rho_f = frame.to_frame(rho.matrix());
    Complex sum(0.0, 0.0);
    for (int a = 0; a < frame.dim(); ++a) {
        for (int b = 0; b < frame.dim(); ++b) {
            if (a != b) sum += rho_f(a, b) * m.entries(b, a);
        }
    }
    return sum.real();
}

} // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(models::TwoLevelParams(-1.0, 0.5, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(models::TwoLevelParams(1.0, 0.5, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(models::HighSpinParams(SpinQuantumNumber::from_twice(2), 1.0, 0.3, 0.5, 3),
                    std::invalid_argument);
}

TEST_CASE("two_level_drive structure") {
    const models::TwoLevelParams fixed(1.3, 0.6, 0.0);
    const auto d0 = models::two_level_drive(fixed);
    CHECK(max_abs(d0.hamiltonian_at(2.2) - 0.5 * 1.3 * pauli_z()) < 1e-14);
    CHECK(max_abs(d0.derivative_at(2.2)) < 1e-14);

    const models::TwoLevelParams p(1.0, 0.6, M_PI / 3.0);
    const auto drive = models::two_level_drive(p);
    const double norm0 = drive.hamiltonian_at(0.0).norm();
    for (double t : {0.3, 1.7, 9.1}) {
        const auto frame = spectra::diagonalize_instantaneous(drive.hamiltonian_at(t), t);
        CHECK(frame.energies(0) == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(frame.energies(1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(drive.hamiltonian_at(t).norm() == doctest::Approx(norm0).epsilon(1e-12));
    }
}

TEST_CASE("two_level_eigenbasis") {
    const models::TwoLevelParams aligned(1.0, 0.6, 0.0);
    const auto b0 = models::two_level_eigenbasis(aligned, 1.1);
    CHECK(std::abs(b0.chi_plus.amplitudes()(0) - Complex(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(b0.chi_minus.amplitudes()(1) - Complex(-1.0, 0.0)) < 1e-14);

    const models::TwoLevelParams p(1.0, 0.7, 1.1);
    const auto drive = models::two_level_drive(p);
    for (double t : {0.0, 0.9, 4.2}) {
        const auto basis = models::two_level_eigenbasis(p, t);
        CHECK(std::abs(basis.chi_plus.overlap(basis.chi_minus)) < 1e-14);
        const ComplexVector residual =
            drive.hamiltonian_at(t) * basis.chi_plus.amplitudes()
            - 0.5 * p.omega1 * basis.chi_plus.amplitudes();
        CHECK(residual.norm() < 1e-12);
    }
}

TEST_CASE("two_level_exact_state limits and normalization") {
    const models::TwoLevelParams p(1.0, 0.6, M_PI / 3.0);
    const ComplexVector at0 = models::two_level_exact_state(p, 0.0).amplitudes();
    CHECK(std::abs(at0(0) - Complex(std::cos(M_PI / 6.0), 0.0)) < 1e-14);
    CHECK(std::abs(at0(1) - Complex(std::sin(M_PI / 6.0), 0.0)) < 1e-14);

    // ω = 0: the state never leaves the upper branch.
    const models::TwoLevelParams frozen(1.0, 0.0, M_PI / 3.0);
    for (double t : {0.5, 3.0, 12.0}) {
        CHECK(models::two_level_populations(frozen, t).rho_pp == doctest::Approx(1.0));
    }

    for (int trial = 0; trial < 1000; ++trial) {
        const models::TwoLevelParams q(uni(0.1, 3.0), uni(-2.0, 2.0), uni(0.0, M_PI));
        const double t = uni(-20.0, 20.0);
        CHECK(std::abs(models::two_level_exact_state(q, t).amplitudes().norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("two_level_populations closed forms") {
    const models::TwoLevelParams p(1.0, 0.6, M_PI / 3.0);
    const auto pops0 = models::two_level_populations(p, 0.0);
    CHECK(pops0.rho_pp == doctest::Approx(1.0));
    CHECK(std::abs(pops0.rho_mm) < 1e-14);

    // Resonant right-angle drive: ρ₋₋ = ½ sin²(ω₁ t / √2).
    const models::TwoLevelParams res(1.0, 1.0, M_PI / 2.0);
    CHECK(res.lambda() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    for (double t : {0.2, 1.0, 2.7}) {
        const double expected = 0.5 * std::pow(std::sin(t / std::sqrt(2.0)), 2);
        CHECK(models::two_level_populations(res, t).rho_mm
              == doctest::Approx(expected).epsilon(1e-13));
    }

    // Populations agree with overlaps against the exact state, and sum to one.
    for (int trial = 0; trial < 200; ++trial) {
        const models::TwoLevelParams q(uni(0.2, 2.0), uni(-1.5, 1.5), uni(0.0, M_PI));
        const double t = uni(0.0, 15.0);
        const auto pops = models::two_level_populations(q, t);
        const auto basis = models::two_level_eigenbasis(q, t);
        const QuantumState chi = models::two_level_exact_state(q, t);
        CHECK(std::abs(pops.rho_pp - std::norm(basis.chi_plus.overlap(chi))) < 1e-12);
        CHECK(std::abs(pops.rho_mm - std::norm(basis.chi_minus.overlap(chi))) < 1e-12);
        CHECK(std::abs(pops.rho_pp + pops.rho_mm - 1.0) < 1e-12);
    }
}

TEST_CASE("two_level_coherence_flux closed form against frame numerics") {
    const models::TwoLevelParams still(1.0, 0.6, 0.0);
    CHECK(models::two_level_coherence_flux(still, 1.3) == 0.0);

    const models::TwoLevelParams p(1.0, 0.6, M_PI / 3.0);
    const double lam = p.lambda();
    for (int k = 1; k <= 3; ++k) {
        CHECK(std::abs(models::two_level_coherence_flux(p, 2.0 * M_PI * k / lam)) < 1e-12);
    }

    const auto drive = models::two_level_drive(p);
    for (double t : {0.15, 0.8, 2.3, 5.9}) {
        const auto frame = spectra::diagonalize_instantaneous(drive.hamiltonian_at(t), t);
        const DensityMatrix rho = pure_state_density(models::two_level_exact_state(p, t));
        CHECK(std::abs(coherence_sum(frame, rho, drive.derivative_at(t))
                       - models::two_level_coherence_flux(p, t)) < 1e-10);
    }
}

TEST_CASE("rotating frame parameters") {
    // λ₀ = 0: the frame axis coincides with the field axis.
    const models::HighSpinParams p0(SpinQuantumNumber::from_twice(2), 1.5, 0.8, 0.0, 2);
    const auto rf0 = models::rotating_frame_params(p0);
    CHECK(rf0.phi == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(std::abs(rf0.beta) < 1e-14);
    CHECK(rf0.omega0 == doctest::Approx(1.5).epsilon(1e-14));

    // Collinear: θ = 0, λ₀ = 1/2.
    const models::HighSpinParams pc(SpinQuantumNumber::from_twice(2), 1.0, 0.0, 0.5, 2);
    const auto rfc = models::rotating_frame_params(pc);
    CHECK(std::abs(rfc.phi) < 1e-14);
    CHECK(rfc.omega0 == doctest::Approx(0.5));

    for (int trial = 0; trial < 300; ++trial) {
        const models::HighSpinParams q(SpinQuantumNumber::from_twice(3), uni(0.2, 2.0),
                                       uni(0.01, M_PI - 0.01), uni(-2.0, 2.0), 1);
        const auto rf = models::rotating_frame_params(q);
        const double l0 = rf.lambda0;
        CHECK(std::abs(rf.omega0 * rf.omega0
                       - q.gamma_b0 * q.gamma_b0
                             * (1.0 - 2.0 * l0 * std::cos(q.theta) + l0 * l0)) < 1e-12);
        CHECK(std::abs(std::pow(std::sin(rf.phi), 2) + std::pow(std::cos(rf.phi), 2) - 1.0)
              < 1e-14);
        // ω sinθ = −ω₀ sinβ
        CHECK(std::abs(q.omega * std::sin(q.theta) + rf.omega0 * std::sin(rf.beta)) < 1e-12);
    }

    CHECK_THROWS_AS(
        models::rotating_frame_params(
            models::HighSpinParams(SpinQuantumNumber::from_twice(2), 1.0, 0.0, 1.0, 2)),
        DegeneracyError);
}

TEST_CASE("highspin_drive reduces to the two-level drive at j = 1/2") {
    const models::TwoLevelParams p2(1.1, 0.7, 0.9);
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(1), 1.1, 0.9, 0.7, 1);
    const auto d2 = models::two_level_drive(p2);
    const auto dh = models::highspin_drive(ph);
    for (double t : {0.0, 0.4, 2.8}) {
        CHECK(max_abs(d2.hamiltonian_at(t) - dh.hamiltonian_at(t)) < 1e-14);
        CHECK(max_abs(d2.derivative_at(t) - dh.derivative_at(t)) < 1e-14);
    }

    const models::HighSpinParams p3(SpinQuantumNumber::from_twice(3), 1.0, 0.6, 0.5, 3);
    const auto d3 = models::highspin_drive(p3);
    const double norm0 = d3.hamiltonian_at(0.0).norm();
    for (double t : {0.3, 1.9}) {
        const auto frame = spectra::diagonalize_instantaneous(d3.hamiltonian_at(t), t);
        for (int n = 0; n < 4; ++n) {
            CHECK(frame.energies(n) == doctest::Approx(-1.5 + n).epsilon(1e-12));
        }
        CHECK(d3.hamiltonian_at(t).norm() == doctest::Approx(norm0).epsilon(1e-12));
    }
}

TEST_CASE("highspin_exact_state starts in the tilted eigenstate and solves the dynamics") {
    const models::HighSpinParams p(SpinQuantumNumber::from_twice(4), 1.0, 0.7, 0.45, 2);
    const auto j = p.j;

    // t = 0: R_y(θ)|j,M⟩.
    ComplexVector basis_m = ComplexVector::Zero(j.dimension());
    basis_m(j.index_of(p.twice_M)) = 1.0;
    const ComplexVector expected0 = angular::rotation_y(j, p.theta) * basis_m;
    CHECK(max_abs(models::highspin_exact_state(p, 0.0).amplitudes() - expected0) < 1e-12);

    // Schrödinger residual by central differencing.
    const auto rf = models::rotating_frame_params(p);
    const auto drive = models::highspin_drive(p);
    const double h = 1e-6 * (2.0 * M_PI / rf.omega0);
    for (double t : {0.3, 1.1, 4.4}) {
        const ComplexVector dpsi =
            (models::highspin_exact_state(p, t + h).amplitudes()
             - models::highspin_exact_state(p, t - h).amplitudes()) / (2.0 * h);
        const ComplexVector residual =
            Complex(0.0, 1.0) * dpsi
            - drive.hamiltonian_at(t) * models::highspin_exact_state(p, t).amplitudes();
        CHECK(residual.norm() < 1e-8);
    }
}

TEST_CASE("j = 1/2 high-spin state matches the two-level solution") {
    const models::TwoLevelParams p2(1.0, 0.6, M_PI / 3.0);
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(1), 1.0, M_PI / 3.0, 0.6, 1);
    for (double t : {0.0, 0.7, 2.9, 8.1}) {
        CHECK(max_abs(models::highspin_exact_state(ph, t).amplitudes()
                      - models::two_level_exact_state(p2, t).amplitudes()) < 1e-10);
    }
}

TEST_CASE("highspin_density_elements") {
    const models::HighSpinParams p(SpinQuantumNumber::from_twice(3), 1.2, 1.1, 0.5, 1);
    for (double t : {0.0, 0.9, 3.3}) {
        const ComplexMatrix rho = models::highspin_density_elements(p, t);
        CHECK(std::abs(rho.trace() - Complex(1.0, 0.0)) < 1e-12);
        CHECK(hermiticity_defect(rho) < 1e-12);
    }

    // j = 1/2 diagonal reproduces the two-level populations.
    const models::TwoLevelParams p2(1.0, 0.6, M_PI / 3.0);
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(1), 1.0, M_PI / 3.0, 0.6, 1);
    for (double t : {0.4, 1.9, 6.5}) {
        const ComplexMatrix rho = models::highspin_density_elements(ph, t);
        const auto pops = models::two_level_populations(p2, t);
        CHECK(rho(0, 0).real() == doctest::Approx(pops.rho_pp).epsilon(1e-10));
        CHECK(rho(1, 1).real() == doctest::Approx(pops.rho_mm).epsilon(1e-10));
    }

    // λ₀ = 0 keeps the initial eigenstate projector with no coherence.
    const models::HighSpinParams stat(SpinQuantumNumber::from_twice(4), 1.0, 0.7, 0.0, 0);
    const ComplexMatrix rho0 = models::highspin_density_elements(stat, 0.0);
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            const double expected = (a == 2 && b == 2) ? 1.0 : 0.0; // index of M = 0
            CHECK(std::abs(rho0(a, b) - expected) < 1e-12);
        }
    }
}

TEST_CASE("highspin_diag_flux closed form") {
    // j = 1/2 reduction to the two-level flux under γB₀→ω₁, θ→α.
    const models::TwoLevelParams p2(1.0, 0.6, M_PI / 3.0);
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(1), 1.0, M_PI / 3.0, 0.6, 1);
    for (double t : {0.2, 1.4, 5.0}) {
        CHECK(models::highspin_diag_flux(ph, t)
              == doctest::Approx(models::two_level_coherence_flux(p2, t)).epsilon(1e-12));
    }

    // β = 0 collapses the sum.
    const models::HighSpinParams stat(SpinQuantumNumber::from_twice(4), 1.0, 0.9, 0.0, 2);
    CHECK(std::abs(models::highspin_diag_flux(stat, 2.2)) < 1e-13);

    // Finite-difference oracle: d/dt Σ ρ_nn E_n from the density elements.
    const models::HighSpinParams p(SpinQuantumNumber::from_twice(4), 1.0, 0.8, 0.5, 4);
    const auto rf = models::rotating_frame_params(p);
    const double h = 1e-5 * (2.0 * M_PI / rf.omega0);
    for (double t : {0.3, 1.7, 3.9}) {
        const ComplexMatrix rp = models::highspin_density_elements(p, t + h);
        const ComplexMatrix rm = models::highspin_density_elements(p, t - h);
        double fd = 0.0;
        for (int n = 0; n < p.j.dimension(); ++n) {
            const double e_n = 0.5 * p.j.twice_m_at(n) * p.gamma_b0;
            fd += e_n * (rp(n, n).real() - rm(n, n).real()) / (2.0 * h);
        }
        CHECK(std::abs(models::highspin_diag_flux(p, t) - fd) < 1e-8);
    }
}

TEST_CASE("highspin_coherence_flux equals the diagonal flux across spins") {
    for (int tj : {1, 2, 3, 4, 5}) {
        for (int trial = 0; trial < 40; ++trial) {
            const auto j = SpinQuantumNumber::from_twice(tj);
            std::uniform_int_distribution<int> m_idx(0, tj);
            const models::HighSpinParams p(j, 1.0, uni(0.05, M_PI - 0.05), uni(0.1, 2.0),
                                           tj - 2 * m_idx(gen));
            const auto rf = models::rotating_frame_params(p);
            const double t = uni(0.0, 4.0 * M_PI / rf.omega0);
            CHECK(std::abs(models::highspin_diag_flux(p, t)
                           - models::highspin_coherence_flux(p, t)) < 1e-9);
        }
    }

    // θ = 0: the drive derivative vanishes.
    const models::HighSpinParams axial(SpinQuantumNumber::from_twice(3), 1.0, 0.0, 0.7, 1);
    CHECK(std::abs(models::highspin_coherence_flux(axial, 1.9)) < 1e-13);

    // j = 1/2 reduction.
    const models::TwoLevelParams p2(1.0, 0.6, M_PI / 3.0);
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(1), 1.0, M_PI / 3.0, 0.6, 1);
    for (double t : {0.6, 2.1}) {
        CHECK(models::highspin_coherence_flux(ph, t)
              == doctest::Approx(models::two_level_coherence_flux(p2, t)).epsilon(1e-12));
    }
}

TEST_CASE("Tr(rho_dot H) vanishes along both exact solutions") {
    const models::TwoLevelParams p2(1.0, 0.6, M_PI / 3.0);
    const auto d2 = models::two_level_drive(p2);
    for (double t : {0.3, 2.2, 7.7}) {
        const ComplexMatrix rho =
            pure_state_density(models::two_level_exact_state(p2, t)).matrix();
        const ComplexMatrix rho_dot = dynamics::liouville_rhs(d2.hamiltonian_at(t), rho);
        CHECK(std::abs(trace_product(rho_dot, d2.hamiltonian_at(t)).real()) < 1e-9);
    }
    const models::HighSpinParams ph(SpinQuantumNumber::from_twice(4), 1.0, 0.8, 0.5, 4);
    const auto dh = models::highspin_drive(ph);
    for (double t : {0.3, 2.2}) {
        const ComplexMatrix rho =
            pure_state_density(models::highspin_exact_state(ph, t)).matrix();
        const ComplexMatrix rho_dot = dynamics::liouville_rhs(dh.hamiltonian_at(t), rho);
        CHECK(std::abs(trace_product(rho_dot, dh.hamiltonian_at(t)).real()) < 1e-9);
    }
}
