#include "cflux/angular.hpp"

#include <cmath>
#include <vector>

namespace cflux::angular {

namespace {

// base^n for small integer n, exact sign handling for negative bases; 0^0 = 1.
double ipow(double base, int n) {
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= base;
    return out;
}

// log(k!) table for k = 0..kmax.
std::vector<double> log_factorials(int kmax) {
    std::vector<double> lf(static_cast<size_t>(kmax) + 1, 0.0);
    for (int k = 1; k <= kmax; ++k) {
        lf[static_cast<size_t>(k)] = lf[static_cast<size_t>(k - 1)] + std::log(static_cast<double>(k));
    }
    return lf;
}

} // namespace

SpinQuantumNumber SpinQuantumNumber::from_twice(int twice_j) {
    if (twice_j < 0) {
        throw std::invalid_argument("SpinQuantumNumber: twice_j must be >= 0");
    }
    return SpinQuantumNumber(twice_j);
}

int SpinQuantumNumber::index_of(int twice_m) const {
    if (!holds(twice_m)) {
        throw std::invalid_argument("SpinQuantumNumber: m out of range");
    }
    return (twice_j_ - twice_m) / 2;
}

bool SpinQuantumNumber::holds(int twice_m) const {
    return std::abs(twice_m) <= twice_j_ && (twice_j_ - twice_m) % 2 == 0;
}

double ladder_plus(int twice_j, int twice_n) {
    const double prod = 0.25 * static_cast<double>(twice_j - twice_n)
                             * static_cast<double>(twice_j + twice_n + 2);
    return prod > 0.0 ? std::sqrt(prod) : 0.0;
}

double ladder_minus(int twice_j, int twice_n) {
    const double prod = 0.25 * static_cast<double>(twice_j + twice_n)
                             * static_cast<double>(twice_j - twice_n + 2);
    return prod > 0.0 ? std::sqrt(prod) : 0.0;
}

AngularMomentumOps angular_momentum_ops(SpinQuantumNumber j) {
    const int dim = j.dimension();
    const int tj = j.twice();

    ComplexMatrix jz = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix jplus = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const int tm = j.twice_m_at(k);
        jz(k, k) = 0.5 * tm;
        // J+ |j,m⟩ = √((j−m)(j+m+1)) |j,m+1⟩; row of m+1 is k−1.
        if (k > 0) {
            jplus(k - 1, k) = ladder_plus(tj, tm);
        }
    }
    const ComplexMatrix jminus = jplus.adjoint();

    AngularMomentumOps ops;
    ops.jx = 0.5 * (jplus + jminus);
    ops.jy = Complex(0.0, -0.5) * (jplus - jminus);
    ops.jz = jz;
    return ops;
}

double WignerDMatrix::at(int twice_m_row, int twice_m_col) const {
    if (!j.holds(twice_m_row) || !j.holds(twice_m_col)) return 0.0;
    return entries(j.index_of(twice_m_row), j.index_of(twice_m_col));
}

WignerDMatrix wigner_small_d(SpinQuantumNumber j, double beta) {
    if (!std::isfinite(beta)) {
        throw std::invalid_argument("wigner_small_d: beta must be finite");
    }
    const int tj = j.twice();
    const int dim = j.dimension();
    const auto lf = log_factorials(tj + 1);

    const double c = std::cos(0.5 * beta);
    const double s = std::sin(0.5 * beta);

    RealMatrix d(dim, dim);
    for (int row = 0; row < dim; ++row) {
        const int tmp = j.twice_m_at(row); // m'
        for (int col = 0; col < dim; ++col) {
            const int tm = j.twice_m_at(col); // m
            const int p = (tj + tmp) / 2;     // j + m'
            const int q = (tj - tmp) / 2;     // j − m'
            const int r = (tj + tm) / 2;      // j + m
            const int s0 = (tj - tm) / 2;     // j − m
            const int dmm = (tmp - tm) / 2;   // m' − m

            const double log_pref = 0.5 * (lf[static_cast<size_t>(p)] + lf[static_cast<size_t>(q)]
                                         + lf[static_cast<size_t>(r)] + lf[static_cast<size_t>(s0)]);

            const int smin = std::max(0, -dmm);
            const int smax = std::min(r, q);
            double sum = 0.0;
            for (int k = smin; k <= smax; ++k) {
                const double log_den = lf[static_cast<size_t>(r - k)] + lf[static_cast<size_t>(k)]
                                     + lf[static_cast<size_t>(dmm + k)] + lf[static_cast<size_t>(q - k)];
                const double mag = std::exp(log_pref - log_den);
                const double term = mag * ipow(c, tj - dmm - 2 * k) * ipow(s, dmm + 2 * k);
                sum += ((dmm + k) % 2 == 0) ? term : -term;
            }
            d(row, col) = sum;
        }
    }
    return WignerDMatrix{j, beta, std::move(d)};
}

ComplexMatrix rotation_z(SpinQuantumNumber j, double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("rotation_z: angle must be finite");
    }
    const int dim = j.dimension();
    ComplexMatrix rz = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const double m = 0.5 * j.twice_m_at(k);
        rz(k, k) = std::exp(Complex(0.0, -m * angle));
    }
    return rz;
}

ComplexMatrix rotation_y(SpinQuantumNumber j, double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("rotation_y: angle must be finite");
    }
    const ComplexMatrix jy = angular_momentum_ops(j).jy;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(jy);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("rotation_y: eigendecomposition failed");
    }
    const int dim = j.dimension();
    ComplexVector phases(dim);
    for (int k = 0; k < dim; ++k) {
        phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * angle));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double d_recursion_residual(SpinQuantumNumber j, double beta, int twice_m, int twice_n) {
    if (!j.holds(twice_m) || !j.holds(twice_n)) {
        throw std::invalid_argument("d_recursion_residual: m or n out of range");
    }
    const double sb = std::sin(beta);
    if (std::abs(sb) < 1e-12) {
        throw std::domain_error("d_recursion_residual: sin(beta) = 0");
    }
    const WignerDMatrix d = wigner_small_d(j, beta);
    const double m = 0.5 * twice_m;
    const double n = 0.5 * twice_n;
    const int tj = j.twice();

    const double lhs = (-m + n * std::cos(beta)) / sb * d.at(twice_m, twice_n);
    const double rhs = 0.5 * (d.at(twice_m, twice_n + 2) * ladder_plus(tj, twice_n)
                            + d.at(twice_m, twice_n - 2) * ladder_minus(tj, twice_n));
    return std::abs(lhs - rhs);
}

double invariant_sum_residual(SpinQuantumNumber j, double beta, int twice_m, int twice_m_prime) {
    if (!j.holds(twice_m) || !j.holds(twice_m_prime)) {
        throw std::invalid_argument("invariant_sum_residual: m or m' out of range");
    }
    const WignerDMatrix d = wigner_small_d(j, beta);
    const int tj = j.twice();
    const double dm = 0.5 * (twice_m - twice_m_prime); // m − m'

    double lhs = 0.0;
    double rhs = 0.0;
    for (int tn = tj; tn >= -tj; tn -= 2) {
        const double n = 0.5 * tn;
        lhs += dm * n * d.at(twice_m, tn) * d.at(twice_m_prime, tn);
        rhs += d.at(twice_m, tn) * (d.at(twice_m_prime, tn - 2) * ladder_minus(tj, tn)
                                  - d.at(twice_m_prime, tn + 2) * ladder_plus(tj, tn));
    }
    rhs *= 0.5 * std::sin(beta);
    return std::abs(lhs - rhs);
}

} // namespace cflux::angular
