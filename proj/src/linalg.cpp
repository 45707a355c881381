#include "cflux/linalg.hpp"

#include <cmath>

namespace cflux {

bool all_finite(const ComplexMatrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            if (!std::isfinite(a(i, k).real()) || !std::isfinite(a(i, k).imag())) {
                return false;
            }
        }
    }
    return true;
}

double max_abs(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& a) {
    return max_abs(a - a.adjoint());
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

ComplexMatrix hermitize(const ComplexMatrix& a) {
    return 0.5 * (a + a.adjoint());
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("commutator: dimension mismatch");
    }
    return a * b - b * a;
}

Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("trace_product: dimension mismatch");
    }
    Complex sum(0.0, 0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        sum += a.row(i).dot(b.col(i).conjugate()); // Σ_k a(i,k) b(k,i)
    }
    return sum;
}

QuantumState::QuantumState(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) {
        throw std::invalid_argument("QuantumState: dimension must be >= 1");
    }
    for (Eigen::Index i = 0; i < amps_.size(); ++i) {
        if (!std::isfinite(amps_(i).real()) || !std::isfinite(amps_(i).imag())) {
            throw std::invalid_argument("QuantumState: non-finite amplitude");
        }
    }
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > kInputTol) {
        throw std::invalid_argument("QuantumState: amplitudes not normalized");
    }
    amps_ /= norm;
}

Complex QuantumState::overlap(const QuantumState& other) const {
    if (dim() != other.dim()) {
        throw std::invalid_argument("QuantumState::overlap: dimension mismatch");
    }
    return amps_.dot(other.amps_); // Eigen's dot conjugates the left argument
}

DensityMatrix::DensityMatrix(const ComplexMatrix& rho, double positivity_floor) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) {
        throw std::invalid_argument("DensityMatrix: matrix must be square, dim >= 1");
    }
    if (!all_finite(rho)) {
        throw std::invalid_argument("DensityMatrix: non-finite entries");
    }
    const double scale = std::max(1.0, max_abs(rho));
    if (hermiticity_defect(rho) > kInputTol * scale) {
        throw std::invalid_argument("DensityMatrix: input not Hermitian");
    }
    const Complex tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-8) {
        throw std::invalid_argument("DensityMatrix: trace not 1");
    }
    rho_ = hermitize(rho) / tr.real();

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("DensityMatrix: eigenvalue check failed");
    }
    if (es.eigenvalues().minCoeff() < -positivity_floor) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

double expectation(const DensityMatrix& rho, const ComplexMatrix& obs) {
    if (obs.rows() != obs.cols() || obs.rows() != rho.dim()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    const double scale = std::max(1.0, max_abs(obs));
    if (hermiticity_defect(obs) > kInputTol * scale) {
        throw std::invalid_argument("expectation: observable not Hermitian");
    }
    const Complex value = trace_product(rho.matrix(), obs);
    if (std::abs(value.imag()) > kInputTol * scale) {
        throw std::runtime_error("expectation: imaginary residual too large");
    }
    return value.real();
}

DensityMatrix pure_state_density(const QuantumState& psi) {
    const ComplexVector& a = psi.amplitudes();
    return DensityMatrix(a * a.adjoint());
}

double purity(const DensityMatrix& rho) {
    return trace_product(rho.matrix(), rho.matrix()).real();
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0),
         Complex(0.0, 1.0), 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

ComplexMatrix identity(int dim) {
    if (dim < 1) throw std::invalid_argument("identity: dim must be >= 1");
    return ComplexMatrix::Identity(dim, dim);
}

} // namespace cflux
