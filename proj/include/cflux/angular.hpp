// angular.hpp — Angular-momentum operators and Wigner small-d rotation algebra.
//
// Half-integer quantum numbers are carried as exact twice-values (integers):
// j = twice_j/2, m = twice_m/2. Matrix rows and columns are ordered
// m = j, j-1, ..., -j, matching the descending Jz diagonal.

#pragma once

#include "cflux/linalg.hpp"

namespace cflux::angular {

class SpinQuantumNumber {
public:
    static SpinQuantumNumber from_twice(int twice_j);

    int twice() const { return twice_j_; }
    int dimension() const { return twice_j_ + 1; }
    double value() const { return 0.5 * twice_j_; }

    // m label of a row/column index (twice-value), and the inverse map.
    int twice_m_at(int index) const { return twice_j_ - 2 * index; }
    int index_of(int twice_m) const;
    bool holds(int twice_m) const;

private:
    explicit SpinQuantumNumber(int twice_j) : twice_j_(twice_j) {}
    int twice_j_;
};

struct AngularMomentumOps {
    ComplexMatrix jx, jy, jz;
};

// Jz = diag(m), ladder elements ⟨m±1|J±|m⟩ = √((j∓m)(j±m+1)); all Hermitian.
AngularMomentumOps angular_momentum_ops(SpinQuantumNumber j);

// √((j−n)(j+n+1)) and √((j+n)(j−n+1)) with n = twice_n/2; zero out of range.
double ladder_plus(int twice_j, int twice_n);
double ladder_minus(int twice_j, int twice_n);

// Real matrix d^j_{m'm}(β) = ⟨j,m'|exp(−iβJy)|j,m⟩.
struct WignerDMatrix {
    SpinQuantumNumber j;
    double beta;
    RealMatrix entries;

    // Element by m-labels; indices outside |m| ≤ j read as zero, which is how
    // the ladder-shifted sums treat out-of-range terms.
    double at(int twice_m_row, int twice_m_col) const;
};

// Explicit factorial-sum construction with log-factorial accumulation; exact
// structure even for large j where direct factorials lose precision.
WignerDMatrix wigner_small_d(SpinQuantumNumber j, double beta);

// exp(−i·angle·Jz): diagonal phases e^{−im·angle}.
ComplexMatrix rotation_z(SpinQuantumNumber j, double angle);

// exp(−i·angle·Jy) via eigendecomposition of Jy. Kept as an independent
// construction of the same rotation as wigner_small_d.
ComplexMatrix rotation_y(SpinQuantumNumber j, double angle);

// |LHS − RHS| of the ladder recursion
//   ((−m + n cosβ)/sinβ)·d_{mn} = ½[d_{m,n+1}√((j−n)(j+n+1)) + d_{m,n−1}√((j+n)(j−n+1))].
// Throws std::domain_error at sinβ = 0.
double d_recursion_residual(SpinQuantumNumber j, double beta, int twice_m, int twice_n);

// |LHS − RHS| of the invariant sum, arranged without any 1/sinβ:
//   Σ_n (m−m')·n·d_{mn}d_{m'n}
//     = (sinβ/2)·Σ_n d_{mn}[d_{m',n−1}√((j+n)(j−n+1)) − d_{m',n+1}√((j−n)(j+n+1))].
double invariant_sum_residual(SpinQuantumNumber j, double beta, int twice_m, int twice_m_prime);

} // namespace cflux::angular
