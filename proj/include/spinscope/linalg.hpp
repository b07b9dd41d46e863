#pragma once

#include <complex>
#include <vector>

#include <eigen3/Eigen/Dense>

namespace spinscope {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// hard cap on operator dimension; everything here is desk-scale dense algebra
inline constexpr int kMaxDim = 4096;

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);
bool is_unitary(const ComplexMatrix& m, double tol = 1e-9);

// angular-momentum matrices for spin j in the basis jz|m> = m|m>,
// rows/columns ordered m = j, j-1, ..., -j
struct SpinOperatorSet {
  double j = 0;
  ComplexMatrix jx, jy, jz, jplus, jminus;
  int dim() const { return static_cast<int>(jz.rows()); }
};

// j must be a non-negative half-integer
SpinOperatorSet spin_operators(double j);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_chain(const std::vector<ComplexMatrix>& ops);

// U = exp(-i h t) for Hermitian h via eigendecomposition, so that
// U(t1) U(t2) = U(t1 + t2) and unitarity holds to rounding
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

}  // namespace spinscope
