#include "spinscope/linalg.hpp"

#include <cmath>

#include "spinscope/errors.hpp"

namespace spinscope {

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const ComplexMatrix gram = m.adjoint() * m;
  return (gram - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

SpinOperatorSet spin_operators(double j) {
  const double two_j = 2.0 * j;
  if (j < 0.0 || std::abs(two_j - std::round(two_j)) > 1e-9)
    throw std::invalid_argument("spin_operators: j must be a non-negative half-integer");

  const int dim = static_cast<int>(std::lround(two_j)) + 1;
  SpinOperatorSet ops;
  ops.j = j;
  ops.jz = ComplexMatrix::Zero(dim, dim);
  ops.jplus = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) ops.jz(i, i) = j - i;
  for (int i = 1; i < dim; ++i) {
    const double m = j - i;  // raising |m> -> |m+1>, column i to row i-1
    ops.jplus(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ops.jminus = ops.jplus.adjoint();
  ops.jx = 0.5 * (ops.jplus + ops.jminus);
  ops.jy = Complex(0.0, -0.5) * (ops.jplus - ops.jminus);
  return ops;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim)
    throw numeric_error("kron: product dimension exceeds the dense-matrix guard");
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

ComplexMatrix kron_chain(const std::vector<ComplexMatrix>& ops) {
  if (ops.empty()) throw std::invalid_argument("kron_chain: empty operator list");
  ComplexMatrix out = ops.front();
  for (std::size_t k = 1; k < ops.size(); ++k) out = kron(out, ops[k]);
  return out;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  if (h.rows() != h.cols()) throw std::invalid_argument("expm_hermitian: matrix not square");
  if (!is_hermitian(h, 1e-10))
    throw numeric_error("expm_hermitian: input is not Hermitian within tolerance");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw numeric_error("expm_hermitian: eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const ComplexMatrix& vecs = solver.eigenvectors();

  Eigen::VectorXcd phases(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -evals(i) * t));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

}  // namespace spinscope
