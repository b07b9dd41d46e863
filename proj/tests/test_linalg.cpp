#include <doctest.h>

#include <random>

#include "spinscope/errors.hpp"
#include "spinscope/linalg.hpp"

using namespace spinscope;

namespace {

// independent oracle: exp(A) by scaling-and-squaring Taylor series
ComplexMatrix expm_series(ComplexMatrix a) {
  int squarings = 0;
  double norm = a.cwiseAbs().maxCoeff() * a.rows();
  while (norm > 0.25) {
    a *= 0.5;
    norm *= 0.5;
    ++squarings;
  }
  ComplexMatrix sum = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix term = sum;
  for (int k = 1; k <= 24; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

ComplexMatrix random_matrix(int dim, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spin_operators: spin-1/2 gives the Pauli matrices over two") {
  const SpinOperatorSet ops = spin_operators(0.5);
  CHECK(ops.dim() == 2);
  CHECK(ops.jz(0, 0) == Complex(0.5, 0.0));
  CHECK(ops.jz(1, 1) == Complex(-0.5, 0.0));
  CHECK(ops.jx(0, 1) == Complex(0.5, 0.0));
  CHECK(ops.jx(1, 0) == Complex(0.5, 0.0));
  CHECK(ops.jy(0, 1) == Complex(0.0, -0.5));
}

TEST_CASE("spin_operators: spin-1 off-diagonals are 1/sqrt(2)") {
  const SpinOperatorSet ops = spin_operators(1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(ops.jx(0, 1).real() - inv_sqrt2) < 1e-14);
  CHECK(std::abs(ops.jx(1, 2).real() - inv_sqrt2) < 1e-14);
  CHECK(std::abs(ops.jx(1, 0).real() - inv_sqrt2) < 1e-14);
}

TEST_CASE("spin_operators: commutator [jx, jy] = i jz for spin-3/2") {
  const SpinOperatorSet ops = spin_operators(1.5);
  const ComplexMatrix residual =
      ops.jx * ops.jy - ops.jy * ops.jx - Complex(0, 1) * ops.jz;
  CHECK(max_abs(residual) < 1e-12);
}

TEST_CASE("spin_operators: J^2 = j(j+1) identity and ladder relations up to j = 4") {
  for (double j : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
    const SpinOperatorSet ops = spin_operators(j);
    const ComplexMatrix j2 = ops.jx * ops.jx + ops.jy * ops.jy + ops.jz * ops.jz;
    const ComplexMatrix expected =
        j * (j + 1.0) * ComplexMatrix::Identity(ops.dim(), ops.dim());
    CHECK(max_abs(j2 - expected) < 1e-10);
    CHECK(max_abs(ops.jplus - (ops.jx + Complex(0, 1) * ops.jy)) < 1e-12);
    CHECK(max_abs(ops.jminus - (ops.jx - Complex(0, 1) * ops.jy)) < 1e-12);
  }
}

TEST_CASE("spin_operators: rejects non-half-integer spin") {
  CHECK_THROWS_AS(spin_operators(0.3), std::invalid_argument);
  CHECK_THROWS_AS(spin_operators(-0.5), std::invalid_argument);
}

TEST_CASE("kron_chain: identities compose to the identity") {
  const ComplexMatrix eye2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix result = kron_chain({eye2, eye2});
  CHECK(result.rows() == 4);
  CHECK(max_abs(result - ComplexMatrix::Identity(4, 4)) < 1e-15);
}

TEST_CASE("kron_chain: additive z projection on the up-up state") {
  const SpinOperatorSet half = spin_operators(0.5);
  const ComplexMatrix eye2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix total_z = kron(half.jz, eye2) + kron(eye2, half.jz);
  Eigen::VectorXcd up_up = Eigen::VectorXcd::Zero(4);
  up_up(0) = 1.0;
  const Eigen::VectorXcd applied = total_z * up_up;
  CHECK(std::abs(applied(0).real() - 1.0) < 1e-14);  // eigenvalue 1
  CHECK((applied - up_up).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("kron_chain: associativity on random 2x2 factors") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_matrix(2, rng);
    const ComplexMatrix b = random_matrix(2, rng);
    const ComplexMatrix c = random_matrix(2, rng);
    CHECK(max_abs(kron(a, kron(b, c)) - kron(kron(a, b), c)) < 1e-14);
  }
}

TEST_CASE("kron_chain: empty list rejected") {
  CHECK_THROWS_AS(kron_chain({}), std::invalid_argument);
}

TEST_CASE("kron_chain: dimension guard trips beyond the dense-matrix cap") {
  const std::vector<ComplexMatrix> thirteen(13, ComplexMatrix::Identity(2, 2));
  CHECK_THROWS_AS(kron_chain(thirteen), numeric_error);  // 2^13 > 4096
}

TEST_CASE("expm_hermitian: zero generator gives the identity") {
  const ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  CHECK(max_abs(expm_hermitian(h, 2.7) - ComplexMatrix::Identity(3, 3)) < 1e-14);
}

TEST_CASE("expm_hermitian: diagonal generator gives diagonal phases") {
  const double omega = 0.83, t = 4.1;
  const SpinOperatorSet half = spin_operators(0.5);
  const ComplexMatrix u = expm_hermitian(omega * half.jz, t);
  CHECK(std::abs(u(0, 0) - std::exp(Complex(0, -omega * t / 2))) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::exp(Complex(0, omega * t / 2))) < 1e-14);
  CHECK(std::abs(u(0, 1)) < 1e-14);
}

TEST_CASE("expm_hermitian: matches the Taylor-series oracle on random Hermitian input") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    ComplexMatrix m = random_matrix(4, rng);
    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    const double t = 0.9 + 0.3 * trial;
    const ComplexMatrix u = expm_hermitian(h, t);
    const ComplexMatrix oracle = expm_series(Complex(0, -t) * h);
    CHECK(max_abs(u - oracle) < 1e-9);
    CHECK(is_unitary(u, 1e-9));
    // group property through the eigendecomposition route
    const ComplexMatrix u1 = expm_hermitian(h, 0.4 * t);
    const ComplexMatrix u2 = expm_hermitian(h, 0.6 * t);
    CHECK(max_abs(u1 * u2 - u) < 1e-10);
    // trace of U^dagger U equals the dimension
    CHECK(std::abs((u.adjoint() * u).trace().real() - 4.0) < 1e-9);
  }
}

TEST_CASE("expm_hermitian: rejects non-Hermitian input") {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = Complex(1.0, 0.0);
  h(1, 0) = Complex(0.5, 0.0);
  CHECK_THROWS_AS(expm_hermitian(h, 1.0), numeric_error);
}

TEST_CASE("is_hermitian / is_unitary predicates") {
  const SpinOperatorSet ops = spin_operators(1.0);
  CHECK(is_hermitian(ops.jx));
  CHECK_FALSE(is_hermitian(ops.jplus));
  CHECK(is_unitary(expm_hermitian(ops.jy, 0.37)));
  CHECK_FALSE(is_unitary(2.0 * ComplexMatrix::Identity(3, 3)));
}
