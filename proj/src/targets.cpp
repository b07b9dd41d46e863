#include "spinscope/targets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {

constexpr int kMaxIndependentSpins = 10;

// embed a single-spin operator at slot k of an M-spin register
ComplexMatrix embed(const ComplexMatrix& op, int k, int m) {
  std::vector<ComplexMatrix> factors;
  factors.reserve(m);
  for (int i = 0; i < m; ++i)
    factors.push_back(i == k ? op : ComplexMatrix::Identity(2, 2));
  return kron_chain(factors);
}

struct SpinRegister {
  std::vector<ComplexMatrix> x, y, z;
  explicit SpinRegister(int m) {
    const SpinOperatorSet half = spin_operators(0.5);
    for (int k = 0; k < m; ++k) {
      x.push_back(embed(half.jx, k, m));
      y.push_back(embed(half.jy, k, m));
      z.push_back(embed(half.jz, k, m));
    }
  }
  ComplexMatrix dot(int k, const Eigen::Vector3d& v) const {
    return v.x() * x[k] + v.y() * y[k] + v.z() * z[k];
  }
};

SystemOperators build_independent(const IndependentSpins& sys) {
  const int m = sys.count();
  if (m < 1) throw std::invalid_argument("IndependentSpins: no spins");
  if (m > kMaxIndependentSpins)
    throw numeric_error("IndependentSpins: spin count exceeds the dimension guard");
  if (static_cast<int>(sys.larmor.size()) != m)
    throw std::invalid_argument("IndependentSpins: larmor list size mismatch");

  const SpinRegister reg(m);
  const int dim = 1 << m;
  SystemOperators ops;
  ops.h0 = ComplexMatrix::Zero(dim, dim);
  ops.beta = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < m; ++k) {
    ops.h0 += sys.larmor[k] * reg.z[k];
    ops.beta += reg.dot(k, sys.hyperfine[k]);
  }
  if (sys.enable_dipolar) {
    for (const auto& pair : sys.dipolar) {
      if (pair.i < 0 || pair.j < 0 || pair.i >= m || pair.j >= m || pair.i == pair.j)
        throw std::invalid_argument("IndependentSpins: bad dipolar pair indices");
      const Eigen::Vector3d r = pair.r_hat.normalized();
      const ComplexMatrix ir_i = reg.dot(pair.i, r);
      const ComplexMatrix ir_j = reg.dot(pair.j, r);
      ComplexMatrix dot_ij = reg.x[pair.i] * reg.x[pair.j] +
                             reg.y[pair.i] * reg.y[pair.j] +
                             reg.z[pair.i] * reg.z[pair.j];
      ops.h0 += pair.d * (dot_ij - 3.0 * ir_i * ir_j);
    }
  }
  return ops;
}

SystemOperators build_ladder(const SpinJLadder& sys) {
  const SpinOperatorSet ops_j = spin_operators(sys.j);
  const int dim = ops_j.dim();
  if (static_cast<int>(sys.energies.size()) != dim)
    throw std::invalid_argument("SpinJLadder: energies size must be 2J+1");
  SystemOperators ops;
  ops.h0 = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) ops.h0(i, i) = sys.energies[i];
  ops.beta = sys.lambda * ops_j.jx;
  return ops;
}

SystemOperators build_pair(const CoupledPair& sys) {
  const SpinRegister reg(2);
  SystemOperators ops;
  ops.h0 = sys.omega_a * reg.z[0] + sys.omega_b * reg.z[1] +
           2.0 * sys.mu * reg.z[0] * reg.z[1];
  ops.beta = sys.lambda * (reg.x[0] + reg.x[1]);
  return ops;
}

SystemOperators build_generic(const GenericCluster& sys) {
  const int dim = static_cast<int>(sys.energies.size());
  if (dim < 1) throw std::invalid_argument("GenericCluster: empty energy list");
  if (sys.beta.rows() != dim || sys.beta.cols() != dim)
    throw std::invalid_argument("GenericCluster: beta dimension mismatch");
  if (!is_hermitian(sys.beta, 1e-10))
    throw numeric_error("GenericCluster: beta is not Hermitian within tolerance");
  SystemOperators ops;
  ops.h0 = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) ops.h0(i, i) = sys.energies[i];
  ops.beta = sys.beta;
  return ops;
}

}  // namespace

IndependentSpins IndependentSpins::uniform(std::vector<Eigen::Vector3d> vectors,
                                           double omega0) {
  IndependentSpins sys;
  sys.larmor.assign(vectors.size(), omega0);
  sys.hyperfine = std::move(vectors);
  return sys;
}

int hilbert_dim(const TargetSystem& sys) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IndependentSpins>) return 1 << s.count();
        if constexpr (std::is_same_v<T, SpinJLadder>)
          return static_cast<int>(std::lround(2.0 * s.j)) + 1;
        if constexpr (std::is_same_v<T, CoupledPair>) return 4;
        if constexpr (std::is_same_v<T, GenericCluster>)
          return static_cast<int>(s.energies.size());
      },
      sys);
}

std::string system_digest(const TargetSystem& sys) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IndependentSpins>)
          out << "independent_spins(M=" << s.count()
              << ", dipolar=" << (s.enable_dipolar ? "on" : "off") << ")";
        if constexpr (std::is_same_v<T, SpinJLadder>)
          out << "ladder(J=" << s.j << ", lambda=" << s.lambda << ")";
        if constexpr (std::is_same_v<T, CoupledPair>)
          out << "coupled_pair(lambda=" << s.lambda << ", mu=" << s.mu << ")";
        if constexpr (std::is_same_v<T, GenericCluster>)
          out << "generic_cluster(d=" << s.energies.size() << ")";
      },
      sys);
  return out.str();
}

TargetSystem make_type_ii(double lambda, double omega_a, double omega_b) {
  IndependentSpins sys;
  sys.hyperfine = {Eigen::Vector3d(lambda, 0, 0), Eigen::Vector3d(lambda, 0, 0)};
  sys.larmor = {omega_a, omega_b};
  return sys;
}

TargetSystem make_type_v(double lambda_v, double omega_a, double omega_b) {
  // three-level ladder with transition energies omega_a (upper) and omega_b (lower)
  SpinJLadder sys;
  sys.j = 1.0;
  sys.energies = {omega_a, 0.0, omega_b};
  sys.lambda = lambda_v;
  return sys;
}

SystemOperators system_operators(const TargetSystem& sys) {
  return std::visit(
      [](const auto& s) -> SystemOperators {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IndependentSpins>) return build_independent(s);
        if constexpr (std::is_same_v<T, SpinJLadder>) return build_ladder(s);
        if constexpr (std::is_same_v<T, CoupledPair>) return build_pair(s);
        if constexpr (std::is_same_v<T, GenericCluster>) return build_generic(s);
      },
      sys);
}

ConditionalHamiltonians conditional_hamiltonians(const TargetSystem& sys,
                                                 SensorKind sensor) {
  const SystemOperators ops = system_operators(sys);
  const double half_g = 0.5 * sensor_g(sensor);
  ConditionalHamiltonians h;
  h.h_plus = ops.h0 + half_g * ops.beta;
  h.h_minus = ops.h0 - half_g * ops.beta;
  return h;
}

}  // namespace spinscope
