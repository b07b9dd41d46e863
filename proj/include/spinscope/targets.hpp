#pragma once

#include <string>
#include <variant>
#include <vector>

#include "spinscope/linalg.hpp"

namespace spinscope {

// which sensor transition records the which-way phase; the NV double
// transition couples twice as strongly as a spin-1/2 sensor
enum class SensorKind { SpinHalf, NvPlusMinus };

inline double sensor_g(SensorKind kind) {
  return kind == SensorKind::NvPlusMinus ? 2.0 : 1.0;
}

inline const char* sensor_name(SensorKind kind) {
  return kind == SensorKind::NvPlusMinus ? "nv_pm1" : "spin_half";
}

// M spin-1/2 targets with per-spin hyperfine vectors and Larmor frequencies;
// pairwise dipolar couplings are opt-in and off by default
struct IndependentSpins {
  struct DipolarCoupling {
    int i = 0, j = 0;
    double d = 0.0;               // coupling prefactor, angular frequency
    Eigen::Vector3d r_hat{0, 0, 1};  // unit separation vector
  };

  std::vector<Eigen::Vector3d> hyperfine;  // A_k, angular frequency units
  std::vector<double> larmor;              // omega_k per spin
  std::vector<DipolarCoupling> dipolar;
  bool enable_dipolar = false;

  static IndependentSpins uniform(std::vector<Eigen::Vector3d> vectors, double omega0);
  int count() const { return static_cast<int>(hyperfine.size()); }
};

// spin-J (or (2J+1)-level strongly bonded cluster) coupled through Jx;
// energies indexed like the jz basis, m = J, J-1, ..., -J
struct SpinJLadder {
  double j = 0.5;
  std::vector<double> energies;
  double lambda = 0.0;
};

// two spin-1/2 nuclei with an Ising intra-pair coupling 2*mu*IzA*IzB
struct CoupledPair {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
};

// arbitrary d-level cluster: diagonal free energies plus a Hermitian noise operator
struct GenericCluster {
  std::vector<double> energies;
  ComplexMatrix beta;
};

using TargetSystem = std::variant<IndependentSpins, SpinJLadder, CoupledPair, GenericCluster>;

int hilbert_dim(const TargetSystem& sys);
std::string system_digest(const TargetSystem& sys);

// convenience builders for the matched-spectrum comparison systems
TargetSystem make_type_ii(double lambda, double omega_a, double omega_b);
TargetSystem make_type_v(double lambda_v, double omega_a, double omega_b);

struct ConditionalHamiltonians {
  ComplexMatrix h_plus, h_minus;  // H0 +- (g/2) beta
};

ConditionalHamiltonians conditional_hamiltonians(const TargetSystem& sys, SensorKind sensor);

// free Hamiltonian and noise operator separately (H0, beta); H_pm = H0 +- (g/2) beta
struct SystemOperators {
  ComplexMatrix h0, beta;
};
SystemOperators system_operators(const TargetSystem& sys);

}  // namespace spinscope
