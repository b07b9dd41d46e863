#include "spinscope/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinscope {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool DipParameters::weak_coupling_ok() const {
  for (double a : couplings)
    if (a > omega0 / 10.0) return false;
  return true;
}

double single_spin_coherence(double a_perp, double omega0, double n, double tau) {
  if (a_perp < 0.0) throw std::invalid_argument("single_spin_coherence: A_perp < 0");
  if (!(omega0 > 0.0)) throw std::invalid_argument("single_spin_coherence: omega0 <= 0");
  if (a_perp == 0.0) return 1.0;
  const double omega_t = kPi / (2.0 * tau);
  const double detune = omega0 - omega_t;
  const double rabi2 = (a_perp / kPi) * (a_perp / kPi) + detune * detune;
  const double s = std::sin(n * tau * std::sqrt(rabi2));
  return 1.0 - 2.0 * a_perp * a_perp / (kPi * kPi * rabi2) * s * s;
}

double dip_multi(const DipParameters& params, double n) {
  double value = 1.0;
  for (double a : params.couplings) value *= std::cos(params.g * a * n / params.omega0);
  return value;
}

double coherence_general(const DipParameters& params, double f_value) {
  double value = 1.0;
  for (double a : params.couplings)
    value *= std::cos(params.g * a * f_value / (2.0 * params.omega0));
  return value;
}

double semiclassical_coherence(const DipParameters& params, double f_value) {
  double exponent = 0.0;
  for (double a : params.couplings) {
    const double ga = params.g * a;
    exponent += ga * ga * f_value * f_value / (8.0 * params.omega0 * params.omega0);
  }
  return std::exp(-exponent);
}

double semiclassical_dip(const DipParameters& params, double n) {
  return semiclassical_coherence(params, 2.0 * n);
}

double type_ii_dip(double lambda, double omega_a, double n) {
  return std::cos(lambda * n / omega_a);
}

double type_v_dip(double lambda_v, double omega_a, double n) {
  return (1.0 + 2.0 * std::cos(std::sqrt(2.0) * lambda_v * n / omega_a)) / 3.0;
}

double type_ii_coherence(double lambda, double omega_a, double omega_b, double f_a,
                         double f_b) {
  return std::cos(lambda * f_a / (2.0 * omega_a)) * std::cos(lambda * f_b / (2.0 * omega_b));
}

double type_v_coherence(double lambda_v, double omega_a, double omega_b, double f_a,
                        double f_b) {
  const double arg = lambda_v * std::sqrt(f_a * f_a / (2.0 * omega_a * omega_a) +
                                          f_b * f_b / (2.0 * omega_b * omega_b));
  return (1.0 + 2.0 * std::cos(arg)) / 3.0;
}

double ladder_transition_coupling(double j, double m, double lambda) {
  if (m < -j - 1e-9 || m + 1.0 > j + 1e-9)
    throw std::invalid_argument("ladder: m out of range for |m> <-> |m+1>");
  return lambda * std::sqrt((j - m) * (j + m + 1.0)) / 2.0;
}

double ladder_dip(double j, double m, double lambda, double omega_m, double n) {
  const double lam_m = ladder_transition_coupling(j, m, lambda);
  const double dim = 2.0 * j + 1.0;
  return (2.0 * j - 1.0) / dim + (2.0 / dim) * std::cos(2.0 * lam_m * n / omega_m);
}

double ladder_dip_min(double j) { return (2.0 * j - 3.0) / (2.0 * j + 1.0); }

double ladder_char_pulse_number(double j, double m, double lambda, double omega_m) {
  return kPi * omega_m / (2.0 * ladder_transition_coupling(j, m, lambda));
}

double generic_cluster_dip(double beta_mn_abs, double omega_mn, int d, double n) {
  if (d < 2) throw std::invalid_argument("generic_cluster_dip: d must be >= 2");
  if (!(omega_mn > 0.0)) throw std::invalid_argument("generic_cluster_dip: omega_mn <= 0");
  return (d - 2.0 + 2.0 * std::cos(2.0 * beta_mn_abs * n / omega_mn)) / d;
}

double generic_cluster_dip_min(int d) { return (d - 4.0) / d; }

}  // namespace spinscope
