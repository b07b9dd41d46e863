#include "spinscope/dd.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinscope {

namespace {
constexpr double kPi = std::numbers::pi;
}

DDSequence::DDSequence(int n, double tau_half_interval)
    : n_pulses(n), tau(tau_half_interval) {
  if (n < 1) throw std::invalid_argument("DDSequence: pulse count must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("DDSequence: tau must be > 0");
}

std::vector<double> pulse_times(const DDSequence& seq) {
  std::vector<double> times(seq.n_pulses);
  for (int p = 1; p <= seq.n_pulses; ++p) times[p - 1] = (2 * p - 1) * seq.tau;
  return times;
}

int modulation_value(const DDSequence& seq, double t) {
  const double total = seq.total_time();
  if (t < 0.0 || t > total)
    throw std::invalid_argument("modulation_value: t outside [0, 2*N*tau]");
  if (t >= total) return (seq.n_pulses % 2 == 0) ? 1 : -1;
  // pulses flipped before t: count of p with (2p-1)*tau <= t
  const int flipped = static_cast<int>(std::floor((t / seq.tau + 1.0) / 2.0));
  const int clamped = std::min(flipped, seq.n_pulses);
  return (clamped % 2 == 0) ? 1 : -1;
}

double fourier_coefficient(int q) {
  if (q < 1) throw std::invalid_argument("fourier_coefficient: q must be >= 1");
  const double sign = (q % 2 == 1) ? 1.0 : -1.0;
  return sign * 4.0 / ((2 * q - 1) * kPi);
}

std::complex<double> filter_integral(double omega, const DDSequence& seq) {
  // omega * int_0^t f e^{i omega t'} dt' = sum_p (-1)^p (e^{i w t_{p+1}} - e^{i w t_p}) / i
  const int n = seq.n_pulses;
  const double total = seq.total_time();
  std::complex<double> sum(0.0, 0.0);
  double t_lo = 0.0;
  for (int p = 0; p <= n; ++p) {
    const double t_hi = (p == n) ? total : (2 * p + 1) * seq.tau;
    const std::complex<double> seg =
        std::exp(std::complex<double>(0.0, omega * t_hi)) -
        std::exp(std::complex<double>(0.0, omega * t_lo));
    sum += (p % 2 == 0) ? seg : -seg;
    t_lo = t_hi;
  }
  return sum * std::complex<double>(0.0, -1.0);
}

double filter_value(double omega, const DDSequence& seq) {
  const double w = std::abs(omega);  // F is even in omega
  const int n = seq.n_pulses;
  const double x = w * seq.tau;  // = omega * t / (2N)
  const double c = std::cos(x);

  // cos(x) = 0 marks the resonance points, where the quotient has a finite
  // limit; the window balances cancellation in the direct quotient against
  // rounding in the reduced form, keeping relative error near 1e-10 throughout
  if (std::abs(c) < 1e-6) {
    const double u = std::remainder(x - 0.5 * kPi, kPi);
    const double ratio = (u == 0.0) ? n : std::sin(n * u) / std::sin(u);
    return 2.0 * (1.0 - c) * std::abs(ratio);
  }

  const double head = (n % 2 == 1) ? std::cos(n * x) : std::sin(n * x);
  const double s = std::sin(0.5 * x);
  return 4.0 * s * s * std::abs(head / c);
}

double chi2_value(double omega, const DDSequence& seq) {
  if (omega < 0.0) throw std::invalid_argument("chi2_value: omega must be >= 0");
  if (omega == 0.0) return 0.0;

  const int n = seq.n_pulses;
  const double total = seq.total_time();
  std::vector<double> edge(n + 2);
  edge[0] = 0.0;
  for (int p = 1; p <= n; ++p) edge[p] = (2 * p - 1) * seq.tau;
  edge[n + 1] = total;

  double acc = 0.0;
  for (int a = 0; a <= n; ++a) {
    const double da = edge[a + 1] - edge[a];
    acc += omega * da - std::sin(omega * da);  // same-segment triangle
    const double sa = (a % 2 == 0) ? 1.0 : -1.0;
    for (int b = 0; b < a; ++b) {
      const double sb = (b % 2 == 0) ? 1.0 : -1.0;
      const double block =
          std::sin(omega * (edge[a + 1] - edge[b + 1])) -
          std::sin(omega * (edge[a] - edge[b + 1])) -
          std::sin(omega * (edge[a + 1] - edge[b])) +
          std::sin(omega * (edge[a] - edge[b]));
      acc += sa * sb * block;
    }
  }
  return acc;
}

FilterEvaluation filter_function(double omega, const DDSequence& seq) {
  if (omega < 0.0) omega = -omega;
  FilterEvaluation eval;
  eval.f_value = filter_value(omega, seq);
  const std::complex<double> integral = filter_integral(omega, seq);
  eval.phase = (std::abs(integral) > 1e-300) ? std::arg(integral) : 0.0;
  eval.chi2 = chi2_value(omega, seq);
  return eval;
}

}  // namespace spinscope
