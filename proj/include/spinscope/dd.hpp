#pragma once

#include <complex>
#include <vector>

namespace spinscope {

// CPMG-N timing: pi pulses at t_p = (2p-1)*tau, total evolution time 2*N*tau
struct DDSequence {
  int n_pulses;
  double tau;

  DDSequence(int n, double tau_half_interval);
  double total_time() const { return 2.0 * n_pulses * tau; }
};

std::vector<double> pulse_times(const DDSequence& seq);

// modulation sign at time t: +1 before the first pulse, flipping at every pulse
int modulation_value(const DDSequence& seq, double t);

// amplitude of the (2q-1)-th harmonic of the modulation, 4*(-1)^(q+1)/((2q-1)*pi)
double fourier_coefficient(int q);

struct FilterEvaluation {
  double f_value = 0;  // F(omega, t) >= 0
  double phase = 0;    // xi in (-pi, pi]
  double chi2 = 0;     // second-order phase functional chi2(omega, t)
};

// closed-form CPMG filter value; removable singularities evaluated by limit
double filter_value(double omega, const DDSequence& seq);

// complex modulated phase kernel omega * integral of f(t') e^{i omega t'} dt'
std::complex<double> filter_integral(double omega, const DDSequence& seq);

// second-order functional, piecewise-analytic over the pulse segments
double chi2_value(double omega, const DDSequence& seq);

FilterEvaluation filter_function(double omega, const DDSequence& seq);

}  // namespace spinscope
