#pragma once

#include <complex>
#include <string>
#include <vector>

#include "spinscope/dd.hpp"
#include "spinscope/targets.hpp"

namespace spinscope {

struct ConditionalPropagators {
  ComplexMatrix u_plus, u_minus;
};

// segment-product propagators over the full CPMG sequence; the noise sign
// alternates starting with + (for the u_plus lane) before the first pulse
ConditionalPropagators conditional_propagator(const ConditionalHamiltonians& h,
                                              const DDSequence& seq);

// degenerate no-pulse limit: single exponentials over time t
ConditionalPropagators free_propagator(const ConditionalHamiltonians& h, double t);

// sensor coherence Tr[U_minus^dagger U_plus] / d for the maximally mixed target state
Complex coherence(const TargetSystem& sys, SensorKind sensor, const DDSequence& seq);

// same, with the target prepared in a basis state of H0 instead of maximally mixed
Complex coherence_pure_state(const TargetSystem& sys, SensorKind sensor,
                             const DDSequence& seq, int basis_index);

enum class TraceAxis { PulseNumber, PulseInterval };

struct CoherenceTrace {
  TraceAxis axis = TraceAxis::PulseNumber;
  std::vector<double> abscissa;
  std::vector<Complex> values;
  std::string system_digest;
  SensorKind sensor = SensorKind::SpinHalf;
  double fixed_tau = 0.0;  // set for PulseNumber scans
  int fixed_n = 0;         // set for PulseInterval scans
};

// coherence vs pulse interval at fixed N; uniformly sampled window
CoherenceTrace tau_scan(const TargetSystem& sys, SensorKind sensor, int n_pulses,
                        double tau_min, double tau_max, int samples = 400);

// coherence at every integer N in [n_min, n_max] at fixed tau; N = 0 reports 1
CoherenceTrace pulse_scan(const TargetSystem& sys, SensorKind sensor, double tau,
                          int n_min, int n_max);

// pulse interval of the q-th resonant dip, tau = pi (2q-1) / (2 omega0)
double resonant_tau(double omega0, int q);

}  // namespace spinscope
