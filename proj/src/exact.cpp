#include "spinscope/exact.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {

constexpr double kPi = std::numbers::pi;

// cached segment exponentials for one conditional-Hamiltonian pair; builds the
// full-sequence propagators incrementally, one pulse at a time
class SequencePropagator {
 public:
  SequencePropagator(const ComplexMatrix& h_plus, const ComplexMatrix& h_minus, double tau)
      : ep_tau_(expm_hermitian(h_plus, tau)),
        em_tau_(expm_hermitian(h_minus, tau)),
        ep_2tau_(expm_hermitian(h_plus, 2.0 * tau)),
        em_2tau_(expm_hermitian(h_minus, 2.0 * tau)),
        q_plus_(ep_tau_),
        q_minus_(em_tau_),
        n_(1) {}

  // extend the product from N to N+1 pulses
  void advance() {
    const bool even = (n_ % 2 == 0);
    q_plus_ = (even ? ep_2tau_ : em_2tau_) * q_plus_;
    q_minus_ = (even ? em_2tau_ : ep_2tau_) * q_minus_;
    ++n_;
  }

  int pulses() const { return n_; }

  ConditionalPropagators finish() const {
    const bool even = (n_ % 2 == 0);
    ConditionalPropagators u;
    u.u_plus = (even ? ep_tau_ : em_tau_) * q_plus_;
    u.u_minus = (even ? em_tau_ : ep_tau_) * q_minus_;
    return u;
  }

  Complex coherence() const {
    const ConditionalPropagators u = finish();
    const int d = static_cast<int>(u.u_plus.rows());
    return (u.u_minus.adjoint() * u.u_plus).trace() / static_cast<double>(d);
  }

 private:
  ComplexMatrix ep_tau_, em_tau_, ep_2tau_, em_2tau_;
  ComplexMatrix q_plus_, q_minus_;
  int n_;
};

// single spin-1/2 conditional Hamiltonians, 2x2
ConditionalHamiltonians one_spin_hamiltonians(const Eigen::Vector3d& a, double omega,
                                              double g) {
  const SpinOperatorSet half = spin_operators(0.5);
  const ComplexMatrix beta = a.x() * half.jx + a.y() * half.jy + a.z() * half.jz;
  ConditionalHamiltonians h;
  h.h_plus = omega * half.jz + 0.5 * g * beta;
  h.h_minus = omega * half.jz - 0.5 * g * beta;
  return h;
}

bool factorizes(const TargetSystem& sys) {
  const auto* ind = std::get_if<IndependentSpins>(&sys);
  return ind != nullptr && !ind->enable_dipolar;
}

// product of per-spin coherences; exact when the spins do not interact
Complex coherence_factorized(const IndependentSpins& sys, SensorKind sensor,
                             const DDSequence& seq) {
  const double g = sensor_g(sensor);
  Complex value(1.0, 0.0);
  for (int k = 0; k < sys.count(); ++k) {
    const ConditionalHamiltonians h =
        one_spin_hamiltonians(sys.hyperfine[k], sys.larmor[k], g);
    SequencePropagator prop(h.h_plus, h.h_minus, seq.tau);
    while (prop.pulses() < seq.n_pulses) prop.advance();
    value *= prop.coherence();
  }
  return value;
}

}  // namespace

ConditionalPropagators conditional_propagator(const ConditionalHamiltonians& h,
                                              const DDSequence& seq) {
  SequencePropagator prop(h.h_plus, h.h_minus, seq.tau);
  while (prop.pulses() < seq.n_pulses) prop.advance();
  return prop.finish();
}

ConditionalPropagators free_propagator(const ConditionalHamiltonians& h, double t) {
  ConditionalPropagators u;
  u.u_plus = expm_hermitian(h.h_plus, t);
  u.u_minus = expm_hermitian(h.h_minus, t);
  return u;
}

Complex coherence(const TargetSystem& sys, SensorKind sensor, const DDSequence& seq) {
  if (factorizes(sys))
    return coherence_factorized(std::get<IndependentSpins>(sys), sensor, seq);
  const ConditionalHamiltonians h = conditional_hamiltonians(sys, sensor);
  SequencePropagator prop(h.h_plus, h.h_minus, seq.tau);
  while (prop.pulses() < seq.n_pulses) prop.advance();
  return prop.coherence();
}

Complex coherence_pure_state(const TargetSystem& sys, SensorKind sensor,
                             const DDSequence& seq, int basis_index) {
  const ConditionalHamiltonians h = conditional_hamiltonians(sys, sensor);
  const int d = static_cast<int>(h.h_plus.rows());
  if (basis_index < 0 || basis_index >= d)
    throw std::invalid_argument("coherence_pure_state: basis index out of range");
  const ConditionalPropagators u = conditional_propagator(h, seq);
  return (u.u_minus.adjoint() * u.u_plus)(basis_index, basis_index);
}

CoherenceTrace tau_scan(const TargetSystem& sys, SensorKind sensor, int n_pulses,
                        double tau_min, double tau_max, int samples) {
  if (!(tau_min > 0.0) || !(tau_max > tau_min))
    throw std::invalid_argument("tau_scan: window must satisfy 0 < tau_min < tau_max");
  if (samples < 2) throw std::invalid_argument("tau_scan: need at least 2 samples");

  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseInterval;
  trace.system_digest = system_digest(sys);
  trace.sensor = sensor;
  trace.fixed_n = n_pulses;
  trace.abscissa.reserve(samples);
  trace.values.reserve(samples);
  const double step = (tau_max - tau_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double tau = tau_min + i * step;
    trace.abscissa.push_back(tau);
    trace.values.push_back(coherence(sys, sensor, DDSequence(n_pulses, tau)));
  }
  return trace;
}

CoherenceTrace pulse_scan(const TargetSystem& sys, SensorKind sensor, double tau,
                          int n_min, int n_max) {
  if (!(tau > 0.0)) throw std::invalid_argument("pulse_scan: tau must be > 0");
  if (n_min < 0 || n_max < n_min)
    throw std::invalid_argument("pulse_scan: need 0 <= n_min <= n_max");

  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseNumber;
  trace.system_digest = system_digest(sys);
  trace.sensor = sensor;
  trace.fixed_tau = tau;

  const double g = sensor_g(sensor);
  std::vector<Complex> values(static_cast<std::size_t>(n_max) + 1, Complex(1.0, 0.0));

  auto accumulate = [&](const ComplexMatrix& h_plus, const ComplexMatrix& h_minus) {
    SequencePropagator prop(h_plus, h_minus, tau);
    values[1] *= prop.coherence();
    for (int n = 2; n <= n_max; ++n) {
      prop.advance();
      values[static_cast<std::size_t>(n)] *= prop.coherence();
    }
  };

  if (n_max >= 1) {
    if (factorizes(sys)) {
      const auto& ind = std::get<IndependentSpins>(sys);
      for (int k = 0; k < ind.count(); ++k) {
        const ConditionalHamiltonians h =
            one_spin_hamiltonians(ind.hyperfine[k], ind.larmor[k], g);
        accumulate(h.h_plus, h.h_minus);
      }
    } else {
      const ConditionalHamiltonians h = conditional_hamiltonians(sys, sensor);
      accumulate(h.h_plus, h.h_minus);
    }
  }

  for (int n = n_min; n <= n_max; ++n) {
    trace.abscissa.push_back(n);
    trace.values.push_back(values[static_cast<std::size_t>(n)]);
  }
  return trace;
}

double resonant_tau(double omega0, int q) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("resonant_tau: omega0 must be > 0");
  if (q < 1) throw std::invalid_argument("resonant_tau: dip order must be >= 1");
  return kPi * (2 * q - 1) / (2.0 * omega0);
}

}  // namespace spinscope
