#pragma once

#include <vector>

namespace spinscope {

// inputs for the product-of-cosines dip formulas; g = 1 for a spin-1/2 sensor,
// g = 2 when sensing on the |+1> <-> |-1> double transition
struct DipParameters {
  double omega0 = 1.0;
  std::vector<double> couplings;  // transverse couplings A_perp >= 0
  double g = 1.0;

  // the closed forms degrade once couplings stop being small against omega0
  bool weak_coupling_ok() const;
};

// first-harmonic coherence at arbitrary pulse interval,
// 1 - 2 A^2/(pi^2 wR^2) sin^2(N tau wR) with wR = sqrt((A/pi)^2 + (w0 - wT)^2)
double single_spin_coherence(double a_perp, double omega0, double n, double tau);

// resonant dip: product over spins of cos(g A_perp N / omega0)
double dip_multi(const DipParameters& params, double n);

// same product, at an arbitrary filter value F instead of the resonant 2N
double coherence_general(const DipParameters& params, double f_value);

// Gaussian-noise coherence exp(-sum (g A)^2 F^2 / (8 w0^2)) and its resonant form
double semiclassical_coherence(const DipParameters& params, double f_value);
double semiclassical_dip(const DipParameters& params, double n);

// two independent spin-1/2 targets vs a correlated three-level target with
// matched noise spectra; resonant-dip and two-filter full-time forms
double type_ii_dip(double lambda, double omega_a, double n);
double type_v_dip(double lambda_v, double omega_a, double n);
double type_ii_coherence(double lambda, double omega_a, double omega_b, double f_a, double f_b);
double type_v_coherence(double lambda_v, double omega_a, double omega_b, double f_a, double f_b);

// spin-J ladder resonant with the |m> <-> |m+1> transition
double ladder_transition_coupling(double j, double m, double lambda);  // lambda_m
double ladder_dip(double j, double m, double lambda, double omega_m, double n);
double ladder_dip_min(double j);  // (2J-3)/(2J+1)
double ladder_char_pulse_number(double j, double m, double lambda, double omega_m);

// d-level cluster resonant with one transition of operator amplitude |beta_mn|
double generic_cluster_dip(double beta_mn_abs, double omega_mn, int d, double n);
double generic_cluster_dip_min(int d);  // (d-4)/d

}  // namespace spinscope
