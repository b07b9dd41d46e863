#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "spinscope/exact.hpp"

namespace spinscope {

struct ZeroCrossing {
  double n_frac = 0.0;  // interpolated crossing position
  double slope = 0.0;   // local dL/dN across the bracketing pair
};

// sign changes of Re L on an integer-sampled pulse-number trace
std::vector<ZeroCrossing> find_zeros(const CoherenceTrace& trace);

struct CouplingEstimate {
  double a_perp = 0.0;
  double std_err = 0.0;
  std::vector<double> claimed_zeros;  // crossings attributed to this spin
};

struct FingerprintReport {
  std::vector<CouplingEstimate> couplings;  // sorted descending by a_perp
  int n_detected = 0;
  double threshold = 0.0;  // weakest detectable coupling given n_max
  std::vector<std::pair<int, int>> unresolved_pairs;  // near-coincident periods
  double dip_min = 1.0;                   // filled by fingerprint_report
  std::optional<int> inferred_dimension;  // filled by fingerprint_report
};

// greedy peeling: the smallest unexplained crossing opens a new spin, whose
// predicted odd-multiple crossings are then claimed within a matching window
FingerprintReport peel_couplings(std::vector<ZeroCrossing> zeros, double omega0, double g,
                                 double n_max);

// find_zeros + peel_couplings + dip statistics on one trace
FingerprintReport fingerprint_report(const CoherenceTrace& trace, double omega0, double g);

struct CorrelationClass {
  double dip_min = 1.0;
  int dimension = 0;   // d with discrete minimum (d-4)/d nearest the observed dip
  double confidence = 0.0;  // separation from neighbouring levels in noise units
};

CorrelationClass classify_correlation(const CoherenceTrace& trace);

enum class SplitRegime { Split, Degenerate, Indeterminate };

struct SplittingReport {
  bool split = false;
  SplitRegime regime = SplitRegime::Indeterminate;
  double dip_min_shifted = 1.0;    // trace resonant with the shifted transition
  double dip_min_reference = 1.0;  // trace resonant with the bare transition
};

// split pair (d = 4, dip min near 0) vs degenerate transitions (dip min near -1)
SplittingReport detect_splitting(const CoherenceTrace& at_shifted_frequency,
                                 const CoherenceTrace& at_bare_frequency);

}  // namespace spinscope
