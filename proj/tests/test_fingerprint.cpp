#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinscope/analytic.hpp"
#include "spinscope/errors.hpp"
#include "spinscope/fingerprint.hpp"

using namespace spinscope;

namespace {

constexpr double kPi = std::numbers::pi;

CoherenceTrace synthetic_trace(const std::vector<double>& couplings, double omega0,
                               int n_max, double g = 1.0, unsigned noise_seed = 0,
                               double noise_sigma = 0.0) {
  DipParameters params;
  params.omega0 = omega0;
  params.couplings = couplings;
  params.g = g;
  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseNumber;
  trace.system_digest = "synthetic";
  std::mt19937 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  for (int n = 0; n <= n_max; ++n) {
    trace.abscissa.push_back(n);
    double value = dip_multi(params, n);
    if (noise_sigma > 0.0) value += gauss(rng);
    trace.values.push_back(Complex(value, 0.0));
  }
  return trace;
}

CoherenceTrace ladder_trace(double j, double lambda, double omega, int n_max,
                            unsigned noise_seed = 0, double noise_sigma = 0.0) {
  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseNumber;
  trace.system_digest = "ladder";
  std::mt19937 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  for (int n = 0; n <= n_max; ++n) {
    trace.abscissa.push_back(n);
    double value = ladder_dip(j, j - 1.0, lambda, omega, n);
    if (noise_sigma > 0.0) value += gauss(rng);
    trace.values.push_back(Complex(value, 0.0));
  }
  return trace;
}

}  // namespace

TEST_CASE("find_zeros: cosine crossings by linear interpolation") {
  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseNumber;
  for (int n = 1; n <= 100; ++n) {
    trace.abscissa.push_back(n);
    trace.values.push_back(Complex(std::cos(0.05 * n), 0.0));
  }
  const auto zeros = find_zeros(trace);
  REQUIRE(zeros.size() == 2);
  CHECK(std::abs(zeros[0].n_frac - kPi / 0.1) < 0.05);        // 31.42
  CHECK(std::abs(zeros[1].n_frac - 3.0 * kPi / 0.1) < 0.05);  // 94.25
  CHECK(zeros[0].slope < 0.0);
  CHECK(zeros[1].slope > 0.0);
}

TEST_CASE("find_zeros: constant trace yields nothing; short trace rejected") {
  CoherenceTrace flat;
  flat.axis = TraceAxis::PulseNumber;
  for (int n = 0; n <= 30; ++n) {
    flat.abscissa.push_back(n);
    flat.values.push_back(Complex(1.0, 0.0));
  }
  CHECK(find_zeros(flat).empty());

  CoherenceTrace tiny;
  tiny.axis = TraceAxis::PulseNumber;
  tiny.abscissa = {0};
  tiny.values = {Complex(1.0, 0.0)};
  CHECK_THROWS_AS(find_zeros(tiny), std::invalid_argument);
}

TEST_CASE("find_zeros: requires consecutive integer sampling") {
  CoherenceTrace bad;
  bad.axis = TraceAxis::PulseNumber;
  bad.abscissa = {0, 2, 4};
  bad.values = {Complex(1, 0), Complex(-1, 0), Complex(1, 0)};
  CHECK_THROWS_AS(find_zeros(bad), std::invalid_argument);
}

TEST_CASE("peel_couplings: single cosine with odd-multiple crossings") {
  const double omega0 = 0.1, a_perp = 0.004;
  const CoherenceTrace trace = synthetic_trace({a_perp}, omega0, 260);
  const auto report = peel_couplings(find_zeros(trace), omega0, 1.0, 260);
  REQUIRE(report.n_detected == 1);
  CHECK(report.couplings[0].a_perp == doctest::Approx(a_perp).epsilon(0.01));
  CHECK(report.couplings[0].claimed_zeros.size() >= 3);  // x, 3x, 5x
  CHECK(report.threshold == doctest::Approx(kPi * omega0 / (2.0 * 260)));
}

TEST_CASE("peel_couplings: three couplings in ratio 5:3:2 recovered within 2%") {
  const double omega0 = 0.1;
  const std::vector<double> truth{0.005, 0.003, 0.002};
  const CoherenceTrace trace = synthetic_trace(truth, omega0, 240);
  const auto report = peel_couplings(find_zeros(trace), omega0, 1.0, 240);
  REQUIRE(report.n_detected == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(report.couplings[k].a_perp - truth[k]) / truth[k] <= 0.02);
  }
  CHECK(report.unresolved_pairs.empty());
}

TEST_CASE("peel_couplings: sensor multiplier folds into estimates and threshold") {
  const double omega0 = 0.1, a_perp = 0.003;
  const CoherenceTrace trace = synthetic_trace({a_perp}, omega0, 120, 2.0);
  const auto report = peel_couplings(find_zeros(trace), omega0, 2.0, 120);
  REQUIRE(report.n_detected == 1);
  CHECK(report.couplings[0].a_perp == doctest::Approx(a_perp).epsilon(0.01));
  CHECK(report.threshold == doctest::Approx(kPi * omega0 / (2.0 * 2.0 * 120)));
}

TEST_CASE("peel_couplings: round trip over random well-separated coupling sets") {
  std::mt19937 rng(99);
  const double omega0 = 0.1;
  for (int trial = 0; trial < 12; ++trial) {
    std::uniform_int_distribution<int> m_dist(1, 4);
    const int m = m_dist(rng);
    std::vector<double> couplings;
    const double n_max = 400.0;
    int attempts = 0;
    while (static_cast<int>(couplings.size()) < m && attempts < 200) {
      ++attempts;
      std::uniform_real_distribution<double> c_dist(kPi * omega0 / (2.0 * n_max),
                                                    omega0 / 20.0);
      const double candidate = c_dist(rng);
      bool separated = true;
      for (double existing : couplings) {
        const double ratio = candidate / existing;
        if (ratio > 0.9 && ratio < 1.1) separated = false;
      }
      if (separated) couplings.push_back(candidate);
    }
    const CoherenceTrace trace = synthetic_trace(couplings, omega0,
                                                 static_cast<int>(n_max));
    const auto report =
        peel_couplings(find_zeros(trace), omega0, 1.0, n_max);
    REQUIRE(report.n_detected == static_cast<int>(couplings.size()));
    std::sort(couplings.rbegin(), couplings.rend());
    for (std::size_t k = 0; k < couplings.size(); ++k)
      CHECK(std::abs(report.couplings[k].a_perp - couplings[k]) / couplings[k] <= 0.02);
  }
}

TEST_CASE("peel_couplings: dropping the weakest spin leaves the others nearly unchanged") {
  const double omega0 = 0.1;
  const std::vector<double> full{0.005, 0.003, 0.002};
  const std::vector<double> reduced{0.005, 0.003};
  const auto report_full =
      peel_couplings(find_zeros(synthetic_trace(full, omega0, 240)), omega0, 1.0, 240);
  const auto report_reduced =
      peel_couplings(find_zeros(synthetic_trace(reduced, omega0, 240)), omega0, 1.0, 240);
  REQUIRE(report_full.n_detected == 3);
  REQUIRE(report_reduced.n_detected == 2);
  for (int k = 0; k < 2; ++k) {
    const double change = std::abs(report_full.couplings[k].a_perp -
                                   report_reduced.couplings[k].a_perp) /
                          report_reduced.couplings[k].a_perp;
    CHECK(change <= 0.005);
  }
}

TEST_CASE("peel_couplings: near-coincident couplings are flagged, not merged silently") {
  const double omega0 = 0.1;
  // periods within 10% of each other
  const CoherenceTrace trace = synthetic_trace({0.0040, 0.0038}, omega0, 160);
  const auto report = peel_couplings(find_zeros(trace), omega0, 1.0, 160);
  CHECK((report.n_detected < 2 || !report.unresolved_pairs.empty()));
}

TEST_CASE("peel_couplings: residual crossings beyond the spin cap fail loudly") {
  // twenty crossings packed between N = 10 and 14 cannot be odd multiples of
  // one another, so each opens a new spin until the cap trips
  std::vector<ZeroCrossing> zeros;
  for (int i = 0; i < 20; ++i) zeros.push_back({10.0 + 0.2 * i, -0.1});
  CHECK_THROWS_AS(peel_couplings(zeros, 0.1, 1.0, 15.0), analysis_error);
}

TEST_CASE("fingerprint_report: dip statistics attached to the peeled couplings") {
  const double omega0 = 0.1;
  const CoherenceTrace trace = synthetic_trace({0.004}, omega0, 120);
  const auto report = fingerprint_report(trace, omega0, 1.0);
  CHECK(report.n_detected == 1);
  CHECK(report.dip_min == doctest::Approx(-1.0).epsilon(0.01));
  REQUIRE(report.inferred_dimension.has_value());
  CHECK(*report.inferred_dimension == 2);
}

TEST_CASE("classify_correlation: exact discrete dimensions for analytic ladder traces") {
  const double omega = 0.1, lambda = 0.0025;
  for (double j : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    const double n_min = ladder_char_pulse_number(j, j - 1.0, lambda, omega);
    const CoherenceTrace trace =
        ladder_trace(j, lambda, omega, static_cast<int>(2.2 * n_min));
    const CorrelationClass result = classify_correlation(trace);
    CHECK(result.dimension == static_cast<int>(std::lround(2.0 * j + 1.0)));
    CHECK(result.dip_min == doctest::Approx(ladder_dip_min(j)).epsilon(0.02));
  }
}

TEST_CASE("classify_correlation: stable under sample noise of std 0.05 for d <= 5") {
  const double omega = 0.1, lambda = 0.0025;
  for (double j : {0.5, 1.0, 1.5, 2.0}) {
    const double n_min = ladder_char_pulse_number(j, j - 1.0, lambda, omega);
    int votes_correct = 0;
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const CoherenceTrace trace =
          ladder_trace(j, lambda, omega, static_cast<int>(2.2 * n_min), seed, 0.05);
      const CorrelationClass result = classify_correlation(trace);
      if (result.dimension == static_cast<int>(std::lround(2.0 * j + 1.0))) ++votes_correct;
    }
    CHECK(votes_correct == 5);
  }
}

TEST_CASE("classify_correlation: refuses a dipless trace") {
  CoherenceTrace flat;
  flat.axis = TraceAxis::PulseNumber;
  for (int n = 0; n <= 40; ++n) {
    flat.abscissa.push_back(n);
    flat.values.push_back(Complex(0.999, 0.0));
  }
  CHECK_THROWS_AS(classify_correlation(flat), analysis_error);
}

TEST_CASE("detect_splitting: split pair pins the dip at zero, degenerate at minus one") {
  CoherenceTrace split_trace, degen_trace;
  split_trace.axis = TraceAxis::PulseNumber;
  degen_trace.axis = TraceAxis::PulseNumber;
  const double omega_shift = 0.13, omega_bare = 0.11, lambda = 0.005;
  for (int n = 0; n <= 180; ++n) {
    split_trace.abscissa.push_back(n);
    split_trace.values.push_back(
        Complex(generic_cluster_dip(lambda / 2.0, omega_shift, 4, n), 0.0));
    degen_trace.abscissa.push_back(n);
    degen_trace.values.push_back(Complex(type_ii_dip(lambda, omega_bare, n), 0.0));
  }
  const SplittingReport report = detect_splitting(split_trace, degen_trace);
  CHECK(report.split);
  CHECK(report.regime == SplitRegime::Split);
  CHECK(report.dip_min_shifted == doctest::Approx(0.0).epsilon(0.02));

  const SplittingReport swapped = detect_splitting(degen_trace, split_trace);
  CHECK_FALSE(swapped.split);
  CHECK(swapped.regime == SplitRegime::Degenerate);

  // a dip parked between the discrete levels stays indeterminate
  CoherenceTrace midway;
  midway.axis = TraceAxis::PulseNumber;
  for (int n = 0; n <= 180; ++n) {
    midway.abscissa.push_back(n);
    midway.values.push_back(Complex(0.25 + 0.75 * std::cos(0.03 * n), 0.0));
  }
  const SplittingReport unclear = detect_splitting(midway, degen_trace);
  CHECK(unclear.regime == SplitRegime::Indeterminate);
}
