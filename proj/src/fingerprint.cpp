#include "spinscope/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> real_samples(const CoherenceTrace& trace) {
  std::vector<double> out(trace.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trace.values[i].real();
  return out;
}

void require_integer_axis(const CoherenceTrace& trace) {
  if (trace.axis != TraceAxis::PulseNumber)
    throw std::invalid_argument("trace must be on the pulse-number axis");
  for (std::size_t i = 0; i < trace.abscissa.size(); ++i) {
    const double n = trace.abscissa[i];
    if (std::abs(n - std::round(n)) > 1e-9)
      throw std::invalid_argument("trace must be sampled at integer pulse numbers");
    if (i > 0 && std::abs(trace.abscissa[i] - trace.abscissa[i - 1] - 1.0) > 1e-9)
      throw std::invalid_argument("trace samples must be consecutive integers");
  }
}

// robust per-sample noise scale from second differences
double noise_scale(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d2;
  d2.reserve(y.size() - 2);
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    d2.push_back(std::abs(y[i + 1] - 2.0 * y[i] + y[i - 1]));
  std::nth_element(d2.begin(), d2.begin() + d2.size() / 2, d2.end());
  return 1.4826 * d2[d2.size() / 2] / std::sqrt(6.0);
}

// sampled minimum refined by a least-squares parabola over 5 neighbouring
// points; the window center is picked on a short moving average so that a
// single noise spike cannot win the argmin
double refined_minimum(const std::vector<double>& n, const std::vector<double>& y) {
  std::size_t i0 = 0;
  double lowest = 1e300;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo_s = (i >= 3) ? i - 3 : 0;
    const std::size_t hi_s = std::min(y.size() - 1, i + 3);
    double acc = 0.0;
    for (std::size_t k = lo_s; k <= hi_s; ++k) acc += y[k];
    acc /= static_cast<double>(hi_s - lo_s + 1);
    if (acc < lowest) {
      lowest = acc;
      i0 = i;
    }
  }
  const std::size_t lo = (i0 >= 2) ? i0 - 2 : 0;
  const std::size_t hi = std::min(y.size() - 1, i0 + 2);
  if (hi - lo < 2) return y[i0];

  // fit y = a x^2 + b x + c around the sampled minimum
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double x = n[i] - n[i0];
    const double x2 = x * x;
    s0 += 1;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
    t0 += y[i];
    t1 += x * y[i];
    t2 += x2 * y[i];
  }
  Eigen::Matrix3d mat;
  mat << s4, s3, s2, s3, s2, s1, s2, s1, s0;
  Eigen::Vector3d rhs(t2, t1, t0);
  const Eigen::Vector3d coef = mat.fullPivLu().solve(rhs);
  const double a = coef(0), b = coef(1), c = coef(2);

  double window_lo = y[lo], window_hi = y[lo];
  for (std::size_t i = lo; i <= hi; ++i) {
    window_lo = std::min(window_lo, y[i]);
    window_hi = std::max(window_hi, y[i]);
  }
  double value = c;  // fitted value at the selected center
  if (a > 1e-12) {
    const double xv = std::clamp(-b / (2.0 * a), -2.0, 2.0);
    value = a * xv * xv + b * xv + c;
  }
  // a noisy near-flat fit must not extrapolate below the data it was fed
  return std::clamp(value, window_lo - (window_hi - window_lo), window_hi);
}

}  // namespace

std::vector<ZeroCrossing> find_zeros(const CoherenceTrace& trace) {
  require_integer_axis(trace);
  if (trace.values.size() < 2)
    throw std::invalid_argument("find_zeros: trace shorter than 2 samples");

  const std::vector<double> y = real_samples(trace);
  std::vector<ZeroCrossing> zeros;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] == 0.0) {
      zeros.push_back({trace.abscissa[i], y[i + 1] - y[i]});
      continue;
    }
    if (y[i] * y[i + 1] < 0.0) {
      const double frac = y[i] / (y[i] - y[i + 1]);
      zeros.push_back({trace.abscissa[i] + frac, y[i + 1] - y[i]});
    }
  }
  return zeros;
}

FingerprintReport peel_couplings(std::vector<ZeroCrossing> zeros, double omega0, double g,
                                 double n_max) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("peel_couplings: omega0 must be > 0");
  if (!(g > 0.0)) throw std::invalid_argument("peel_couplings: g must be > 0");
  std::sort(zeros.begin(), zeros.end(),
            [](const ZeroCrossing& a, const ZeroCrossing& b) { return a.n_frac < b.n_frac; });

  constexpr int kMaxSpins = 16;
  std::vector<bool> claimed(zeros.size(), false);
  FingerprintReport report;
  report.threshold = kPi * omega0 / (2.0 * g * n_max);

  std::vector<double> base_positions;
  while (true) {
    std::size_t first = zeros.size();
    for (std::size_t i = 0; i < zeros.size(); ++i)
      if (!claimed[i]) {
        first = i;
        break;
      }
    if (first == zeros.size()) break;
    if (static_cast<int>(report.couplings.size()) >= kMaxSpins) {
      std::ostringstream msg;
      msg << "peel_couplings: residual crossings beyond the spin cap at N =";
      for (std::size_t i = 0; i < zeros.size(); ++i)
        if (!claimed[i]) msg << ' ' << zeros[i].n_frac;
      throw analysis_error(msg.str());
    }

    const double base = zeros[first].n_frac;
    claimed[first] = true;
    std::vector<double> claimed_positions{base};
    std::vector<double> estimates{base};
    for (int j = 2;; ++j) {
      const double predicted = (2 * j - 1) * base;
      const double window = std::max(1.0, 0.03 * predicted);
      if (predicted > n_max + window) break;
      std::size_t best = zeros.size();
      double best_dist = window;
      for (std::size_t i = 0; i < zeros.size(); ++i) {
        if (claimed[i]) continue;
        const double dist = std::abs(zeros[i].n_frac - predicted);
        if (dist <= best_dist) {
          best = i;
          best_dist = dist;
        }
      }
      if (best == zeros.size()) continue;  // annihilated, beyond range, or absent
      claimed[best] = true;
      claimed_positions.push_back(zeros[best].n_frac);
      estimates.push_back(zeros[best].n_frac / (2 * j - 1));
    }

    const double mean_base =
        std::accumulate(estimates.begin(), estimates.end(), 0.0) / estimates.size();
    CouplingEstimate est;
    est.a_perp = kPi * omega0 / (2.0 * g * mean_base);
    est.claimed_zeros = claimed_positions;
    if (estimates.size() > 1) {
      double var = 0.0;
      for (double e : estimates) {
        const double a = kPi * omega0 / (2.0 * g * e);
        var += (a - est.a_perp) * (a - est.a_perp);
      }
      est.std_err = std::sqrt(var / (estimates.size() - 1));
    }
    report.couplings.push_back(est);
    base_positions.push_back(mean_base);
  }

  std::vector<std::size_t> order(report.couplings.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.couplings[a].a_perp > report.couplings[b].a_perp;
  });
  std::vector<CouplingEstimate> sorted;
  std::vector<double> sorted_base;
  for (std::size_t i : order) {
    sorted.push_back(report.couplings[i]);
    sorted_base.push_back(base_positions[i]);
  }
  report.couplings = std::move(sorted);
  report.n_detected = static_cast<int>(report.couplings.size());

  for (std::size_t a = 0; a < sorted_base.size(); ++a)
    for (std::size_t b = a + 1; b < sorted_base.size(); ++b) {
      const double ratio = sorted_base[a] / sorted_base[b];
      if (ratio > 0.9 && ratio < 1.1)
        report.unresolved_pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  return report;
}

FingerprintReport fingerprint_report(const CoherenceTrace& trace, double omega0, double g) {
  const double n_max = trace.abscissa.empty() ? 0.0 : trace.abscissa.back();
  FingerprintReport report = peel_couplings(find_zeros(trace), omega0, g, n_max);
  const std::vector<double> y = real_samples(trace);
  report.dip_min = refined_minimum(trace.abscissa, y);
  if (report.dip_min < 1.0 - 0.05)
    report.inferred_dimension = std::max(2, static_cast<int>(std::lround(4.0 / (1.0 - report.dip_min))));
  return report;
}

CorrelationClass classify_correlation(const CoherenceTrace& trace) {
  require_integer_axis(trace);
  const std::vector<double> y = real_samples(trace);
  if (y.size() < 5) throw std::invalid_argument("classify_correlation: trace too short");

  CorrelationClass result;
  result.dip_min = refined_minimum(trace.abscissa, y);
  if (result.dip_min >= 1.0 - 0.05)
    throw analysis_error("classify_correlation: no dip observed on this trace");

  result.dimension = std::max(2, static_cast<int>(std::lround(4.0 / (1.0 - result.dip_min))));

  const double sigma = std::max(noise_scale(y), 1e-12);
  const int d = result.dimension;
  auto level = [](int dim) { return (dim - 4.0) / dim; };
  double neighbour_gap = std::abs(level(d) - level(d + 1));
  if (d > 2) neighbour_gap = std::min(neighbour_gap, std::abs(level(d) - level(d - 1)));
  result.confidence = neighbour_gap / sigma;
  return result;
}

SplittingReport detect_splitting(const CoherenceTrace& at_shifted_frequency,
                                 const CoherenceTrace& at_bare_frequency) {
  SplittingReport report;
  report.dip_min_shifted =
      refined_minimum(at_shifted_frequency.abscissa, real_samples(at_shifted_frequency));
  report.dip_min_reference =
      refined_minimum(at_bare_frequency.abscissa, real_samples(at_bare_frequency));

  const double dip = report.dip_min_shifted;
  if (std::abs(dip) <= 0.2) {
    report.regime = SplitRegime::Split;  // d = 4 behaviour, dip pinned at 0
    report.split = true;
  } else if (std::abs(dip + 1.0) <= 0.2) {
    report.regime = SplitRegime::Degenerate;  // both transitions driven together
    report.split = false;
  } else {
    report.regime = SplitRegime::Indeterminate;
    report.split = false;
  }
  return report;
}

}  // namespace spinscope
