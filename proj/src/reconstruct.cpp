#include "spinscope/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRadPerSecToRadPerUs = 1e-6;

Eigen::Vector3d residual(const Eigen::Vector3d& v,
                         const std::array<Eigen::Vector3d, 3>& m,
                         const std::array<double, 3>& c2) {
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) {
    const double proj = m[static_cast<std::size_t>(i)].dot(v);
    r(i) = v.squaredNorm() - proj * proj - c2[static_cast<std::size_t>(i)];
  }
  return r;
}

Eigen::Matrix3d jacobian(const Eigen::Vector3d& v,
                         const std::array<Eigen::Vector3d, 3>& m) {
  Eigen::Matrix3d jac;
  for (int i = 0; i < 3; ++i) {
    const auto& mi = m[static_cast<std::size_t>(i)];
    jac.row(i) = 2.0 * v - 2.0 * mi.dot(v) * mi;
  }
  return jac;
}

// damped Newton iteration from one start; returns true on convergence
bool newton_solve(Eigen::Vector3d& v, const std::array<Eigen::Vector3d, 3>& m,
                  const std::array<double, 3>& c2, double tol) {
  Eigen::Vector3d r = residual(v, m, c2);
  for (int iter = 0; iter < 80; ++iter) {
    if (r.norm() <= tol) return true;
    const Eigen::Matrix3d jac = jacobian(v, m);
    const Eigen::Vector3d step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) return false;
    double alpha = 1.0;
    bool accepted = false;
    for (int back = 0; back < 30; ++back) {
      const Eigen::Vector3d trial = v + alpha * step;
      const Eigen::Vector3d rt = residual(trial, m, c2);
      if (rt.norm() < r.norm()) {
        v = trial;
        r = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return r.norm() <= tol;
  }
  return r.norm() <= tol;
}

std::vector<Eigen::Vector3d> start_directions() {
  std::vector<Eigen::Vector3d> dirs;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z) {
        if (x == 0 && y == 0 && z == 0) continue;
        dirs.emplace_back(Eigen::Vector3d(x, y, z).normalized());
      }
  return dirs;
}

Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v) {
  for (int i = 2; i >= 0; --i) {
    if (std::abs(v(i)) > 1e-12) return v(i) > 0 ? v : Eigen::Vector3d(-v);
  }
  return v;
}

struct BranchPoint {
  Eigen::Vector3d position;
  HyperfineVector hyperfine;
  Eigen::Vector3d direction;
};

// expand one +-v representative into all consistent positions
std::vector<BranchPoint> expand_branches(const Eigen::Vector3d& v_rep, double gamma_n,
                                         const PhysicalConstants& constants) {
  std::vector<BranchPoint> points;
  for (double sign : {1.0, -1.0}) {
    const Eigen::Vector3d v = sign * v_rep;
    const double a_mag = v.norm();
    if (a_mag <= 0.0) continue;
    const Eigen::Vector3d a = v / a_mag;
    OrientationCandidates orient;
    try {
      orient = invert_orientation(a);
    } catch (const inversion_error&) {
      continue;
    }
    if (orient.degenerate_ring) continue;
    for (const Eigen::Vector3d& n : orient.candidates) {
      HyperfineVector h;
      h.magnitude = a_mag;
      h.unit = a;
      const TargetGeometry geom = position_from_hyperfine(h, n, gamma_n, constants);
      points.push_back({geom.position_angstrom, h, n});
    }
  }
  return points;
}

struct NominalSolution {
  Eigen::Vector3d v;  // selected hyperfine vector A*a
  BranchPoint branch;
  std::vector<Eigen::Vector3d> surviving_positions;
  bool ambiguous = false;
};

// worst relative mismatch between the periods a candidate v predicts at the
// verification azimuths and the measured ones; even in v, so it separates
// solution families but never the +-v members of one family
double verification_score(const Eigen::Vector3d& v,
                          const std::vector<FieldDirection>& directions,
                          const std::vector<double>& measured, double g, double gamma_n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < directions.size() && i < measured.size(); ++i) {
    const Eigen::Vector3d m = directions[i].unit();
    const double proj = m.dot(v);
    const double a_perp = std::sqrt(std::max(0.0, v.squaredNorm() - proj * proj));
    const double omega0 = larmor_frequency(gamma_n, directions[i].gauss);
    if (!(a_perp > 0.0)) return 1e300;
    const double predicted = kPi * omega0 / (g * a_perp);
    worst = std::max(worst, std::abs(predicted - measured[i]) / measured[i]);
  }
  return worst;
}

NominalSolution select_branch(const std::array<double, 3>& c,
                              const std::array<Eigen::Vector3d, 3>& m, double gamma_n,
                              const ReconstructionOptions& options,
                              const std::vector<double>& verify_periods,
                              const PhysicalConstants& constants) {
  const std::vector<Eigen::Vector3d> reps = solve_hyperfine(c, {m[0], m[1], m[2]});

  struct Scored {
    BranchPoint point;
    double score;
  };
  std::vector<Scored> above_surface;
  double best_score = 1e300;
  for (const Eigen::Vector3d& rep : reps) {
    const double score = options.verify_directions.empty()
                             ? 0.0
                             : verification_score(rep, options.verify_directions,
                                                  verify_periods, options.g, gamma_n);
    best_score = std::min(best_score, score);
    for (const BranchPoint& point : expand_branches(rep, gamma_n, constants)) {
      if (point.position.z() <= options.surface_z) continue;
      bool duplicate = false;
      for (const Scored& seen : above_surface)
        if ((seen.point.position - point.position).norm() < 1e-6) duplicate = true;
      if (!duplicate) above_surface.push_back({point, score});
    }
  }
  if (above_surface.empty())
    throw inversion_error("reconstruct: no candidate position above the surface plane");

  // drop families the verification azimuths rule out, then take the candidate
  // farthest along the surface normal
  const double cutoff = std::max(1e-6, 5.0 * best_score);
  NominalSolution out;
  double best_z = -1e300;
  for (const Scored& entry : above_surface) {
    if (entry.score > cutoff) continue;
    out.surviving_positions.push_back(entry.point.position);
    if (entry.point.position.z() > best_z) {
      best_z = entry.point.position.z();
      out.branch = entry.point;
      out.v = entry.point.hyperfine.vec();
    }
  }
  if (out.surviving_positions.empty()) {
    // verification contradicted every family; keep everything and flag
    for (const Scored& entry : above_surface) {
      out.surviving_positions.push_back(entry.point.position);
      if (entry.point.position.z() > best_z) {
        best_z = entry.point.position.z();
        out.branch = entry.point;
        out.v = entry.point.hyperfine.vec();
      }
    }
    out.ambiguous = true;
    return out;
  }
  out.ambiguous = out.surviving_positions.size() > 1;
  return out;
}

// linear refit of a zero crossing from noisy samples around a predicted position
double refit_zero(const std::vector<double>& trace, double predicted, int window) {
  const int n_max = static_cast<int>(trace.size());  // trace[n-1] holds L(n)
  const int lo = std::max(1, static_cast<int>(std::floor(predicted)) - window);
  const int hi = std::min(n_max, static_cast<int>(std::ceil(predicted)) + window);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, count = 0;
  for (int n = lo; n <= hi; ++n) {
    const double x = n - predicted;
    const double y = trace[static_cast<std::size_t>(n - 1)];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1;
  }
  const double denom = count * sxx - sx * sx;
  if (std::abs(denom) < 1e-12 || count < 3) return predicted;
  const double slope = (count * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / count;
  if (std::abs(slope) < 1e-12) return predicted;
  return predicted - intercept / slope;
}

}  // namespace

std::vector<Eigen::Vector3d> solve_hyperfine(
    const std::array<double, 3>& c, const std::array<Eigen::Vector3d, 3>& directions) {
  std::array<Eigen::Vector3d, 3> m;
  Eigen::Matrix3d dir_mat;
  for (int i = 0; i < 3; ++i) {
    m[static_cast<std::size_t>(i)] = directions[static_cast<std::size_t>(i)].normalized();
    dir_mat.row(i) = m[static_cast<std::size_t>(i)];
  }
  if (std::abs(dir_mat.determinant()) < 1e-3)
    throw numeric_error("solve_hyperfine: field directions are nearly coplanar");

  double c_max = 0.0;
  std::array<double, 3> c2{};
  for (int i = 0; i < 3; ++i) {
    if (c[static_cast<std::size_t>(i)] < 0.0)
      throw std::invalid_argument("solve_hyperfine: coupling magnitudes must be >= 0");
    c2[static_cast<std::size_t>(i)] =
        c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    c_max = std::max(c_max, c[static_cast<std::size_t>(i)]);
  }
  if (c_max <= 0.0)
    throw std::invalid_argument("solve_hyperfine: all couplings vanish, nothing to solve");

  const double tol = 1e-10 * c_max * c_max;
  const double accept = 1e-8 * c_max * c_max;

  // a vanishing coupling pins v along that field direction; the remaining
  // equations give the magnitude in closed form (the Jacobian is singular
  // there, so Newton cannot be trusted with it)
  for (int i = 0; i < 3; ++i) {
    if (c[static_cast<std::size_t>(i)] > 1e-9 * c_max) continue;
    const auto& axis = m[static_cast<std::size_t>(i)];
    double magnitude = 0.0;
    int used = 0;
    for (int jdx = 0; jdx < 3; ++jdx) {
      if (jdx == i) continue;
      const double cross = 1.0 - std::pow(m[static_cast<std::size_t>(jdx)].dot(axis), 2);
      if (cross <= 1e-12) continue;
      magnitude += c[static_cast<std::size_t>(jdx)] / std::sqrt(cross);
      ++used;
    }
    if (used == 0) continue;
    magnitude /= used;
    const Eigen::Vector3d v = canonical_sign(magnitude * axis);
    if (residual(v, m, c2).norm() <= accept) return {v};
  }

  std::vector<Eigen::Vector3d> solutions;
  double best_residual = 1e300;
  for (const Eigen::Vector3d& dir : start_directions()) {
    for (double scale : {1.001, 1.05, 1.2, 1.5, 2.2, 3.5}) {
      Eigen::Vector3d v = scale * c_max * dir;
      if (!newton_solve(v, m, c2, tol)) {
        best_residual = std::min(best_residual, residual(v, m, c2).norm());
        continue;
      }
      const double res = residual(v, m, c2).norm();
      if (res > accept) {
        best_residual = std::min(best_residual, res);
        continue;
      }
      const Eigen::Vector3d canon = canonical_sign(v);
      bool duplicate = false;
      for (const Eigen::Vector3d& seen : solutions)
        if ((seen - canon).norm() < 1e-6 * std::max(1.0, canon.norm())) duplicate = true;
      if (!duplicate) solutions.push_back(canon);
    }
  }
  if (solutions.empty()) {
    std::ostringstream msg;
    msg << "solve_hyperfine: no solution within tolerance; best residual " << best_residual;
    throw inversion_error(msg.str());
  }
  return solutions;
}

OrientationCandidates invert_orientation(const Eigen::Vector3d& a) {
  if (std::abs(a.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("invert_orientation: a must be a unit vector");

  const double az = a.z();
  // a_z sqrt(1+3u) = 1-3u with u = n_z^2 gives 9u^2 - (6+3a_z^2)u + (1-a_z^2) = 0
  const double b = 6.0 + 3.0 * az * az;
  const double disc = b * b - 36.0 * (1.0 - az * az);
  if (disc < -1e-12) throw inversion_error("invert_orientation: negative discriminant");
  const double root = std::sqrt(std::max(0.0, disc));

  OrientationCandidates out;
  for (double u : {(b - root) / 18.0, (b + root) / 18.0}) {
    if (u < -1e-12 || u > 1.0 + 1e-12) continue;
    u = std::clamp(u, 0.0, 1.0);
    // reject the root introduced by squaring: signs must agree pre-square
    if (std::abs(az * std::sqrt(1.0 + 3.0 * u) - (1.0 - 3.0 * u)) > 1e-6) continue;

    if (u < 1e-12) {
      out.degenerate_ring = true;  // n_z = 0: transverse direction unconstrained
      continue;
    }
    const double scale = std::sqrt(1.0 + 3.0 * u);
    for (double nz : {std::sqrt(u), -std::sqrt(u)}) {
      Eigen::Vector3d n(-a.x() * scale / (3.0 * nz), -a.y() * scale / (3.0 * nz), nz);
      const double norm = n.norm();
      if (std::abs(norm - 1.0) > 1e-6) continue;
      n /= norm;
      out.candidates.push_back(n);
    }
  }
  if (out.candidates.empty() && !out.degenerate_ring)
    throw inversion_error("invert_orientation: no consistent target direction");
  return out;
}

TargetGeometry position_from_hyperfine(const HyperfineVector& h, const Eigen::Vector3d& n,
                                       double gamma_n, const PhysicalConstants& constants) {
  if (!(h.magnitude > 0.0))
    throw std::invalid_argument("position_from_hyperfine: magnitude must be > 0");
  const Eigen::Vector3d nn = n.normalized();
  const double a_si = h.magnitude / kRadPerSecToRadPerUs;
  const double numerator = constants.mu0 * constants.hbar * constants.gamma_e *
                           std::abs(gamma_n) * std::sqrt(1.0 + 3.0 * nn.z() * nn.z());
  const double r_m = std::cbrt(numerator / (4.0 * kPi * a_si));

  TargetGeometry geom;
  geom.gamma_n = gamma_n;
  geom.position_angstrom = (r_m * 1e10) * nn;
  return geom;
}

ReconstructionResult reconstruct(const std::vector<TargetObservation>& observations,
                                 const std::array<FieldDirection, 3>& directions,
                                 double gamma_n, const ReconstructionOptions& options,
                                 const PhysicalConstants& constants) {
  if (observations.empty())
    throw std::invalid_argument("reconstruct: no target observations");
  std::array<Eigen::Vector3d, 3> m;
  std::array<double, 3> omega0{};
  for (std::size_t i = 0; i < 3; ++i) {
    m[i] = directions[i].unit();
    omega0[i] = larmor_frequency(gamma_n, directions[i].gauss);
  }
  if (direction_conditioning(directions) < 1e-3)
    throw numeric_error("reconstruct: field directions are nearly coplanar");

  ReconstructionResult result;
  result.mc_samples = options.mc_samples;
  result.seed = options.seed;

  // nominal solve per target
  std::vector<NominalSolution> nominal;
  for (const TargetObservation& obs : observations) {
    std::array<double, 3> c{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(obs.periods[i] > 0.0))
        throw std::invalid_argument("reconstruct: periods must be positive");
      c[i] = kPi * omega0[i] / (options.g * obs.periods[i]);
    }
    nominal.push_back(select_branch(c, m, gamma_n, options, obs.verify_periods, constants));

    TargetResult target;
    target.name = obs.name;
    target.hyperfine = nominal.back().branch.hyperfine;
    target.candidate_positions = nominal.back().surviving_positions;
    target.position = nominal.back().branch.position;
    target.periods = obs.periods;
    target.branch_ambiguous = nominal.back().ambiguous;
    result.targets.push_back(std::move(target));
  }

  if (options.mc_samples <= 0 || !(options.noise_sigma > 0.0)) return result;

  // product coherence trace per direction; per target, re-extract the cleanest
  // odd-multiple crossing (largest product slope, i.e. least interference from
  // the other targets' cosine factors)
  constexpr double kMaxPulse = 450.0;
  const std::size_t n_targets = observations.size();
  std::array<std::vector<double>, 3> clean_trace;
  std::array<std::vector<int>, 3> windows;
  std::array<std::vector<double>, 3> predicted_zero;
  std::array<std::vector<int>, 3> zero_order;  // odd-multiple index 2j-1
  for (std::size_t i = 0; i < 3; ++i) {
    double reach = 0.0;
    for (std::size_t k = 0; k < n_targets; ++k) {
      const double period = observations[k].periods[i];
      // first dip zero carries the period; local refit window scales with it
      // but never reaches into a neighbouring crossing of another target
      const double zero = 0.5 * period;
      int window = std::clamp(static_cast<int>(std::lround(0.05 * period)), 2, 25);
      for (std::size_t l = 0; l < n_targets; ++l) {
        if (l == k) continue;
        const double other_period = observations[l].periods[i];
        for (int j = 1; (2 * j - 1) * 0.5 * other_period < zero + window + 2.0; ++j) {
          const double q = (2 * j - 1) * 0.5 * other_period;
          const double gap = std::abs(q - zero);
          if (gap < window + 1.5)
            window = std::max(2, static_cast<int>(std::floor(gap - 1.5)));
        }
      }
      predicted_zero[i].push_back(zero);
      windows[i].push_back(window);
      zero_order[i].push_back(1);
      reach = std::max(reach, zero + window + 2.0);
    }
    const int n_grid = static_cast<int>(std::ceil(reach));
    clean_trace[i].resize(static_cast<std::size_t>(n_grid));
    for (int n = 1; n <= n_grid; ++n) {
      double value = 1.0;
      for (const TargetObservation& obs : observations)
        value *= std::cos(kPi * n / obs.periods[i]);
      clean_trace[i][static_cast<std::size_t>(n - 1)] = value;
    }
  }

  // slot per (target, sample); reduction order is then canonical no matter how
  // samples were distributed over workers
  std::vector<std::vector<std::pair<bool, Eigen::Vector3d>>> samples(
      n_targets, std::vector<std::pair<bool, Eigen::Vector3d>>(
                     static_cast<std::size_t>(options.mc_samples),
                     {false, Eigen::Vector3d::Zero()}));

  auto run_sample = [&](int sample_index) {
    std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ull * (sample_index + 1));
    std::normal_distribution<double> gauss(0.0, options.noise_sigma);
    std::array<std::vector<double>, 3> noisy;
    for (std::size_t i = 0; i < 3; ++i) {
      noisy[i] = clean_trace[i];
      for (double& y : noisy[i]) y += gauss(rng);
    }
    for (std::size_t k = 0; k < n_targets; ++k) {
      std::array<double, 3> c{};
      bool usable = true;
      for (std::size_t i = 0; i < 3; ++i) {
        const double zero = refit_zero(noisy[i], predicted_zero[i][k], windows[i][k]);
        // keep genuine scatter from blurred crossings, but a fit whose slope
        // collapsed extrapolates tens of pulses away: that read failed
        if (!(zero > 0.0) ||
            std::abs(zero - predicted_zero[i][k]) >
                std::max(3.0 * windows[i][k], 12.0)) {
          usable = false;
          break;
        }
        const double period = 2.0 * zero / zero_order[i][k];
        c[i] = kPi * omega0[i] / (options.g * period);
      }
      if (!usable) continue;
      std::array<double, 3> c2{c[0] * c[0], c[1] * c[1], c[2] * c[2]};
      Eigen::Vector3d v = nominal[k].v;
      const double scale = std::max({c[0], c[1], c[2]});
      if (!newton_solve(v, m, c2, 1e-10 * scale * scale)) continue;
      OrientationCandidates orient;
      const double a_mag = v.norm();
      if (a_mag <= 0.0) continue;
      try {
        orient = invert_orientation(v / a_mag);
      } catch (const inversion_error&) {
        continue;
      }
      // stay on the nominal branch: nearest direction to the selected one
      const Eigen::Vector3d ref = nominal[k].branch.direction;
      double best = 1e300;
      Eigen::Vector3d n_sel = ref;
      for (const Eigen::Vector3d& n : orient.candidates) {
        const double dist = (n - ref).norm();
        if (dist < best) {
          best = dist;
          n_sel = n;
        }
      }
      HyperfineVector h;
      h.magnitude = a_mag;
      h.unit = v / a_mag;
      samples[k][static_cast<std::size_t>(sample_index)] = {
          true, position_from_hyperfine(h, n_sel, gamma_n, constants).position_angstrom};
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (int s = 0; s < options.mc_samples; ++s) run_sample(s);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int s = w; s < options.mc_samples; s += workers) run_sample(s);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 0; k < n_targets; ++k) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    double count = 0;
    for (const auto& [ok, p] : samples[k]) {
      if (!ok) continue;
      mean += p;
      count += 1;
    }
    if (count < 2) continue;
    mean /= count;
    Eigen::Vector3d var = Eigen::Vector3d::Zero();
    for (const auto& [ok, p] : samples[k])
      if (ok) var += (p - mean).cwiseProduct(p - mean);
    var /= (count - 1);
    result.targets[k].sigma = var.cwiseSqrt();
  }
  return result;
}

MeasurementBudget measurement_budget(double a_perp, double readout_fidelity,
                                     double target_sigma, double t_init_readout_us) {
  if (!(a_perp > 0.0) || !(readout_fidelity > 0.0) || !(target_sigma > 0.0) ||
      !(t_init_readout_us > 0.0))
    throw std::invalid_argument("measurement_budget: all inputs must be > 0");
  MeasurementBudget budget;
  budget.shots = 1.0 / (readout_fidelity * target_sigma * readout_fidelity * target_sigma);
  budget.t_dd_us = kPi * kPi / (4.0 * a_perp);
  budget.total_s = budget.shots * (budget.t_dd_us + t_init_readout_us) * 1e-6;
  return budget;
}

}  // namespace spinscope
