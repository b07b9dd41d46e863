#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spinscope/geometry.hpp"

namespace spinscope {

// solve A*sqrt(1 - (m_i . a)^2) = c_i for v = A*a given three field directions;
// returns one representative per +-v pair, residual-checked
std::vector<Eigen::Vector3d> solve_hyperfine(const std::array<double, 3>& c,
                                             const std::array<Eigen::Vector3d, 3>& directions);

struct OrientationCandidates {
  std::vector<Eigen::Vector3d> candidates;  // unit target directions, +-n included
  bool degenerate_ring = false;             // equatorial one-parameter family
};

// invert the unit dipole-field map for the target direction n
OrientationCandidates invert_orientation(const Eigen::Vector3d& a);

// distance from the inverse-cube law, position = R * n
TargetGeometry position_from_hyperfine(const HyperfineVector& h, const Eigen::Vector3d& n,
                                       double gamma_n, const PhysicalConstants& constants);

struct TargetObservation {
  std::string name;
  std::array<double, 3> periods{};  // zero-spacing periods per field direction
  // periods at extra azimuths (matching ReconstructionOptions::verify_directions);
  // they discriminate spurious solution families of the three-quadric system
  std::vector<double> verify_periods;
};

struct ReconstructionOptions {
  double g = 2.0;             // sensor multiplier (NV double transition by default)
  double noise_sigma = 0.01;  // per-sample coherence noise for the Monte Carlo
  int mc_samples = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  double surface_z = 0.0;  // targets must satisfy z > surface_z
  std::vector<FieldDirection> verify_directions;
};

struct TargetResult {
  std::string name;
  HyperfineVector hyperfine;
  std::vector<Eigen::Vector3d> candidate_positions;  // all prior-surviving branches
  Eigen::Vector3d position{0, 0, 0};                 // selected branch
  Eigen::Vector3d sigma{0, 0, 0};                    // Monte-Carlo component stds
  std::array<double, 3> periods{};
  bool branch_ambiguous = false;
};

struct ReconstructionResult {
  std::vector<TargetResult> targets;
  int mc_samples = 0;
  std::uint64_t seed = 0;
};

// full pipeline from assigned periods: solve hyperfine vectors, invert
// orientations, pick the branch farthest above the surface plane, then
// propagate trace noise through zero re-extraction with a Monte Carlo
ReconstructionResult reconstruct(const std::vector<TargetObservation>& observations,
                                 const std::array<FieldDirection, 3>& directions,
                                 double gamma_n, const ReconstructionOptions& options,
                                 const PhysicalConstants& constants);

struct MeasurementBudget {
  double shots = 0.0;    // K
  double t_dd_us = 0.0;  // evolution time to the first dip zero
  double total_s = 0.0;  // K * (t_dd + t_init_readout)
};

MeasurementBudget measurement_budget(double a_perp, double readout_fidelity,
                                     double target_sigma, double t_init_readout_us);

}  // namespace spinscope
