#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <eigen3/Eigen/Dense>

namespace spinscope {

// scenario file contents; parsing is fail-closed (unknown keys rejected)
struct Scenario {
  int schema_version = 1;
  std::string name;
  std::string notes;
  std::uint64_t seed = 1;

  struct Sensor {
    std::string kind = "spin_half";  // spin_half | nv
    std::optional<double> nv_depth_nm;
  } sensor;

  struct PositionTarget {
    std::string name;
    Eigen::Vector3d xyz_angstrom{0, 0, 0};
    std::string species;
  };

  struct HyperfineTargets {
    double omega0 = 0.0;
    std::vector<Eigen::Vector3d> vectors;
    std::vector<double> omegas;  // optional per-spin override
  };

  struct Cluster {
    std::string type;  // ladder | pair | generic | type_ii | type_v
    double j = 0.0;
    std::vector<double> energies;
    double lambda = 0.0;
    double lambda_v = 0.0;
    double omega_a = 0.0;
    double omega_b = 0.0;
    double mu = 0.0;
    double resonant_omega = 0.0;
    std::string resonant_with = "shifted";  // pair scans: shifted | bare
    std::vector<std::vector<double>> beta_re, beta_im;
  };

  // exactly one of these three is set (budget-only scenarios may omit all)
  std::optional<std::vector<PositionTarget>> positions;
  std::optional<HyperfineTargets> hyperfine;
  std::optional<Cluster> cluster;

  struct Field {
    double gauss = 0.0;
    double theta_deg = 0.0;
    std::optional<double> phi_deg;
    std::vector<double> phi_list_deg;
    std::optional<std::array<double, 3>> phi_grid_deg;  // start, stop, count
  };
  std::optional<Field> field;

  struct Sequence {
    std::optional<int> n;
    std::optional<std::array<int, 2>> n_range;
    std::optional<double> tau;
    std::optional<int> resonant_q;
    std::optional<double> omega_ref;
    std::optional<std::array<double, 2>> tau_range;
    int tau_samples = 400;
  };
  std::optional<Sequence> sequence;

  std::string model = "exact";  // exact | analytic | semiclassical

  struct Analysis {
    double noise_sigma = 0.01;
    int mc_samples = 500;
    double surface_z = 0.0;
  } analysis;

  struct Budget {
    double a_perp = 0.0;
    double readout_fidelity = 0.0;
    double target_sigma = 0.0;
    double t_init_readout_us = 1.0;
  };
  std::optional<Budget> budget;

  bool dipolar = false;
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text);
std::string serialize_scenario(const Scenario& scenario);

}  // namespace spinscope
