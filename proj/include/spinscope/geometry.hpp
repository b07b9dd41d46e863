#pragma once

#include <array>
#include <optional>
#include <string>

#include <eigen3/Eigen/Dense>

#include "spinscope/constants.hpp"

namespace spinscope {

// magnetic-field direction relative to the sensor frame: z along the NV axis,
// x along the in-plane reference; theta polar, phi azimuth, both in degrees
struct FieldDirection {
  double gauss = 0.0;
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  Eigen::Vector3d unit() const;
};

// target nucleus at a Cartesian offset from the sensor, in angstrom
struct TargetGeometry {
  Eigen::Vector3d position_angstrom{0, 0, 0};
  double gamma_n = 0.0;  // rad s^-1 T^-1, signed
  std::string species;

  double distance() const { return position_angstrom.norm(); }
  Eigen::Vector3d direction() const { return position_angstrom.normalized(); }
};

// point-dipole hyperfine field A * a; magnitude in rad/us
struct HyperfineVector {
  double magnitude = 0.0;
  Eigen::Vector3d unit{0, 0, 1};

  Eigen::Vector3d vec() const { return magnitude * unit; }
};

// nuclear Larmor frequency |gamma_n| B in rad/us
double larmor_frequency(double gamma_n, double gauss);

HyperfineVector hyperfine_from_position(const TargetGeometry& geom,
                                        const PhysicalConstants& constants);

// component of the hyperfine field perpendicular to the field direction m
double perpendicular_component(const HyperfineVector& h, const Eigen::Vector3d& m);

// zero-spacing pulse-number period per field direction, pi*omega0/(g*A_perp);
// nullopt marks a direction along which the target is unobservable (A_perp = 0)
std::array<std::optional<double>, 3> forward_periods(
    const TargetGeometry& geom, const std::array<FieldDirection, 3>& directions, double g,
    const PhysicalConstants& constants);

// guard value for the direction triple; small determinant means the three
// field directions are nearly coplanar and the inversion is ill conditioned
double direction_conditioning(const std::array<FieldDirection, 3>& directions);

}  // namespace spinscope
