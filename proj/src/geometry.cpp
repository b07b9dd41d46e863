#include "spinscope/geometry.hpp"

#include <cmath>
#include <numbers>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kGaussToTesla = 1e-4;
constexpr double kRadPerSecToRadPerUs = 1e-6;
constexpr double kAngstromToMeter = 1e-10;
}  // namespace

Eigen::Vector3d FieldDirection::unit() const {
  const double theta = theta_deg * kPi / 180.0;
  const double phi = phi_deg * kPi / 180.0;
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

double larmor_frequency(double gamma_n, double gauss) {
  if (!(gauss > 0.0)) throw std::invalid_argument("larmor_frequency: field must be > 0");
  return std::abs(gamma_n) * gauss * kGaussToTesla * kRadPerSecToRadPerUs;
}

HyperfineVector hyperfine_from_position(const TargetGeometry& geom,
                                        const PhysicalConstants& constants) {
  const double r_ang = geom.distance();
  if (!(r_ang > 0.0)) throw numeric_error("hyperfine_from_position: target at the origin");
  const Eigen::Vector3d n = geom.direction();
  const double nz = n.z();
  const double root = std::sqrt(1.0 + 3.0 * nz * nz);

  const double r_m = r_ang * kAngstromToMeter;
  const double prefactor = constants.mu0 * constants.hbar * constants.gamma_e *
                           std::abs(geom.gamma_n) / (4.0 * kPi * r_m * r_m * r_m);

  HyperfineVector h;
  h.magnitude = prefactor * root * kRadPerSecToRadPerUs;
  h.unit = Eigen::Vector3d(-3.0 * n.x() * nz, -3.0 * n.y() * nz, 1.0 - 3.0 * nz * nz) / root;
  return h;
}

double perpendicular_component(const HyperfineVector& h, const Eigen::Vector3d& m) {
  const double proj = m.normalized().dot(h.unit);
  const double s = 1.0 - proj * proj;
  return h.magnitude * std::sqrt(std::max(0.0, s));
}

double direction_conditioning(const std::array<FieldDirection, 3>& directions) {
  Eigen::Matrix3d mat;
  for (int i = 0; i < 3; ++i) mat.row(i) = directions[static_cast<std::size_t>(i)].unit();
  return std::abs(mat.determinant());
}

std::array<std::optional<double>, 3> forward_periods(
    const TargetGeometry& geom, const std::array<FieldDirection, 3>& directions, double g,
    const PhysicalConstants& constants) {
  if (direction_conditioning(directions) < 1e-3)
    throw numeric_error("forward_periods: field directions are nearly coplanar");

  const HyperfineVector h = hyperfine_from_position(geom, constants);
  std::array<std::optional<double>, 3> periods;
  for (std::size_t i = 0; i < 3; ++i) {
    const double omega0 = larmor_frequency(geom.gamma_n, directions[i].gauss);
    const double a_perp = perpendicular_component(h, directions[i].unit());
    if (a_perp < 1e-12 * h.magnitude)
      periods[i] = std::nullopt;  // field along the hyperfine axis, no dip oscillation
    else
      periods[i] = kPi * omega0 / (g * a_perp);
  }
  return periods;
}

}  // namespace spinscope
