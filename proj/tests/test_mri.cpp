#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinscope/errors.hpp"
#include "spinscope/reconstruct.hpp"

using namespace spinscope;

namespace {

constexpr double kPi = std::numbers::pi;

const PhysicalConstants kConstants = PhysicalConstants::defaults();

TargetGeometry phosphorus_at(const Eigen::Vector3d& position) {
  TargetGeometry geom;
  geom.position_angstrom = position;
  geom.species = "P31";
  geom.gamma_n = kConstants.gamma_for("P31");
  return geom;
}

FieldDirection direction(double gauss, double theta_deg, double phi_deg) {
  FieldDirection dir;
  dir.gauss = gauss;
  dir.theta_deg = theta_deg;
  dir.phi_deg = phi_deg;
  return dir;
}

// forward map of the unit dipole-field direction
Eigen::Vector3d unit_field_of(const Eigen::Vector3d& n) {
  const double nz = n.z();
  const double root = std::sqrt(1.0 + 3.0 * nz * nz);
  return Eigen::Vector3d(-3.0 * n.x() * nz, -3.0 * n.y() * nz, 1.0 - 3.0 * nz * nz) / root;
}

}  // namespace

TEST_CASE("hyperfine_from_position: axial and equatorial limits") {
  const HyperfineVector on_axis =
      hyperfine_from_position(phosphorus_at({0.0, 0.0, 20.0}), kConstants);
  CHECK(on_axis.unit.x() == doctest::Approx(0.0));
  CHECK(on_axis.unit.z() == doctest::Approx(-1.0));

  const HyperfineVector equatorial =
      hyperfine_from_position(phosphorus_at({20.0, 0.0, 0.0}), kConstants);
  CHECK(equatorial.unit.z() == doctest::Approx(1.0));

  // axial magnitude carries the sqrt(1+3) = 2 enhancement
  CHECK(on_axis.magnitude == doctest::Approx(2.0 * equatorial.magnitude).epsilon(1e-12));
}

TEST_CASE("hyperfine_from_position: phosphorus at 3 nm couples at the kilohertz scale") {
  const HyperfineVector h =
      hyperfine_from_position(phosphorus_at({0.0, 17.32, 24.49}), kConstants);  // R = 30 A
  const double hz = h.magnitude * 1e6 / (2.0 * kPi);  // rad/us -> Hz
  CHECK(hz > 300.0);
  CHECK(hz < 5000.0);
}

TEST_CASE("hyperfine_from_position: inverse-cube distance scaling") {
  const HyperfineVector near =
      hyperfine_from_position(phosphorus_at({10.0, 5.0, 12.0}), kConstants);
  const HyperfineVector far =
      hyperfine_from_position(phosphorus_at({20.0, 10.0, 24.0}), kConstants);
  CHECK(near.magnitude == doctest::Approx(8.0 * far.magnitude).epsilon(1e-12));
  CHECK_THROWS_AS(hyperfine_from_position(phosphorus_at({0, 0, 0}), kConstants),
                  numeric_error);
}

TEST_CASE("perpendicular_component: projection limits and sign invariance") {
  HyperfineVector h;
  h.magnitude = 2.0;
  h.unit = Eigen::Vector3d(0.0, 0.0, 1.0);
  CHECK(perpendicular_component(h, {0.0, 0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(perpendicular_component(h, {1.0, 0.0, 0.0}) == doctest::Approx(2.0));

  // m . a = 0.6 leaves 0.8 of the magnitude
  const Eigen::Vector3d tilted(0.8, 0.0, 0.6);
  CHECK(perpendicular_component(h, tilted) == doctest::Approx(1.6).epsilon(1e-12));

  // invariant under either sign flip
  HyperfineVector flipped = h;
  flipped.unit = -h.unit;
  CHECK(perpendicular_component(flipped, tilted) ==
        doctest::Approx(perpendicular_component(h, tilted)));
  CHECK(perpendicular_component(h, -tilted) ==
        doctest::Approx(perpendicular_component(h, tilted)));
}

TEST_CASE("forward_periods: field scaling and unobservable directions") {
  const TargetGeometry geom = phosphorus_at({13.88, 7.07, 18.48});
  const std::array<FieldDirection, 3> dirs{direction(50, 40, 30), direction(50, 40, 80),
                                           direction(50, 40, 150)};
  const auto periods = forward_periods(geom, dirs, 2.0, kConstants);
  for (const auto& p : periods) REQUIRE(p.has_value());

  // doubling B doubles every period
  const std::array<FieldDirection, 3> dirs2{direction(100, 40, 30), direction(100, 40, 80),
                                            direction(100, 40, 150)};
  const auto periods2 = forward_periods(geom, dirs2, 2.0, kConstants);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(*periods2[i] == doctest::Approx(2.0 * *periods[i]).epsilon(1e-12));

  // a field along the hyperfine axis sees no transverse coupling
  const HyperfineVector h = hyperfine_from_position(geom, kConstants);
  FieldDirection aligned;
  aligned.gauss = 50.0;
  aligned.theta_deg = std::acos(h.unit.z()) * 180.0 / kPi;
  aligned.phi_deg = std::atan2(h.unit.y(), h.unit.x()) * 180.0 / kPi;
  const auto blocked =
      forward_periods(geom, {aligned, direction(50, 40, 80), direction(50, 40, 150)}, 2.0,
                      kConstants);
  CHECK_FALSE(blocked[0].has_value());
  CHECK(blocked[1].has_value());

  // near-coplanar triples are rejected
  CHECK_THROWS_AS(forward_periods(geom,
                                  {direction(50, 90, 0), direction(50, 90, 45),
                                   direction(50, 90, 111)},
                                  2.0, kConstants),
                  numeric_error);
}

TEST_CASE("solve_hyperfine: axis-aligned system recovered up to sign") {
  const std::array<Eigen::Vector3d, 3> dirs{Eigen::Vector3d::UnitX(),
                                            Eigen::Vector3d::UnitY(),
                                            Eigen::Vector3d::UnitZ()};
  const double a = 0.02;
  const auto solutions = solve_hyperfine({a, a, 0.0}, dirs);
  REQUIRE(!solutions.empty());
  bool found = false;
  for (const auto& v : solutions)
    if ((v - Eigen::Vector3d(0, 0, a)).norm() < 1e-8 ||
        (v + Eigen::Vector3d(0, 0, a)).norm() < 1e-8)
      found = true;
  CHECK(found);
}

TEST_CASE("solve_hyperfine: random forward-backward round trips") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> comp(-0.03, 0.03);
  const std::array<Eigen::Vector3d, 3> dirs{
      direction(50, 40, 30).unit(), direction(50, 40, 80).unit(),
      direction(50, 40, 150).unit()};
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d v_true(comp(rng), comp(rng), comp(rng));
    if (v_true.norm() < 1e-3) continue;
    std::array<double, 3> c{};
    for (int i = 0; i < 3; ++i) {
      const double proj = dirs[static_cast<std::size_t>(i)].dot(v_true);
      c[static_cast<std::size_t>(i)] = std::sqrt(v_true.squaredNorm() - proj * proj);
    }
    const auto solutions = solve_hyperfine(c, dirs);
    double best = 1e300;
    for (const auto& v : solutions)
      best = std::min({best, (v - v_true).norm(), (v + v_true).norm()});
    CHECK(best < 1e-6 * v_true.norm());

    // residuals of both sign partners agree
    for (const auto& v : solutions) {
      for (int i = 0; i < 3; ++i) {
        const auto& m = dirs[static_cast<std::size_t>(i)];
        const double r_plus = v.squaredNorm() - std::pow(m.dot(v), 2) -
                              c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
        const Eigen::Vector3d w = -v;
        const double r_minus = w.squaredNorm() - std::pow(m.dot(w), 2) -
                               c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
        CHECK(std::abs(r_plus - r_minus) < 1e-10);
      }
    }
  }
}

TEST_CASE("solve_hyperfine: coplanar directions and empty input rejected") {
  const std::array<Eigen::Vector3d, 3> coplanar{Eigen::Vector3d::UnitX(),
                                                Eigen::Vector3d::UnitY(),
                                                Eigen::Vector3d(1, 1, 0).normalized()};
  CHECK_THROWS_AS(solve_hyperfine({0.01, 0.01, 0.01}, coplanar), numeric_error);
  const std::array<Eigen::Vector3d, 3> dirs{Eigen::Vector3d::UnitX(),
                                            Eigen::Vector3d::UnitY(),
                                            Eigen::Vector3d::UnitZ()};
  CHECK_THROWS_AS(solve_hyperfine({0.0, 0.0, 0.0}, dirs), std::invalid_argument);
}

TEST_CASE("invert_orientation: axial cases") {
  const auto down = invert_orientation(Eigen::Vector3d(0, 0, -1));
  REQUIRE(down.candidates.size() == 2);
  CHECK((down.candidates[0] - Eigen::Vector3d(0, 0, 1)).norm() +
            (down.candidates[1] - Eigen::Vector3d(0, 0, -1)).norm() <
        1e-8);
  CHECK_FALSE(down.degenerate_ring);

  const auto up = invert_orientation(Eigen::Vector3d(0, 0, 1));
  CHECK(up.degenerate_ring);  // equatorial one-parameter family
}

TEST_CASE("invert_orientation: random directions round trip through the forward map") {
  std::mt19937 rng(77);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::Vector3d n(gauss(rng), gauss(rng), gauss(rng));
    if (n.norm() < 0.1) continue;
    n.normalize();
    if (std::abs(n.z()) < 0.05) continue;  // avoid the degenerate ring
    const Eigen::Vector3d a = unit_field_of(n);
    const auto result = invert_orientation(a);
    REQUIRE(!result.candidates.empty());

    bool has_n = false, has_minus_n = false;
    for (const auto& candidate : result.candidates) {
      if ((candidate - n).norm() < 1e-8) has_n = true;
      if ((candidate + n).norm() < 1e-8) has_minus_n = true;
      // every candidate must map forward onto the input
      CHECK((unit_field_of(candidate) - a).norm() < 1e-8);
    }
    CHECK(has_n);
    CHECK(has_minus_n);
  }
  CHECK_THROWS_AS(invert_orientation(Eigen::Vector3d(0.5, 0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("position_from_hyperfine: inverse-cube scaling and round trip") {
  const TargetGeometry geom = phosphorus_at({13.88, 7.07, 18.48});
  const HyperfineVector h = hyperfine_from_position(geom, kConstants);

  HyperfineVector halved = h;
  halved.magnitude = 0.5 * h.magnitude;
  const TargetGeometry geo_full =
      position_from_hyperfine(h, geom.direction(), geom.gamma_n, kConstants);
  const TargetGeometry geo_half =
      position_from_hyperfine(halved, geom.direction(), geom.gamma_n, kConstants);
  CHECK(geo_half.distance() ==
        doctest::Approx(std::cbrt(2.0) * geo_full.distance()).epsilon(1e-12));

  CHECK((geo_full.position_angstrom - geom.position_angstrom).norm() < 1e-9);
  CHECK_THROWS_AS(position_from_hyperfine(HyperfineVector{}, geom.direction(),
                                          geom.gamma_n, kConstants),
                  std::invalid_argument);
}

TEST_CASE("reconstruct: noiseless single-target round trip to 0.1 A") {
  const Eigen::Vector3d truth(13.88, 7.07, 18.48);
  const TargetGeometry geom = phosphorus_at(truth);
  const std::array<FieldDirection, 3> dirs{direction(50, 40, 30), direction(50, 40, 80),
                                           direction(50, 40, 150)};
  const auto periods = forward_periods(geom, dirs, 2.0, kConstants);

  TargetObservation obs;
  obs.name = "single";
  for (std::size_t i = 0; i < 3; ++i) obs.periods[i] = *periods[i];
  const auto verify_dirs = std::array<FieldDirection, 2>{direction(50, 40, 55),
                                                         direction(50, 40, 115)};
  for (const auto& d : verify_dirs) {
    const auto extra = forward_periods(geom, {d, dirs[1], dirs[2]}, 2.0, kConstants);
    obs.verify_periods.push_back(*extra[0]);
  }

  ReconstructionOptions options;
  options.g = 2.0;
  options.mc_samples = 0;  // nominal solve only
  options.verify_directions = {verify_dirs[0], verify_dirs[1]};
  const ReconstructionResult result =
      reconstruct({obs}, dirs, geom.gamma_n, options, kConstants);
  REQUIRE(result.targets.size() == 1);
  CHECK((result.targets[0].position - truth).norm() < 0.1);
}

TEST_CASE("reconstruct: field-strength invariance of recovered positions") {
  const Eigen::Vector3d truth(15.11, 4.95, 16.74);
  const TargetGeometry geom = phosphorus_at(truth);
  for (double gauss : {50.0, 150.0}) {
    const std::array<FieldDirection, 3> dirs{direction(gauss, 40, 30),
                                             direction(gauss, 40, 80),
                                             direction(gauss, 40, 150)};
    const auto periods = forward_periods(geom, dirs, 2.0, kConstants);
    TargetObservation obs;
    obs.name = "scaled";
    for (std::size_t i = 0; i < 3; ++i) obs.periods[i] = *periods[i];

    ReconstructionOptions options;
    options.mc_samples = 0;
    options.verify_directions = {direction(gauss, 40, 55), direction(gauss, 40, 115)};
    for (const auto& d : options.verify_directions) {
      const auto extra = forward_periods(geom, {d, dirs[1], dirs[2]}, 2.0, kConstants);
      obs.verify_periods.push_back(*extra[0]);
    }
    const ReconstructionResult result =
        reconstruct({obs}, dirs, geom.gamma_n, options, kConstants);
    CHECK((result.targets[0].position - truth).norm() < 0.1);

    // every period scales with the field while the geometry is unchanged
    if (gauss == 150.0) {
      const auto base = forward_periods(geom,
                                        {direction(50, 40, 30), direction(50, 40, 80),
                                         direction(50, 40, 150)},
                                        2.0, kConstants);
      for (std::size_t i = 0; i < 3; ++i)
        CHECK(*periods[i] == doctest::Approx(3.0 * *base[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconstruct: Monte-Carlo stds scale linearly with the trace noise") {
  const Eigen::Vector3d truth(13.88, 7.07, 18.48);
  const TargetGeometry geom = phosphorus_at(truth);
  const std::array<FieldDirection, 3> dirs{direction(50, 40, 30), direction(50, 40, 80),
                                           direction(50, 40, 150)};
  const auto periods = forward_periods(geom, dirs, 2.0, kConstants);
  TargetObservation obs;
  obs.name = "noise-scaling";
  for (std::size_t i = 0; i < 3; ++i) obs.periods[i] = *periods[i];

  auto run_at = [&](double sigma) {
    ReconstructionOptions options;
    options.mc_samples = 800;
    options.noise_sigma = sigma;
    options.seed = 1234;
    return reconstruct({obs}, dirs, geom.gamma_n, options, kConstants).targets[0].sigma;
  };
  const Eigen::Vector3d low = run_at(0.002);
  const Eigen::Vector3d high = run_at(0.02);
  for (int i = 0; i < 3; ++i) {
    const double ratio = high(i) / low(i);
    CHECK(ratio > 10.0 * 0.8);
    CHECK(ratio < 10.0 * 1.2);
  }
}

TEST_CASE("reconstruct: deterministic for a fixed seed and worker-count independent") {
  const TargetGeometry geom = phosphorus_at({13.88, 7.07, 18.48});
  const std::array<FieldDirection, 3> dirs{direction(50, 40, 30), direction(50, 40, 80),
                                           direction(50, 40, 150)};
  const auto periods = forward_periods(geom, dirs, 2.0, kConstants);
  TargetObservation obs;
  obs.name = "determinism";
  for (std::size_t i = 0; i < 3; ++i) obs.periods[i] = *periods[i];

  auto run_with = [&](int workers) {
    ReconstructionOptions options;
    options.mc_samples = 200;
    options.seed = 4242;
    options.workers = workers;
    return reconstruct({obs}, dirs, geom.gamma_n, options, kConstants).targets[0].sigma;
  };
  const Eigen::Vector3d serial = run_with(1);
  const Eigen::Vector3d threaded = run_with(4);
  CHECK((serial - threaded).norm() == 0.0);
}

TEST_CASE("measurement_budget: shot counts and total times") {
  const double a_perp = 2.0 * kPi * 1e-3;  // 1 kHz in rad/us
  const MeasurementBudget base = measurement_budget(a_perp, 0.03, 0.01, 1.0);
  CHECK(base.shots == doctest::Approx(1.1111e7).epsilon(0.01));
  CHECK(base.t_dd_us == doctest::Approx(392.7).epsilon(0.001));
  CHECK(base.total_s == doctest::Approx(4374.0).epsilon(0.01));

  const MeasurementBudget improved = measurement_budget(a_perp, 0.3, 0.01, 1.0);
  CHECK(improved.shots == doctest::Approx(1.1111e5).epsilon(0.01));
  CHECK(improved.total_s == doctest::Approx(43.74).epsilon(0.01));

  CHECK_THROWS_AS(measurement_budget(0.0, 0.3, 0.01, 1.0), std::invalid_argument);
}
