#include "spinscope/run.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "spinscope/analytic.hpp"
#include "spinscope/errors.hpp"
#include "spinscope/fingerprint.hpp"
#include "spinscope/geometry.hpp"
#include "spinscope/reconstruct.hpp"

namespace spinscope {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr double kRadPerSecToRadPerUs = 1e-6;
constexpr double kAngstromToMeter = 1e-10;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

SensorKind sensor_kind(const Scenario& scenario) {
  return scenario.sensor.kind == "nv" ? SensorKind::NvPlusMinus : SensorKind::SpinHalf;
}

// orthonormal frame with the field direction as the new z axis
Eigen::Matrix3d field_frame(const Eigen::Vector3d& m) {
  const Eigen::Vector3d ref =
      std::abs(m.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d x_axis = (ref - ref.dot(m) * m).normalized();
  const Eigen::Vector3d y_axis = m.cross(x_axis);
  Eigen::Matrix3d rot;
  rot.row(0) = x_axis;
  rot.row(1) = y_axis;
  rot.row(2) = m;
  return rot;
}

FieldDirection direction_at(const Scenario::Field& field, double phi_deg) {
  FieldDirection dir;
  dir.gauss = field.gauss;
  dir.theta_deg = field.theta_deg;
  dir.phi_deg = phi_deg;
  return dir;
}

double scan_phi(const Scenario& scenario) {
  const auto& field = *scenario.field;
  if (field.phi_deg) return *field.phi_deg;
  if (!field.phi_list_deg.empty()) return field.phi_list_deg.front();
  throw schema_error("scenario: scans over positions need field.phi_deg or phi_list_deg");
}

// geometric targets expressed in the frame of one field direction
IndependentSpins position_system(const Scenario& scenario, const FieldDirection& dir,
                                 const PhysicalConstants& constants) {
  const Eigen::Matrix3d rot = field_frame(dir.unit());
  IndependentSpins spins;
  const auto& targets = *scenario.positions;
  for (const auto& target : targets) {
    TargetGeometry geom;
    geom.position_angstrom = target.xyz_angstrom;
    geom.species = target.species;
    geom.gamma_n = constants.gamma_for(target.species);
    const HyperfineVector h = hyperfine_from_position(geom, constants);
    spins.hyperfine.push_back(rot * h.vec());
    spins.larmor.push_back(larmor_frequency(geom.gamma_n, dir.gauss));
  }
  if (scenario.dipolar) {
    spins.enable_dipolar = true;
    for (std::size_t i = 0; i < targets.size(); ++i)
      for (std::size_t j = i + 1; j < targets.size(); ++j) {
        const Eigen::Vector3d sep = targets[j].xyz_angstrom - targets[i].xyz_angstrom;
        const double r_m = sep.norm() * kAngstromToMeter;
        if (!(r_m > 0.0)) throw numeric_error("position targets coincide");
        IndependentSpins::DipolarCoupling pair;
        pair.i = static_cast<int>(i);
        pair.j = static_cast<int>(j);
        pair.d = constants.mu0 * constants.hbar *
                 constants.gamma_for(targets[i].species) *
                 constants.gamma_for(targets[j].species) /
                 (4.0 * kPi * r_m * r_m * r_m) * kRadPerSecToRadPerUs;
        pair.r_hat = rot * sep.normalized();
        spins.dipolar.push_back(pair);
      }
  }
  return spins;
}

TargetSystem cluster_system(const Scenario::Cluster& cluster) {
  if (cluster.type == "ladder") {
    SpinJLadder sys;
    sys.j = cluster.j;
    sys.energies = cluster.energies;
    sys.lambda = cluster.lambda;
    return sys;
  }
  if (cluster.type == "pair") {
    CoupledPair sys;
    sys.omega_a = cluster.omega_a;
    sys.omega_b = cluster.omega_b;
    sys.lambda = cluster.lambda;
    sys.mu = cluster.mu;
    return sys;
  }
  if (cluster.type == "type_ii") return make_type_ii(cluster.lambda, cluster.omega_a, cluster.omega_b);
  if (cluster.type == "type_v") return make_type_v(cluster.lambda_v, cluster.omega_a, cluster.omega_b);

  GenericCluster sys;
  sys.energies = cluster.energies;
  const std::size_t dim = cluster.energies.size();
  sys.beta = ComplexMatrix::Zero(dim, dim);
  if (cluster.beta_re.size() != dim)
    throw schema_error("scenario: generic cluster beta_re dimension mismatch");
  for (std::size_t r = 0; r < dim; ++r) {
    if (cluster.beta_re[r].size() != dim)
      throw schema_error("scenario: generic cluster beta_re row size mismatch");
    for (std::size_t cidx = 0; cidx < dim; ++cidx) {
      double im = 0.0;
      if (!cluster.beta_im.empty()) im = cluster.beta_im.at(r).at(cidx);
      sys.beta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cidx)) =
          Complex(cluster.beta_re[r][cidx], im);
    }
  }
  return sys;
}

TargetSystem scenario_system(const Scenario& scenario, const RunOptions& options) {
  if (scenario.hyperfine) {
    IndependentSpins spins;
    spins.hyperfine = scenario.hyperfine->vectors;
    if (scenario.hyperfine->omegas.empty())
      spins.larmor.assign(spins.hyperfine.size(), scenario.hyperfine->omega0);
    else
      spins.larmor = scenario.hyperfine->omegas;
    return spins;
  }
  if (scenario.positions) {
    if (!scenario.field) throw schema_error("scenario: positions targets need a field block");
    return position_system(scenario, direction_at(*scenario.field, scan_phi(scenario)),
                           options.constants);
  }
  if (scenario.cluster) return cluster_system(*scenario.cluster);
  throw schema_error("scenario: this subcommand needs a targets block");
}

// reference frequency for resonant timing
double resonance_omega(const Scenario& scenario, const RunOptions& options) {
  if (scenario.sequence && scenario.sequence->omega_ref) return *scenario.sequence->omega_ref;
  if (scenario.hyperfine) {
    if (!scenario.hyperfine->omegas.empty()) return scenario.hyperfine->omegas.front();
    return scenario.hyperfine->omega0;
  }
  if (scenario.positions) {
    if (!scenario.field) throw schema_error("scenario: positions targets need a field block");
    const double gamma = options.constants.gamma_for(scenario.positions->front().species);
    return larmor_frequency(gamma, scenario.field->gauss);
  }
  if (scenario.cluster) {
    const auto& c = *scenario.cluster;
    if (c.type == "type_ii" || c.type == "type_v") return c.omega_a;
    if (c.type == "pair") return c.resonant_with == "shifted" ? c.omega_a + c.mu : c.omega_a;
    if (c.resonant_omega > 0.0) return c.resonant_omega;
    throw schema_error("scenario: cluster needs resonant_omega for resonant timing");
  }
  throw schema_error("scenario: no omega reference available");
}

double resolve_tau(const Scenario& scenario, const RunOptions& options) {
  if (!scenario.sequence) throw schema_error("scenario: missing sequence block");
  if (scenario.sequence->tau) return *scenario.sequence->tau;
  if (scenario.sequence->resonant_q)
    return resonant_tau(resonance_omega(scenario, options), *scenario.sequence->resonant_q);
  throw schema_error("scenario: sequence needs tau or resonant_q");
}

std::array<int, 2> resolve_n_range(const Scenario& scenario) {
  if (!scenario.sequence) throw schema_error("scenario: missing sequence block");
  if (scenario.sequence->n_range) return *scenario.sequence->n_range;
  if (scenario.sequence->n) return {0, *scenario.sequence->n};
  throw schema_error("scenario: sequence needs n or n_range");
}

// transverse couplings and per-spin frequencies for the closed-form models
struct SpinList {
  std::vector<double> a_perp;
  std::vector<double> omega;
};

SpinList spin_list(const TargetSystem& sys) {
  const auto* spins = std::get_if<IndependentSpins>(&sys);
  if (spins == nullptr)
    throw schema_error("scenario: this model needs independent-spin targets");
  SpinList list;
  for (int k = 0; k < spins->count(); ++k) {
    const auto& a = spins->hyperfine[static_cast<std::size_t>(k)];
    list.a_perp.push_back(std::hypot(a.x(), a.y()));
    list.omega.push_back(spins->larmor[static_cast<std::size_t>(k)]);
  }
  return list;
}

double closed_form_value(const Scenario& scenario, const SpinList& spins, double g,
                         int n, double tau) {
  if (scenario.model == "semiclassical") {
    double exponent = 0.0;
    if (n > 0) {
      const DDSequence seq(n, tau);
      for (std::size_t k = 0; k < spins.a_perp.size(); ++k) {
        const double f = filter_value(spins.omega[k], seq);
        const double ga = g * spins.a_perp[k];
        exponent += ga * ga * f * f / (8.0 * spins.omega[k] * spins.omega[k]);
      }
    }
    return std::exp(-exponent);
  }
  double value = 1.0;
  for (std::size_t k = 0; k < spins.a_perp.size(); ++k)
    value *= single_spin_coherence(g * spins.a_perp[k], spins.omega[k], n, tau);
  return value;
}

double cluster_dip_value(const Scenario::Cluster& c, int n) {
  if (c.type == "type_ii") return type_ii_dip(c.lambda, c.omega_a, n);
  if (c.type == "type_v") return type_v_dip(c.lambda_v, c.omega_a, n);
  if (c.type == "ladder") {
    if (!(c.resonant_omega > 0.0))
      throw schema_error("scenario: analytic ladder scan needs resonant_omega");
    return ladder_dip(c.j, c.j - 1.0, c.lambda, c.resonant_omega, n);
  }
  if (c.type == "pair") {
    if (c.resonant_with == "shifted" && c.mu != 0.0)
      return generic_cluster_dip(0.5 * c.lambda, c.omega_a + c.mu, 4, n);
    return type_ii_dip(c.lambda, c.omega_a, n);
  }
  throw schema_error("scenario: analytic model unavailable for generic clusters");
}

CoherenceTrace closed_form_pulse_trace(const Scenario& scenario, const RunOptions& options) {
  const auto range = resolve_n_range(scenario);
  const double tau = resolve_tau(scenario, options);
  const double g = sensor_g(sensor_kind(scenario));

  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseNumber;
  trace.sensor = sensor_kind(scenario);
  trace.fixed_tau = tau;
  trace.system_digest = scenario.model;

  if (scenario.cluster && scenario.model == "analytic") {
    if (!scenario.sequence || !scenario.sequence->resonant_q)
      throw schema_error("scenario: analytic cluster scans need resonant timing");
    for (int n = range[0]; n <= range[1]; ++n) {
      trace.abscissa.push_back(n);
      trace.values.push_back(Complex(cluster_dip_value(*scenario.cluster, n), 0.0));
    }
    return trace;
  }

  const SpinList spins = spin_list(scenario_system(scenario, options));
  for (int n = range[0]; n <= range[1]; ++n) {
    trace.abscissa.push_back(n);
    trace.values.push_back(Complex(closed_form_value(scenario, spins, g, n, tau), 0.0));
  }
  return trace;
}

json trace_meta(const CoherenceTrace& trace) {
  json meta;
  meta["system"] = trace.system_digest;
  meta["sensor"] = sensor_name(trace.sensor);
  if (trace.axis == TraceAxis::PulseNumber)
    meta["tau"] = trace.fixed_tau;
  else
    meta["n_pulses"] = trace.fixed_n;
  return meta;
}

}  // namespace

CoherenceTrace scenario_pulse_trace(const Scenario& scenario, const RunOptions& options) {
  if (scenario.model != "exact") return closed_form_pulse_trace(scenario, options);
  const auto range = resolve_n_range(scenario);
  const double tau = resolve_tau(scenario, options);
  return pulse_scan(scenario_system(scenario, options), sensor_kind(scenario), tau,
                    range[0], range[1]);
}

CoherenceTrace scenario_tau_trace(const Scenario& scenario, const RunOptions& options) {
  if (!scenario.sequence || !scenario.sequence->tau_range)
    throw schema_error("scenario: tau scans need sequence.tau_range");
  if (!scenario.sequence->n)
    throw schema_error("scenario: tau scans need a fixed sequence.n");
  const auto range = *scenario.sequence->tau_range;
  const int samples = scenario.sequence->tau_samples;
  const int n = *scenario.sequence->n;

  if (scenario.model == "exact")
    return tau_scan(scenario_system(scenario, options), sensor_kind(scenario), n, range[0],
                    range[1], samples);

  const SpinList spins = spin_list(scenario_system(scenario, options));
  const double g = sensor_g(sensor_kind(scenario));
  CoherenceTrace trace;
  trace.axis = TraceAxis::PulseInterval;
  trace.sensor = sensor_kind(scenario);
  trace.fixed_n = n;
  trace.system_digest = scenario.model;
  const double step = (range[1] - range[0]) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double tau = range[0] + i * step;
    trace.abscissa.push_back(tau);
    trace.values.push_back(Complex(closed_form_value(scenario, spins, g, n, tau), 0.0));
  }
  return trace;
}

std::string trace_to_csv(const CoherenceTrace& trace) {
  std::ostringstream out;
  out << (trace.axis == TraceAxis::PulseNumber ? "N" : "tau") << ",L_real,L_imag\n";
  for (std::size_t i = 0; i < trace.abscissa.size(); ++i)
    out << format_double(trace.abscissa[i]) << ',' << format_double(trace.values[i].real())
        << ',' << format_double(trace.values[i].imag()) << '\n';
  return out.str();
}

std::string trace_to_json(const CoherenceTrace& trace) {
  json doc;
  doc["schema_version"] = 1;
  doc["axis"] = trace.axis == TraceAxis::PulseNumber ? "pulse_number" : "pulse_interval";
  doc["meta"] = trace_meta(trace);
  doc["abscissa"] = trace.abscissa;
  json re = json::array(), im = json::array();
  for (const Complex& v : trace.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  doc["l_real"] = re;
  doc["l_imag"] = im;
  return doc.dump(2);
}

std::string run_scan_tau(const Scenario& scenario, const RunOptions& options) {
  const CoherenceTrace trace = scenario_tau_trace(scenario, options);
  return options.format == "json" ? trace_to_json(trace) : trace_to_csv(trace);
}

std::string run_scan_pulses(const Scenario& scenario, const RunOptions& options) {
  const CoherenceTrace trace = scenario_pulse_trace(scenario, options);
  return options.format == "json" ? trace_to_json(trace) : trace_to_csv(trace);
}

std::string run_fingerprint(const Scenario& scenario, const RunOptions& options) {
  const CoherenceTrace trace = scenario_pulse_trace(scenario, options);
  const double omega0 = resonance_omega(scenario, options);
  const double g = sensor_g(sensor_kind(scenario));
  const FingerprintReport report = fingerprint_report(trace, omega0, g);

  json doc;
  doc["schema_version"] = 1;
  doc["omega0"] = omega0;
  doc["g"] = g;
  doc["n_detected"] = report.n_detected;
  doc["threshold"] = report.threshold;
  doc["dip_min"] = report.dip_min;
  if (report.inferred_dimension)
    doc["inferred_dimension"] = *report.inferred_dimension;
  else
    doc["inferred_dimension"] = nullptr;
  json couplings = json::array();
  for (const auto& est : report.couplings) {
    json entry;
    entry["a_perp"] = est.a_perp;
    entry["std_err"] = est.std_err;
    entry["claimed_zeros"] = est.claimed_zeros;
    couplings.push_back(entry);
  }
  doc["couplings"] = couplings;
  json pairs = json::array();
  for (const auto& [a, b] : report.unresolved_pairs) pairs.push_back({a, b});
  doc["unresolved_pairs"] = pairs;
  return doc.dump(2);
}

std::string run_classify(const Scenario& scenario, const RunOptions& options) {
  const CoherenceTrace trace = scenario_pulse_trace(scenario, options);
  const CorrelationClass result = classify_correlation(trace);

  json doc;
  doc["schema_version"] = 1;
  doc["dip_min"] = result.dip_min;
  doc["dimension"] = result.dimension;
  doc["confidence"] = result.confidence;

  // coupled pairs also get the transition-splitting comparison
  if (scenario.cluster && scenario.cluster->type == "pair") {
    Scenario shifted = scenario;
    shifted.cluster->resonant_with = "shifted";
    Scenario bare = scenario;
    bare.cluster->resonant_with = "bare";
    const SplittingReport split = detect_splitting(scenario_pulse_trace(shifted, options),
                                                   scenario_pulse_trace(bare, options));
    doc["splitting"]["split"] = split.split;
    doc["splitting"]["regime"] = split.regime == SplitRegime::Split        ? "split"
                                 : split.regime == SplitRegime::Degenerate ? "degenerate"
                                                                           : "indeterminate";
    doc["splitting"]["dip_min_shifted"] = split.dip_min_shifted;
    doc["splitting"]["dip_min_reference"] = split.dip_min_reference;
  }
  return doc.dump(2);
}

std::string run_sweep_field(const Scenario& scenario, const RunOptions& options) {
  if (!scenario.positions)
    throw schema_error("scenario: sweep-field needs geometric position targets");
  if (!scenario.field) throw schema_error("scenario: sweep-field needs a field block");

  std::vector<double> phis;
  if (scenario.field->phi_grid_deg) {
    const auto& grid = *scenario.field->phi_grid_deg;
    const int count = static_cast<int>(grid[2]);
    if (count < 2) throw schema_error("scenario: phi_grid_deg count must be >= 2");
    for (int i = 0; i < count; ++i)
      phis.push_back(grid[0] + (grid[1] - grid[0]) * i / (count - 1));
  } else if (!scenario.field->phi_list_deg.empty()) {
    phis = scenario.field->phi_list_deg;
  } else {
    throw schema_error("scenario: sweep-field needs phi_grid_deg or phi_list_deg");
  }

  const auto range = resolve_n_range(scenario);
  const double tau = resolve_tau(scenario, options);

  std::ostringstream out;
  out << "phi_deg,N,L_real,L_imag\n";
  for (double phi : phis) {
    const IndependentSpins system =
        position_system(scenario, direction_at(*scenario.field, phi), options.constants);
    const CoherenceTrace trace =
        pulse_scan(system, sensor_kind(scenario), tau, range[0], range[1]);
    for (std::size_t i = 0; i < trace.abscissa.size(); ++i)
      out << format_double(phi) << ',' << format_double(trace.abscissa[i]) << ','
          << format_double(trace.values[i].real()) << ','
          << format_double(trace.values[i].imag()) << '\n';
  }
  return out.str();
}

std::string run_reconstruct(const Scenario& scenario, const RunOptions& options) {
  if (!scenario.positions)
    throw schema_error("scenario: reconstruct needs geometric position targets");
  if (!scenario.field) throw schema_error("scenario: reconstruct needs a field block");
  if (scenario.field->phi_list_deg.size() != 3)
    throw inversion_error(
        "reconstruct: under-determined, need exactly three field directions "
        "(field.phi_list_deg)");

  const std::string species = scenario.positions->front().species;
  for (const auto& target : *scenario.positions)
    if (target.species != species)
      throw inversion_error("reconstruct: all targets must share one species");
  const double gamma = options.constants.gamma_for(species);

  std::array<FieldDirection, 3> directions{
      direction_at(*scenario.field, scenario.field->phi_list_deg[0]),
      direction_at(*scenario.field, scenario.field->phi_list_deg[1]),
      direction_at(*scenario.field, scenario.field->phi_list_deg[2])};

  // two mid-azimuths from the sweep serve as verification data for branch selection
  const std::array<FieldDirection, 3> verify{
      direction_at(*scenario.field, 0.5 * (scenario.field->phi_list_deg[0] +
                                           scenario.field->phi_list_deg[1])),
      direction_at(*scenario.field, 0.5 * (scenario.field->phi_list_deg[1] +
                                           scenario.field->phi_list_deg[2])),
      direction_at(*scenario.field, scenario.field->phi_list_deg[2])};

  const double g = sensor_g(sensor_kind(scenario));
  std::vector<TargetObservation> observations;
  for (const auto& target : *scenario.positions) {
    TargetGeometry geom;
    geom.position_angstrom = target.xyz_angstrom;
    geom.species = target.species;
    geom.gamma_n = gamma;
    const auto periods = forward_periods(geom, directions, g, options.constants);
    const auto extra = forward_periods(geom, verify, g, options.constants);
    TargetObservation obs;
    obs.name = target.name;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!periods[i])
        throw inversion_error("reconstruct: target " + target.name +
                              " unobservable along direction " + std::to_string(i));
      obs.periods[i] = *periods[i];
    }
    for (std::size_t i = 0; i < 2; ++i)
      if (extra[i]) obs.verify_periods.push_back(*extra[i]);
    observations.push_back(std::move(obs));
  }

  ReconstructionOptions opts;
  opts.g = g;
  opts.noise_sigma = scenario.analysis.noise_sigma;
  opts.mc_samples = scenario.analysis.mc_samples;
  opts.seed = options.seed.value_or(scenario.seed);
  opts.workers = options.workers;
  opts.surface_z = scenario.analysis.surface_z;
  opts.verify_directions = {verify[0], verify[1]};

  const ReconstructionResult result =
      reconstruct(observations, directions, gamma, opts, options.constants);

  json doc;
  doc["schema_version"] = 1;
  doc["seed"] = opts.seed;
  doc["mc_samples"] = result.mc_samples;
  json targets = json::array();
  for (const auto& target : result.targets) {
    json entry;
    entry["name"] = target.name;
    entry["hyperfine"]["A"] = target.hyperfine.magnitude;
    entry["hyperfine"]["a"] = {target.hyperfine.unit.x(), target.hyperfine.unit.y(),
                               target.hyperfine.unit.z()};
    json candidates = json::array();
    for (const auto& pos : target.candidate_positions)
      candidates.push_back({pos.x(), pos.y(), pos.z()});
    entry["candidates"] = candidates;
    entry["position"]["x"] = target.position.x();
    entry["position"]["y"] = target.position.y();
    entry["position"]["z"] = target.position.z();
    entry["sigma"]["x"] = target.sigma.x();
    entry["sigma"]["y"] = target.sigma.y();
    entry["sigma"]["z"] = target.sigma.z();
    for (std::size_t i = 0; i < 3; ++i)
      entry["periods"][std::to_string(i)] = target.periods[i];
    entry["branch_ambiguous"] = target.branch_ambiguous;
    targets.push_back(entry);
  }
  doc["targets"] = targets;
  return doc.dump(2);
}

std::string run_budget(const Scenario& scenario, const RunOptions&) {
  if (!scenario.budget) throw schema_error("scenario: budget subcommand needs a budget block");
  const auto& b = *scenario.budget;
  const MeasurementBudget result =
      measurement_budget(b.a_perp, b.readout_fidelity, b.target_sigma, b.t_init_readout_us);
  json doc;
  doc["schema_version"] = 1;
  doc["shots"] = result.shots;
  doc["t_dd_us"] = result.t_dd_us;
  doc["total_s"] = result.total_s;
  return doc.dump(2);
}

}  // namespace spinscope
