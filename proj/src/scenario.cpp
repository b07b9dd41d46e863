#include "spinscope/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spinscope/errors.hpp"

namespace spinscope {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (const auto& item : obj.items())
    if (allowed.find(item.key()) == allowed.end())
      throw schema_error("scenario: unknown key '" + item.key() + "' in " + context);
}

double number_at(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key))
    throw schema_error("scenario: missing '" + key + "' in " + context);
  if (!obj.at(key).is_number())
    throw schema_error("scenario: '" + key + "' must be a number in " + context);
  return obj.at(key).get<double>();
}

Eigen::Vector3d vector3_at(const json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3)
    throw schema_error("scenario: expected a 3-vector in " + context);
  return {value.at(0).get<double>(), value.at(1).get<double>(), value.at(2).get<double>()};
}

Scenario::Sensor parse_sensor(const json& obj) {
  reject_unknown_keys(obj, {"kind", "nv_depth_nm"}, "sensor");
  Scenario::Sensor sensor;
  sensor.kind = obj.value("kind", "spin_half");
  if (sensor.kind != "spin_half" && sensor.kind != "nv")
    throw schema_error("scenario: sensor.kind must be 'spin_half' or 'nv'");
  if (obj.contains("nv_depth_nm")) sensor.nv_depth_nm = obj.at("nv_depth_nm").get<double>();
  return sensor;
}

std::vector<Scenario::PositionTarget> parse_positions(const json& arr) {
  if (!arr.is_array() || arr.empty())
    throw schema_error("scenario: targets.positions must be a non-empty array");
  std::vector<Scenario::PositionTarget> out;
  for (const auto& entry : arr) {
    reject_unknown_keys(entry, {"name", "xyz_angstrom", "species"}, "targets.positions[]");
    Scenario::PositionTarget target;
    target.name = entry.value("name", "target-" + std::to_string(out.size() + 1));
    if (!entry.contains("xyz_angstrom"))
      throw schema_error("scenario: position target missing xyz_angstrom");
    target.xyz_angstrom = vector3_at(entry.at("xyz_angstrom"), "xyz_angstrom");
    if (!entry.contains("species"))
      throw schema_error("scenario: position target missing species");
    target.species = entry.at("species").get<std::string>();
    out.push_back(std::move(target));
  }
  return out;
}

Scenario::HyperfineTargets parse_hyperfine(const json& obj) {
  reject_unknown_keys(obj, {"omega0", "vectors", "omegas"}, "targets.hyperfine");
  Scenario::HyperfineTargets targets;
  targets.omega0 = number_at(obj, "omega0", "targets.hyperfine");
  if (!obj.contains("vectors") || !obj.at("vectors").is_array() || obj.at("vectors").empty())
    throw schema_error("scenario: targets.hyperfine.vectors must be a non-empty array");
  for (const auto& v : obj.at("vectors"))
    targets.vectors.push_back(vector3_at(v, "targets.hyperfine.vectors[]"));
  if (obj.contains("omegas")) {
    for (const auto& w : obj.at("omegas")) targets.omegas.push_back(w.get<double>());
    if (targets.omegas.size() != targets.vectors.size())
      throw schema_error("scenario: targets.hyperfine.omegas size mismatch");
  }
  return targets;
}

std::vector<std::vector<double>> parse_matrix(const json& value, const std::string& context) {
  if (!value.is_array())
    throw schema_error("scenario: expected a matrix in " + context);
  std::vector<std::vector<double>> out;
  for (const auto& row : value) {
    if (!row.is_array())
      throw schema_error("scenario: expected matrix rows in " + context);
    out.emplace_back();
    for (const auto& x : row) out.back().push_back(x.get<double>());
  }
  return out;
}

Scenario::Cluster parse_cluster(const json& obj) {
  reject_unknown_keys(obj,
                      {"type", "j", "energies", "lambda", "lambda_v", "omega_a", "omega_b",
                       "mu", "resonant_omega", "resonant_with", "beta_re", "beta_im"},
                      "targets.cluster");
  Scenario::Cluster cluster;
  if (!obj.contains("type"))
    throw schema_error("scenario: targets.cluster missing type");
  cluster.type = obj.at("type").get<std::string>();
  const std::set<std::string> kinds{"ladder", "pair", "generic", "type_ii", "type_v"};
  if (kinds.find(cluster.type) == kinds.end())
    throw schema_error("scenario: unknown cluster type '" + cluster.type + "'");

  if (cluster.type == "ladder") {
    cluster.j = number_at(obj, "j", "cluster");
    cluster.lambda = number_at(obj, "lambda", "cluster");
    if (!obj.contains("energies"))
      throw schema_error("scenario: ladder cluster missing energies");
    for (const auto& e : obj.at("energies")) cluster.energies.push_back(e.get<double>());
    cluster.resonant_omega = obj.value("resonant_omega", 0.0);
  } else if (cluster.type == "pair") {
    cluster.omega_a = number_at(obj, "omega_a", "cluster");
    cluster.omega_b = number_at(obj, "omega_b", "cluster");
    cluster.lambda = number_at(obj, "lambda", "cluster");
    cluster.mu = obj.value("mu", 0.0);
    cluster.resonant_with = obj.value("resonant_with", "shifted");
    if (cluster.resonant_with != "shifted" && cluster.resonant_with != "bare")
      throw schema_error("scenario: pair resonant_with must be 'shifted' or 'bare'");
  } else if (cluster.type == "generic") {
    if (!obj.contains("energies"))
      throw schema_error("scenario: generic cluster missing energies");
    for (const auto& e : obj.at("energies")) cluster.energies.push_back(e.get<double>());
    cluster.beta_re = parse_matrix(obj.at("beta_re"), "cluster.beta_re");
    if (obj.contains("beta_im"))
      cluster.beta_im = parse_matrix(obj.at("beta_im"), "cluster.beta_im");
    cluster.resonant_omega = obj.value("resonant_omega", 0.0);
  } else if (cluster.type == "type_ii") {
    cluster.lambda = number_at(obj, "lambda", "cluster");
    cluster.omega_a = number_at(obj, "omega_a", "cluster");
    cluster.omega_b = number_at(obj, "omega_b", "cluster");
  } else {  // type_v
    cluster.lambda_v = number_at(obj, "lambda_v", "cluster");
    cluster.omega_a = number_at(obj, "omega_a", "cluster");
    cluster.omega_b = number_at(obj, "omega_b", "cluster");
  }
  return cluster;
}

Scenario::Field parse_field(const json& obj) {
  reject_unknown_keys(obj, {"gauss", "theta_deg", "phi_deg", "phi_list_deg", "phi_grid_deg"},
                      "field");
  Scenario::Field field;
  field.gauss = number_at(obj, "gauss", "field");
  field.theta_deg = number_at(obj, "theta_deg", "field");
  if (obj.contains("phi_deg")) field.phi_deg = obj.at("phi_deg").get<double>();
  if (obj.contains("phi_list_deg"))
    for (const auto& phi : obj.at("phi_list_deg")) field.phi_list_deg.push_back(phi.get<double>());
  if (obj.contains("phi_grid_deg")) {
    const auto& grid = obj.at("phi_grid_deg");
    if (!grid.is_array() || grid.size() != 3)
      throw schema_error("scenario: field.phi_grid_deg must be [start, stop, count]");
    field.phi_grid_deg = {grid.at(0).get<double>(), grid.at(1).get<double>(),
                          grid.at(2).get<double>()};
  }
  return field;
}

Scenario::Sequence parse_sequence(const json& obj) {
  reject_unknown_keys(
      obj, {"n", "n_range", "tau", "resonant_q", "omega_ref", "tau_range", "tau_samples"},
      "sequence");
  Scenario::Sequence seq;
  if (obj.contains("n")) seq.n = obj.at("n").get<int>();
  if (obj.contains("n_range")) {
    const auto& range = obj.at("n_range");
    if (!range.is_array() || range.size() != 2)
      throw schema_error("scenario: sequence.n_range must be [lo, hi]");
    seq.n_range = {range.at(0).get<int>(), range.at(1).get<int>()};
  }
  if (obj.contains("tau")) seq.tau = obj.at("tau").get<double>();
  if (obj.contains("resonant_q")) seq.resonant_q = obj.at("resonant_q").get<int>();
  if (obj.contains("omega_ref")) seq.omega_ref = obj.at("omega_ref").get<double>();
  if (obj.contains("tau_range")) {
    const auto& range = obj.at("tau_range");
    if (!range.is_array() || range.size() != 2)
      throw schema_error("scenario: sequence.tau_range must be [lo, hi]");
    seq.tau_range = {range.at(0).get<double>(), range.at(1).get<double>()};
  }
  seq.tau_samples = obj.value("tau_samples", 400);
  if (seq.tau && seq.resonant_q)
    throw schema_error("scenario: sequence.tau and sequence.resonant_q are exclusive");
  return seq;
}

Scenario::Budget parse_budget(const json& obj) {
  reject_unknown_keys(obj, {"a_perp", "readout_fidelity", "target_sigma", "t_init_readout_us"},
                      "budget");
  Scenario::Budget budget;
  budget.a_perp = number_at(obj, "a_perp", "budget");
  budget.readout_fidelity = number_at(obj, "readout_fidelity", "budget");
  budget.target_sigma = number_at(obj, "target_sigma", "budget");
  budget.t_init_readout_us = obj.value("t_init_readout_us", 1.0);
  return budget;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& err) {
    throw schema_error("scenario: invalid JSON: " + std::string(err.what()));
  }
  if (!doc.is_object()) throw schema_error("scenario: root must be an object");
  reject_unknown_keys(doc,
                      {"schema_version", "name", "notes", "seed", "sensor", "targets",
                       "field", "sequence", "model", "analysis", "budget", "dipolar"},
                      "root");

  Scenario scenario;
  if (!doc.contains("schema_version"))
    throw schema_error("scenario: missing schema_version");
  scenario.schema_version = doc.at("schema_version").get<int>();
  if (scenario.schema_version != 1)
    throw schema_error("scenario: unsupported schema_version");

  scenario.name = doc.value("name", "");
  scenario.notes = doc.value("notes", "");
  scenario.seed = doc.value("seed", 1ull);
  if (doc.contains("sensor")) scenario.sensor = parse_sensor(doc.at("sensor"));
  scenario.model = doc.value("model", "exact");
  if (scenario.model != "exact" && scenario.model != "analytic" &&
      scenario.model != "semiclassical")
    throw schema_error("scenario: model must be exact, analytic, or semiclassical");
  scenario.dipolar = doc.value("dipolar", false);

  if (doc.contains("targets")) {
    const json& targets = doc.at("targets");
    reject_unknown_keys(targets, {"positions", "hyperfine", "cluster"}, "targets");
    int styles = 0;
    if (targets.contains("positions")) {
      scenario.positions = parse_positions(targets.at("positions"));
      ++styles;
    }
    if (targets.contains("hyperfine")) {
      scenario.hyperfine = parse_hyperfine(targets.at("hyperfine"));
      ++styles;
    }
    if (targets.contains("cluster")) {
      scenario.cluster = parse_cluster(targets.at("cluster"));
      ++styles;
    }
    if (styles != 1)
      throw schema_error("scenario: targets must use exactly one specification style");
  }

  if (doc.contains("field")) scenario.field = parse_field(doc.at("field"));
  if (doc.contains("sequence")) scenario.sequence = parse_sequence(doc.at("sequence"));
  if (doc.contains("analysis")) {
    const json& analysis = doc.at("analysis");
    reject_unknown_keys(analysis, {"noise_sigma", "mc_samples", "surface_z"}, "analysis");
    scenario.analysis.noise_sigma = analysis.value("noise_sigma", 0.01);
    scenario.analysis.mc_samples = analysis.value("mc_samples", 500);
    scenario.analysis.surface_z = analysis.value("surface_z", 0.0);
  }
  if (doc.contains("budget")) scenario.budget = parse_budget(doc.at("budget"));
  return scenario;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("scenario: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& scenario) {
  json doc;
  doc["schema_version"] = scenario.schema_version;
  if (!scenario.name.empty()) doc["name"] = scenario.name;
  if (!scenario.notes.empty()) doc["notes"] = scenario.notes;
  doc["seed"] = scenario.seed;
  doc["sensor"]["kind"] = scenario.sensor.kind;
  if (scenario.sensor.nv_depth_nm) doc["sensor"]["nv_depth_nm"] = *scenario.sensor.nv_depth_nm;
  doc["model"] = scenario.model;
  if (scenario.dipolar) doc["dipolar"] = true;

  if (scenario.positions) {
    json arr = json::array();
    for (const auto& target : *scenario.positions) {
      json entry;
      entry["name"] = target.name;
      entry["xyz_angstrom"] = {target.xyz_angstrom.x(), target.xyz_angstrom.y(),
                               target.xyz_angstrom.z()};
      entry["species"] = target.species;
      arr.push_back(entry);
    }
    doc["targets"]["positions"] = arr;
  }
  if (scenario.hyperfine) {
    json obj;
    obj["omega0"] = scenario.hyperfine->omega0;
    json vecs = json::array();
    for (const auto& v : scenario.hyperfine->vectors) vecs.push_back({v.x(), v.y(), v.z()});
    obj["vectors"] = vecs;
    if (!scenario.hyperfine->omegas.empty()) obj["omegas"] = scenario.hyperfine->omegas;
    doc["targets"]["hyperfine"] = obj;
  }
  if (scenario.cluster) {
    const auto& c = *scenario.cluster;
    json obj;
    obj["type"] = c.type;
    if (c.type == "ladder") {
      obj["j"] = c.j;
      obj["energies"] = c.energies;
      obj["lambda"] = c.lambda;
      if (c.resonant_omega != 0.0) obj["resonant_omega"] = c.resonant_omega;
    } else if (c.type == "pair") {
      obj["omega_a"] = c.omega_a;
      obj["omega_b"] = c.omega_b;
      obj["lambda"] = c.lambda;
      obj["mu"] = c.mu;
      obj["resonant_with"] = c.resonant_with;
    } else if (c.type == "generic") {
      obj["energies"] = c.energies;
      obj["beta_re"] = c.beta_re;
      if (!c.beta_im.empty()) obj["beta_im"] = c.beta_im;
      if (c.resonant_omega != 0.0) obj["resonant_omega"] = c.resonant_omega;
    } else if (c.type == "type_ii") {
      obj["lambda"] = c.lambda;
      obj["omega_a"] = c.omega_a;
      obj["omega_b"] = c.omega_b;
    } else {
      obj["lambda_v"] = c.lambda_v;
      obj["omega_a"] = c.omega_a;
      obj["omega_b"] = c.omega_b;
    }
    doc["targets"]["cluster"] = obj;
  }
  if (scenario.field) {
    json obj;
    obj["gauss"] = scenario.field->gauss;
    obj["theta_deg"] = scenario.field->theta_deg;
    if (scenario.field->phi_deg) obj["phi_deg"] = *scenario.field->phi_deg;
    if (!scenario.field->phi_list_deg.empty()) obj["phi_list_deg"] = scenario.field->phi_list_deg;
    if (scenario.field->phi_grid_deg)
      obj["phi_grid_deg"] = {(*scenario.field->phi_grid_deg)[0],
                             (*scenario.field->phi_grid_deg)[1],
                             (*scenario.field->phi_grid_deg)[2]};
    doc["field"] = obj;
  }
  if (scenario.sequence) {
    json obj;
    if (scenario.sequence->n) obj["n"] = *scenario.sequence->n;
    if (scenario.sequence->n_range)
      obj["n_range"] = {(*scenario.sequence->n_range)[0], (*scenario.sequence->n_range)[1]};
    if (scenario.sequence->tau) obj["tau"] = *scenario.sequence->tau;
    if (scenario.sequence->resonant_q) obj["resonant_q"] = *scenario.sequence->resonant_q;
    if (scenario.sequence->omega_ref) obj["omega_ref"] = *scenario.sequence->omega_ref;
    if (scenario.sequence->tau_range)
      obj["tau_range"] = {(*scenario.sequence->tau_range)[0],
                          (*scenario.sequence->tau_range)[1]};
    obj["tau_samples"] = scenario.sequence->tau_samples;
    doc["sequence"] = obj;
  }
  doc["analysis"]["noise_sigma"] = scenario.analysis.noise_sigma;
  doc["analysis"]["mc_samples"] = scenario.analysis.mc_samples;
  doc["analysis"]["surface_z"] = scenario.analysis.surface_z;
  if (scenario.budget) {
    doc["budget"]["a_perp"] = scenario.budget->a_perp;
    doc["budget"]["readout_fidelity"] = scenario.budget->readout_fidelity;
    doc["budget"]["target_sigma"] = scenario.budget->target_sigma;
    doc["budget"]["t_init_readout_us"] = scenario.budget->t_init_readout_us;
  }
  return doc.dump(2);
}

}  // namespace spinscope
