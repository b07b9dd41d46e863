#include "spinscope/constants.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "spinscope/errors.hpp"

namespace spinscope {

double PhysicalConstants::gamma_for(const std::string& species) const {
  const auto it = gamma_n.find(species);
  if (it == gamma_n.end())
    throw std::invalid_argument("unknown nuclear species: " + species);
  return it->second;
}

PhysicalConstants PhysicalConstants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema_error("cannot open constants file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw schema_error("constants file is not valid JSON: " + std::string(err.what()));
  }

  PhysicalConstants c;
  try {
    c.mu0 = doc.at("mu0_si").get<double>();
    c.hbar = doc.at("hbar_si").get<double>();
    c.gamma_e = doc.at("gamma_e_rad_per_s_per_t").get<double>();
    c.gamma_n.clear();
    for (const auto& [species, value] : doc.at("gamma_n_rad_per_s_per_t").items())
      c.gamma_n[species] = value.get<double>();
  } catch (const nlohmann::json::exception& err) {
    throw schema_error("constants file missing required fields: " + std::string(err.what()));
  }
  return c;
}

PhysicalConstants PhysicalConstants::resolve(const std::optional<std::string>& path) {
  if (const char* env = std::getenv("SPINSCOPE_CONSTANTS"); env != nullptr && *env != '\0')
    return load(env);
  if (path) return load(*path);
  return defaults();
}

}  // namespace spinscope
