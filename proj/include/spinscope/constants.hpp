#pragma once

#include <map>
#include <optional>
#include <string>

namespace spinscope {

// SI constants and gyromagnetic ratios (rad s^-1 T^-1, signed); values follow
// CODATA and standard NMR tables and can be overridden from a JSON file or the
// SPINSCOPE_CONSTANTS environment variable
struct PhysicalConstants {
  double mu0 = 1.25663706212e-6;       // vacuum permeability, N A^-2
  double hbar = 1.054571817e-34;       // reduced Planck constant, J s
  double gamma_e = 1.76085963023e11;   // electron gyromagnetic ratio magnitude
  std::map<std::string, double> gamma_n = {
      {"H1", 2.6752218744e8},
      {"C13", 6.728284e7},
      {"N15", -2.71261804e7},
      {"P31", 1.08394e8},
  };

  double gamma_for(const std::string& species) const;

  static PhysicalConstants defaults() { return {}; }
  static PhysicalConstants load(const std::string& path);
  // env override when set, explicit path otherwise, built-in defaults last
  static PhysicalConstants resolve(const std::optional<std::string>& path = std::nullopt);
};

}  // namespace spinscope
