#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "spinscope/constants.hpp"
#include "spinscope/exact.hpp"
#include "spinscope/scenario.hpp"

namespace spinscope {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  int workers = 1;
  std::string format = "csv";  // trace outputs: csv | json
  PhysicalConstants constants = PhysicalConstants::resolve();
};

// trace construction shared by the scan subcommands and the analysis commands
CoherenceTrace scenario_pulse_trace(const Scenario& scenario, const RunOptions& options);
CoherenceTrace scenario_tau_trace(const Scenario& scenario, const RunOptions& options);

std::string trace_to_csv(const CoherenceTrace& trace);
std::string trace_to_json(const CoherenceTrace& trace);

// subcommand bodies; all return the output document text
std::string run_scan_tau(const Scenario& scenario, const RunOptions& options);
std::string run_scan_pulses(const Scenario& scenario, const RunOptions& options);
std::string run_fingerprint(const Scenario& scenario, const RunOptions& options);
std::string run_classify(const Scenario& scenario, const RunOptions& options);
std::string run_sweep_field(const Scenario& scenario, const RunOptions& options);
std::string run_reconstruct(const Scenario& scenario, const RunOptions& options);
std::string run_budget(const Scenario& scenario, const RunOptions& options);

}  // namespace spinscope
