#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinscope/errors.hpp"
#include "spinscope/run.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallel = 1;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")->required();
  cmd->add_option("--out", args.out_path, "output path (stdout when omitted)");
  cmd->add_option("--seed", args.seed, "override the scenario seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--parallel", args.parallel, "worker threads for Monte-Carlo sweeps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", args.format, "trace output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void error_json(const std::string& kind, const std::string& message) {
  nlohmann::json doc;
  doc["error"]["kind"] = kind;
  doc["error"]["message"] = message;
  std::cerr << doc.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPMG sensor-coherence simulation and nuclear-spin localization"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    std::string (*fn)(const spinscope::Scenario&, const spinscope::RunOptions&);
  };
  const Sub subs[] = {
      {"scan-tau", "coherence versus pulse interval (CSV)", spinscope::run_scan_tau},
      {"scan-pulses", "coherence versus pulse number (CSV)", spinscope::run_scan_pulses},
      {"fingerprint", "dip zeros and coupling peeling report (JSON)",
       spinscope::run_fingerprint},
      {"classify", "correlation-dimension report (JSON)", spinscope::run_classify},
      {"sweep-field", "pulse-number scans over an azimuth grid (CSV)",
       spinscope::run_sweep_field},
      {"reconstruct", "invert dip periods into target positions (JSON)",
       spinscope::run_reconstruct},
      {"budget", "measurement-time estimate (JSON)", spinscope::run_budget},
  };

  CommonArgs args[std::size(subs)];
  for (std::size_t i = 0; i < std::size(subs); ++i)
    add_common(app.add_subcommand(subs[i].name, subs[i].help), args[i]);

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < std::size(subs); ++i) {
    CLI::App* cmd = app.get_subcommand(subs[i].name);
    if (!cmd->parsed()) continue;
    try {
      const spinscope::Scenario scenario =
          spinscope::parse_scenario_file(args[i].scenario_path);
      spinscope::RunOptions options;
      if (args[i].seed_set) options.seed = args[i].seed;
      options.workers = args[i].parallel;
      options.format = args[i].format;
      options.constants = spinscope::PhysicalConstants::resolve();
      emit(subs[i].fn(scenario, options), args[i].out_path);
      return 0;
    } catch (const spinscope::schema_error& err) {
      error_json("schema", err.what());
      return 2;
    } catch (const std::invalid_argument& err) {
      error_json("invalid_argument", err.what());
      return 3;
    } catch (const spinscope::numeric_error& err) {
      error_json("numeric", err.what());
      return 3;
    } catch (const spinscope::inversion_error& err) {
      error_json("inversion", err.what());
      return 3;
    } catch (const spinscope::analysis_error& err) {
      error_json("analysis", err.what());
      return 3;
    } catch (const std::exception& err) {
      error_json("internal", err.what());
      return 3;
    }
  }
  return 1;
}
