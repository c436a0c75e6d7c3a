#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace toa::cli {

using Json = nlohmann::ordered_json;

/// One pass/fail statement with the number it was decided on.
struct Check {
  std::string name;
  double measured = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=", "|x-target|<=", "holds"
  double target = 0.0;
  bool pass = false;
};

Check at_most(std::string name, double measured, double limit);
Check at_least(std::string name, double measured, double limit);
Check within(std::string name, double measured, double target, double tolerance);
Check holds(std::string name, bool condition, double measured = 0.0);

struct Column {
  std::string name;
  std::string unit;
};

struct Series {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
};

struct Result {
  std::vector<Check> checks;
  std::vector<Series> series;
  Json values = Json::object();

  bool all_pass() const;
  const Check* find(std::string_view name) const;
};

struct RunContext {
  std::uint64_t seed = 1;
  /// Only build and validate the typed setup; skip the computation.
  bool dry_run = false;
};

struct Experiment {
  std::string name;
  std::string description;
  std::string topic;  // which part of the theory the run reproduces
  Json defaults;
  std::function<Result(const Json& params, const RunContext& ctx)> run;
};

/// Registered experiments in catalog order.
const std::vector<Experiment>& catalog();
const Experiment* find_experiment(std::string_view name);

/// Overlays `overrides` onto `defaults`. Every key must exist in the defaults
/// with a compatible type; anything else throws Error(Config).
Json merge_parameters(const Json& defaults, const Json& overrides, const std::string& path = "parameters");

/// A parsed configuration file.
struct RunConfig {
  std::string experiment;  // empty when the file does not name one
  Json parameters = Json::object();
  std::uint64_t seed = 1;
  bool has_seed = false;
  std::string output_dir;
};

/// Reads and structurally validates a configuration file (Error(Config) on failure).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const Json& doc);

/// Full run: merge, execute, return the result (errors propagate).
Result run_experiment(const Experiment& exp, const Json& overrides, const RunContext& ctx);

struct OutputPaths {
  std::string directory;
};

/// Writes series-*.csv, summary.json and manifest.json under <root>/<name>/.
/// Each file is written to a temporary and renamed into place.
OutputPaths write_outputs(const std::string& root, const Experiment& exp, const Json& parameters,
                          const RunContext& ctx, const Result& result, double wall_seconds);

/// Deterministic text forms (exposed for tests).
std::string to_csv(const Series& series);
Json summary_json(const Experiment& exp, const Result& result, std::uint64_t seed);

extern const char* const kVersion;

// Experiment entry points, grouped by source file.
Result run_trigger_flip(const Json& p, const RunContext& ctx);
Result run_multi_trigger(const Json& p, const RunContext& ctx);
Result run_clock_accuracy_scan(const Json& p, const RunContext& ctx);
Result run_two_gaussian(const Json& p, const RunContext& ctx);
Result run_zero_current(const Json& p, const RunContext& ctx);
Result run_cascade(const Json& p, const RunContext& ctx);
Result run_booster(const Json& p, const RunContext& ctx);
Result run_zeno_scan(const Json& p, const RunContext& ctx);
Result run_current_vs_arrival(const Json& p, const RunContext& ctx);
Result run_presence_vs_arrival(const Json& p, const RunContext& ctx);
Result run_toa_spectrum(const Json& p, const RunContext& ctx);
Result run_toa_drift(const Json& p, const RunContext& ctx);
Result run_toa_kernel(const Json& p, const RunContext& ctx);
Result run_coherent_energy(const Json& p, const RunContext& ctx);
Result run_eigenstate_trigger(const Json& p, const RunContext& ctx);

}  // namespace toa::cli
