#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "toa/error.hpp"

namespace {

using namespace toa::cli;

constexpr const char* kOutputRootVar = "TOA_OUTPUT_ROOT";

void print_checks(const Result& r) {
  for (const auto& c : r.checks) {
    std::printf("%s  %-52s ", c.pass ? "PASS" : "FAIL", c.name.c_str());
    if (c.relation == "holds") {
      std::printf("(%s)\n", c.pass ? "holds" : "violated");
      continue;
    }
    std::printf("measured %.6g %s %.6g", c.measured, c.relation.c_str(), c.limit);
    if (c.relation == "|x-target|<=") std::printf(" (target %.6g)", c.target);
    std::printf("\n");
  }
}

int run_command(const std::string& name, const std::string& config_path, const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed, bool dry_run) {
  const Experiment* exp = find_experiment(name);
  if (!exp) {
    std::fprintf(stderr, "unknown experiment '%s' (see 'list')\n", name.c_str());
    return 2;
  }
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  if (!cfg.experiment.empty() && cfg.experiment != name)
    throw toa::Error(toa::ErrorKind::Config, "config is for '" + cfg.experiment + "', not '" + name + "'");

  RunContext ctx;
  ctx.seed = seed ? *seed : cfg.seed;
  ctx.dry_run = dry_run;
  const Json params = merge_parameters(exp->defaults, cfg.parameters);

  std::string root = "runs";
  if (out) {
    root = *out;
  } else if (const char* env = std::getenv(kOutputRootVar); env && *env) {
    root = env;
  } else if (!cfg.output_dir.empty()) {
    root = cfg.output_dir;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const Result result = exp->run(params, ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dry_run) {
    std::printf("%s: configuration valid\n", name.c_str());
    return 0;
  }
  const OutputPaths paths = write_outputs(root, *exp, params, ctx, result, wall);
  print_checks(result);
  std::printf("%s: %s in %.1f s, outputs in %s\n", name.c_str(), result.all_pass() ? "all checks pass" : "CHECK FAILED",
              wall, paths.directory.c_str());
  return result.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arrival-time measurement experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the registered experiments");

  std::string run_name;
  std::string run_config;
  std::optional<std::string> run_out;
  std::optional<std::uint64_t> run_seed;
  bool dry_run = false;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("name", run_name, "Experiment name")->required();
  run->add_option("--config", run_config, "JSON configuration file");
  run->add_option("--out", run_out, std::string("Output root (overrides ") + kOutputRootVar + " and output_dir)");
  run->add_option("--seed", run_seed, "Seed for randomized fixtures");
  run->add_flag("--dry-run", dry_run, "Validate the configuration without running");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("--config", validate_config, "JSON configuration file")->required();

  std::string show_name;
  auto* show = app.add_subcommand("show", "Print the default configuration of an experiment");
  show->add_option("name", show_name, "Experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      for (const auto& e : catalog()) std::printf("%-22s %-30s %s\n", e.name.c_str(), e.topic.c_str(), e.description.c_str());
      return 0;
    }
    if (*show) {
      const Experiment* exp = find_experiment(show_name);
      if (!exp) {
        std::fprintf(stderr, "unknown experiment '%s'\n", show_name.c_str());
        return 2;
      }
      Json doc;
      doc["experiment"] = exp->name;
      doc["seed"] = 1;
      doc["parameters"] = exp->defaults;
      std::cout << doc.dump(2) << "\n";
      return 0;
    }
    if (*validate) {
      const RunConfig cfg = load_config(validate_config);
      if (cfg.experiment.empty()) throw toa::Error(toa::ErrorKind::Config, "config does not name an experiment");
      return run_command(cfg.experiment, validate_config, std::nullopt, std::nullopt, true);
    }
    return run_command(run_name, run_config, run_out, run_seed, dry_run);
  } catch (const toa::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return toa::exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
