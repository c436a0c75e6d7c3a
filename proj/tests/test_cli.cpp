#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "experiments.hpp"
#include "toa/error.hpp"

using namespace toa::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool config_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const toa::Error& e) {
    return e.kind() == toa::ErrorKind::Config;
  }
  return false;
}

}  // namespace

TEST_CASE("catalog lists every experiment once, in order") {
  const std::vector<std::string> expected{
      "trigger-flip",       "multi-trigger",       "clock-accuracy-scan", "two-gaussian", "zero-current",
      "zeno-scan",          "current-vs-arrival",  "presence-vs-arrival", "cascade",      "booster",
      "toa-spectrum",       "toa-drift",           "toa-kernel",          "coherent-energy",
      "eigenstate-trigger"};
  REQUIRE(catalog().size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const Experiment& e = catalog()[i];
    CHECK(e.name == expected[i]);
    CHECK_FALSE(e.topic.empty());
    CHECK_FALSE(e.description.empty());
    CHECK(e.defaults.is_object());
    CHECK(find_experiment(e.name) == &e);
  }
  CHECK(find_experiment("bogus") == nullptr);
}

TEST_CASE("every default configuration passes a dry run") {
  for (const Experiment& e : catalog()) {
    CAPTURE(e.name);
    CHECK_NOTHROW(run_experiment(e, Json::object(), RunContext{1, true}));
  }
}

TEST_CASE("parameter merge is strict") {
  const Json defaults = Json::parse(R"({"a": 1.5, "n": 4, "flag": true, "name": "x",
                                        "list": [1.0, 2.0], "sub": {"b": 2.0}})");
  const Json merged = merge_parameters(defaults, Json::parse(R"({"a": 3, "sub": {"b": 0.5}, "list": [4.0]})"));
  CHECK(merged["a"].get<double>() == 3.0);
  CHECK(merged["a"].is_number_float());
  CHECK(merged["sub"]["b"].get<double>() == 0.5);
  CHECK(merged["list"].size() == 1);
  CHECK(merged["n"].get<int>() == 4);

  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"typo": 1})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"sub": {"c": 1.0}})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"n": 2.5})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"n": -1})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"flag": 1})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"a": "1.0"})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"list": ["a"]})")); }));
  CHECK(config_error([&] { merge_parameters(defaults, Json::parse(R"({"sub": 1.0})")); }));
}

TEST_CASE("configuration file structure") {
  const RunConfig c = parse_config(Json::parse(
      R"({"experiment": "zeno-scan", "seed": 7, "output_dir": "out", "parameters": {"t_max": 4.0}})"));
  CHECK(c.experiment == "zeno-scan");
  CHECK(c.seed == 7);
  CHECK(c.has_seed);
  CHECK(c.output_dir == "out");
  CHECK(c.parameters["t_max"].get<double>() == 4.0);
  CHECK(config_error([] { parse_config(Json::parse(R"({"experiment": "zeno-scan", "extra": 1})")); }));
  CHECK(config_error([] { parse_config(Json::parse(R"({"seed": -3})")); }));
  CHECK(config_error([] { parse_config(Json::parse(R"([1, 2])")); }));
  CHECK(config_error([] { load_config("/nonexistent/config.json"); }));
}

TEST_CASE("checks record their decision") {
  CHECK(at_most("a", 1.0, 2.0).pass);
  CHECK_FALSE(at_most("a", 3.0, 2.0).pass);
  CHECK(at_least("a", 3.0, 2.0).pass);
  CHECK(within("a", 1.05, 1.0, 0.1).pass);
  CHECK_FALSE(within("a", 1.2, 1.0, 0.1).pass);
  // NaN never passes
  CHECK_FALSE(at_most("a", std::nan(""), 2.0).pass);
  CHECK_FALSE(at_least("a", std::nan(""), 2.0).pass);
  Result r;
  r.checks = {at_most("x", 1.0, 2.0), holds("y", false)};
  CHECK_FALSE(r.all_pass());
  REQUIRE(r.find("y") != nullptr);
  CHECK(r.find("z") == nullptr);
}

TEST_CASE("csv format") {
  const Series s{"demo", {{"t", "time"}, {"p", ""}}, {{0.1, 1.0 / 3.0}, {2.0, 1e-20}}};
  CHECK(to_csv(s) == "t [time],p\n0.1,0.3333333333333333\n2,1e-20\n");
}

TEST_CASE("runs are deterministic for a given seed") {
  const Experiment& e = *find_experiment("toa-drift");
  const Result a = run_experiment(e, Json::object(), RunContext{5, false});
  const Result b = run_experiment(e, Json::object(), RunContext{5, false});
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(to_csv(a.series[i]) == to_csv(b.series[i]));
  CHECK(summary_json(e, a, 5).dump() == summary_json(e, b, 5).dump());
  const Result c = run_experiment(e, Json::object(), RunContext{6, false});
  CHECK(to_csv(a.series.front()) != to_csv(c.series.front()));
}

TEST_CASE("outputs land atomically under root/name") {
  const fs::path root = fs::temp_directory_path() / ("toa-cli-test-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const Experiment& e = *find_experiment("multi-trigger");
  const Json params = merge_parameters(e.defaults, Json::object());
  const Result r = e.run(params, RunContext{});
  const OutputPaths paths = write_outputs(root.string(), e, params, RunContext{}, r, 0.25);
  const fs::path dir = paths.directory;
  CHECK(dir == root / "multi-trigger");
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "manifest.json"));
  for (const Series& s : r.series) CHECK(slurp(dir / ("series-" + s.name + ".csv")) == to_csv(s));
  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["experiment"] == "multi-trigger");
  CHECK(manifest["version"] == kVersion);
  CHECK(manifest["config"]["parameters"] == params);
  CHECK(manifest["timings"]["wall_seconds"].get<double>() == 0.25);
  const Json summary = Json::parse(slurp(dir / "summary.json"));
  CHECK(summary["pass"].get<bool>() == r.all_pass());
  CHECK_FALSE(summary.contains("timings"));
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().filename().string().find(".tmp.") == std::string::npos);
  fs::remove_all(root);
}
