// Acceptance driver: runs the registered experiments with their default
// configuration and reports one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "toa/error.hpp"

namespace {

using namespace toa::cli;

struct Requirement {
  std::string experiment;
  std::string check_prefix;  // empty: every check of the experiment
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Requirement> requires_;
  double max_seconds = 0.0;  // 0: no runtime bound
  std::string timed_experiment;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {1, "trigger flips with probability 1/2", {{"trigger-flip", ""}}, 10.0, "trigger-flip"},
      {2, "multi-trigger 1 - 2^-N", {{"multi-trigger", ""}}},
      {3, "matching formula vs transfer matrices",
       {{"clock-accuracy-scan", "matching amplitude deviation"}, {"clock-accuracy-scan", "matching flux residual"}}},
      {4, "hard-delta limit law",
       {{"clock-accuracy-scan", "alpha-scan extrapolation"}, {"clock-accuracy-scan", "detection asymptote log-log slope"}}},
      {5, "clock accuracy bound",
       {{"clock-accuracy-scan", "detection at largest accuracy product"},
        {"clock-accuracy-scan", "detection at smallest accuracy product"},
        {"clock-accuracy-scan", "detection monotone in accuracy product"}},
       300.0, "clock-accuracy-scan"},
      {6, "two-Gaussian suppression", {{"two-gaussian", ""}}},
      {7, "zero-current state", {{"zero-current", ""}}},
      {8, "Zeno limit", {{"zeno-scan", ""}}},
      {9, "continuity equation", {{"current-vs-arrival", "continuity"}}},
      {10, "arrival-time operator suite",
       {{"toa-spectrum", "right-mover completeness"},
        {"toa-drift", "commutator = -i<O>"},
        {"toa-drift", "drift closed form vs evolved"},
        {"toa-drift", "slope = -integral (1-O)|psi|^2"}}},
      {11, "overlap kernel", {{"toa-kernel", ""}}},
      {12, "coherent-state energy and trigger", {{"coherent-energy", ""}, {"eigenstate-trigger", ""}}},
      {13, "energy-shift kick", {{"toa-drift", "kick energy gain"}}},
      {14, "wavepacket vs stationary amplitudes",
       {{"clock-accuracy-scan", "clock wavepacket vs stationary amplitudes"},
        {"booster", "booster wavepacket vs stationary amplitudes"}}},
  };
  return c;
}

struct Run {
  Result result;
  double seconds = 0.0;
  std::string error;
};

const Run& run_cached(const std::string& name) {
  static std::map<std::string, Run> cache;
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  Run r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.result = run_experiment(*find_experiment(name), Json::object(), RunContext{});
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cache.emplace(name, std::move(r)).first->second;
}

std::string describe(const Check& c) {
  char buf[256];
  if (c.relation == "holds")
    std::snprintf(buf, sizeof buf, "%s (%s)", c.name.c_str(), c.pass ? "holds" : "violated");
  else if (c.relation == "|x-target|<=")
    std::snprintf(buf, sizeof buf, "%s = %.6g, target %.6g +- %.3g", c.name.c_str(), c.measured, c.target, c.limit);
  else
    std::snprintf(buf, sizeof buf, "%s = %.6g %s %.3g", c.name.c_str(), c.measured, c.relation.c_str(), c.limit);
  return buf;
}

bool evaluate(const Criterion& cr) {
  bool pass = true;
  std::vector<std::string> notes;
  for (const Requirement& req : cr.requires_) {
    const Run& run = run_cached(req.experiment);
    if (!run.error.empty()) {
      pass = false;
      notes.push_back(req.experiment + " aborted: " + run.error);
      continue;
    }
    bool matched = false;
    for (const Check& c : run.result.checks) {
      if (c.name.compare(0, req.check_prefix.size(), req.check_prefix) != 0) continue;
      matched = true;
      pass = pass && c.pass;
      notes.push_back(std::string(c.pass ? "  ok   " : "  miss ") + req.experiment + ": " + describe(c));
    }
    if (!matched) {
      pass = false;
      notes.push_back("  miss " + req.experiment + ": no check named '" + req.check_prefix + "'");
    }
  }
  if (cr.max_seconds > 0.0) {
    const double s = run_cached(cr.timed_experiment).seconds;
    const bool ok = s < cr.max_seconds;
    pass = pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %s %s: runtime %.2f s < %.0f s", ok ? "ok  " : "miss", cr.timed_experiment.c_str(),
                  s, cr.max_seconds);
    notes.push_back(buf);
  }
  for (const auto& n : notes) std::printf("%s\n", n.c_str());
  std::printf("criterion %d: %s  %s\n", cr.id, pass ? "PASS" : "FAIL", cr.title.c_str());
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Evaluate one criterion (1-14); default all")->check(CLI::Range(1, 14));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const Criterion& cr : criteria())
    if (only == 0 || cr.id == only) all = evaluate(cr) && all;
  return all ? 0 : 1;
}
