#include <charconv>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "experiments.hpp"
#include "toa/error.hpp"

namespace toa::cli {
namespace fs = std::filesystem;

const char* const kVersion = TOA_VERSION;

namespace {

std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json check_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["measured"] = c.measured;
  j["relation"] = c.relation;
  j["limit"] = c.limit;
  if (c.relation == "|x-target|<=") j["target"] = c.target;
  j["pass"] = c.pass;
  return j;
}

void write_atomic(const fs::path& target, const std::string& text) {
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Config, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::Config, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Config, "cannot move output into place: " + target.string());
  }
}

}  // namespace

std::string to_csv(const Series& series) {
  std::string out;
  for (std::size_t c = 0; c < series.columns.size(); ++c) {
    if (c) out += ',';
    out += series.columns[c].name;
    if (!series.columns[c].unit.empty()) out += " [" + series.columns[c].unit + "]";
  }
  out += '\n';
  for (const auto& row : series.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

Json summary_json(const Experiment& exp, const Result& result, std::uint64_t seed) {
  Json j;
  j["experiment"] = exp.name;
  j["seed"] = seed;
  j["pass"] = result.all_pass();
  Json checks = Json::array();
  for (const auto& c : result.checks) checks.push_back(check_json(c));
  j["checks"] = std::move(checks);
  j["values"] = result.values;
  return j;
}

OutputPaths write_outputs(const std::string& root, const Experiment& exp, const Json& parameters,
                          const RunContext& ctx, const Result& result, double wall_seconds) {
  const fs::path dir = fs::path(root) / exp.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir.string());

  Json files = Json::array();
  for (const auto& s : result.series) {
    const std::string file = "series-" + s.name + ".csv";
    write_atomic(dir / file, to_csv(s));
    files.push_back(file);
  }
  write_atomic(dir / "summary.json", summary_json(exp, result, ctx.seed).dump(2) + "\n");

  Json manifest;
  manifest["experiment"] = exp.name;
  manifest["version"] = kVersion;
  manifest["config"] = {{"experiment", exp.name}, {"seed", ctx.seed}, {"parameters", parameters}};
  manifest["timings"] = {{"wall_seconds", wall_seconds}};
  manifest["pass"] = result.all_pass();
  Json checks = Json::array();
  for (const auto& c : result.checks) checks.push_back(check_json(c));
  manifest["checks"] = std::move(checks);
  files.push_back("summary.json");
  manifest["files"] = std::move(files);
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return {dir.string()};
}

}  // namespace toa::cli
