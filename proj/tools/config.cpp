#include <cmath>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "toa/error.hpp"

namespace toa::cli {
namespace {

[[noreturn]] void reject(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::Config, path + ": " + why);
}

Json merge_value(const Json& def, const Json& over, const std::string& path) {
  switch (def.type()) {
    case Json::value_t::object:
      return merge_parameters(def, over, path);
    case Json::value_t::number_float:
      if (!over.is_number()) reject(path, "expected a number");
      return Json(over.get<double>());
    case Json::value_t::number_unsigned:
    case Json::value_t::number_integer:
      if (!over.is_number_integer()) reject(path, "expected an integer");
      if (def.is_number_unsigned() && !over.is_number_unsigned() && over.get<long long>() < 0)
        reject(path, "expected a non-negative integer");
      return over;
    case Json::value_t::boolean:
      if (!over.is_boolean()) reject(path, "expected true or false");
      return over;
    case Json::value_t::string:
      if (!over.is_string()) reject(path, "expected a string");
      return over;
    case Json::value_t::array: {
      if (!over.is_array()) reject(path, "expected an array");
      if (def.empty()) return over;
      Json out = Json::array();
      for (std::size_t i = 0; i < over.size(); ++i)
        out.push_back(merge_value(def[0], over[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
    default:
      return over;
  }
}

}  // namespace

Json merge_parameters(const Json& defaults, const Json& overrides, const std::string& path) {
  if (!overrides.is_object()) reject(path, "expected an object");
  Json out = defaults;
  for (const auto& [key, value] : overrides.items()) {
    const std::string where = path + "." + key;
    if (!defaults.contains(key)) reject(where, "unknown key");
    out[key] = merge_value(defaults[key], value, where);
  }
  return out;
}

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) reject("config", "top level must be an object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      if (!value.is_string()) reject("experiment", "expected a string");
      cfg.experiment = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) reject("seed", "expected a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
      cfg.has_seed = true;
    } else if (key == "output_dir") {
      if (!value.is_string()) reject("output_dir", "expected a string");
      cfg.output_dir = value.get<std::string>();
    } else if (key == "parameters") {
      if (!value.is_object()) reject("parameters", "expected an object");
      cfg.parameters = value;
    } else {
      reject(key, "unknown key");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
  return parse_config(doc);
}

Check at_most(std::string name, double measured, double limit) {
  return {std::move(name), measured, limit, "<=", 0.0, measured <= limit};
}

Check at_least(std::string name, double measured, double limit) {
  return {std::move(name), measured, limit, ">=", 0.0, measured >= limit};
}

Check within(std::string name, double measured, double target, double tolerance) {
  return {std::move(name), measured, tolerance, "|x-target|<=", target, std::abs(measured - target) <= tolerance};
}

Check holds(std::string name, bool condition, double measured) {
  return {std::move(name), measured, 0.0, "holds", 0.0, condition};
}

bool Result::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const Check* Result::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

Result run_experiment(const Experiment& exp, const Json& overrides, const RunContext& ctx) {
  return exp.run(merge_parameters(exp.defaults, overrides), ctx);
}

}  // namespace toa::cli
