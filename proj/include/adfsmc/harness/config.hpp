#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <adfsmc/core/errors.hpp>

namespace adfsmc::harness {

using Json = nlohmann::json;

/// One experiment, as read from a JSON config file. Scalar-or-list keys
/// (particles, approx_samples, seeds) span the sweep grid.
struct ExperimentConfig {
  std::string model = "sin";
  Json overrides = Json::object();
  std::string algorithm = "api";
  std::vector<std::size_t> particles{1000};
  std::vector<std::size_t> approx_samples{7};
  std::size_t mixtures = 10;
  std::string approx = "auto";
  std::string scheme = "gauss_hermite";
  std::vector<std::uint64_t> seeds{1};
  std::optional<std::size_t> steps;
  std::optional<std::vector<double>> theta;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::string> observations;
  std::optional<double> time_budget_s;
  std::size_t pmmh_iterations = 5000;
  double pmmh_sd = 0.1;
  double shrinkage = 0.98;
  std::string resample = "multinomial";
  std::string update_order = "resample_first";
  bool record_timing = true;
  std::uint64_t permute_seed = 0;
  std::size_t jobs = 1;
  std::size_t oracle_grid_points = 161;
  std::size_t oracle_particles = 10000;
  std::size_t oracle_replications = 20;
  std::string output = "results.csv";
  std::string summary = "summary.json";
};

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "model", "overrides", "algorithm", "particles", "approx_samples", "mixtures", "approx", "scheme",
      "seeds", "seed", "steps", "theta", "data_seed", "observations", "time_budget_s", "pmmh_iterations",
      "pmmh_sd", "shrinkage", "resample", "update_order", "record_timing", "permute_seed",
      "jobs", "oracle_grid_points", "oracle_particles", "oracle_replications", "output", "summary"};
  return keys;
}

namespace detail {

template <class T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

template <class T>
std::vector<T> scalar_or_list(const Json& j, const std::string& key) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(get_as<T>(v, key));
  } else {
    out.push_back(get_as<T>(j, key));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' must not be an empty list");
  return out;
}

inline std::size_t positive_size(const Json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!config_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = detail::get_as<std::string>(j.at(key), key);
  };
  auto size = [&](const char* key, std::size_t& dst) {
    if (j.contains(key)) dst = detail::positive_size(j.at(key), key);
  };
  auto real = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::get_as<double>(j.at(key), key);
  };
  str("model", c.model);
  str("algorithm", c.algorithm);
  str("approx", c.approx);
  str("scheme", c.scheme);
  str("resample", c.resample);
  str("update_order", c.update_order);
  str("output", c.output);
  str("summary", c.summary);
  size("mixtures", c.mixtures);
  size("pmmh_iterations", c.pmmh_iterations);
  size("jobs", c.jobs);
  size("oracle_grid_points", c.oracle_grid_points);
  size("oracle_particles", c.oracle_particles);
  size("oracle_replications", c.oracle_replications);
  real("pmmh_sd", c.pmmh_sd);
  real("shrinkage", c.shrinkage);
  if (j.contains("overrides")) {
    if (!j.at("overrides").is_object()) throw ConfigError("config key 'overrides' must be an object");
    c.overrides = j.at("overrides");
  }
  if (j.contains("particles")) c.particles = detail::scalar_or_list<std::size_t>(j.at("particles"), "particles");
  if (j.contains("approx_samples")) {
    c.approx_samples = detail::scalar_or_list<std::size_t>(j.at("approx_samples"), "approx_samples");
  }
  if (j.contains("seeds") && j.contains("seed")) throw ConfigError("give either 'seed' or 'seeds', not both");
  if (j.contains("seeds")) c.seeds = detail::scalar_or_list<std::uint64_t>(j.at("seeds"), "seeds");
  if (j.contains("seed")) c.seeds = {detail::get_as<std::uint64_t>(j.at("seed"), "seed")};
  if (j.contains("steps")) c.steps = detail::positive_size(j.at("steps"), "steps");
  if (j.contains("theta")) c.theta = detail::scalar_or_list<double>(j.at("theta"), "theta");
  if (j.contains("data_seed")) c.data_seed = detail::get_as<std::uint64_t>(j.at("data_seed"), "data_seed");
  if (j.contains("observations")) c.observations = detail::get_as<std::string>(j.at("observations"), "observations");
  if (j.contains("time_budget_s")) c.time_budget_s = detail::get_as<double>(j.at("time_budget_s"), "time_budget_s");
  if (j.contains("record_timing")) c.record_timing = detail::get_as<bool>(j.at("record_timing"), "record_timing");
  if (j.contains("permute_seed")) c.permute_seed = detail::get_as<std::uint64_t>(j.at("permute_seed"), "permute_seed");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["model"] = c.model;
  j["overrides"] = c.overrides;
  j["algorithm"] = c.algorithm;
  j["particles"] = c.particles;
  j["approx_samples"] = c.approx_samples;
  j["mixtures"] = c.mixtures;
  j["approx"] = c.approx;
  j["scheme"] = c.scheme;
  j["seeds"] = c.seeds;
  if (c.steps) j["steps"] = *c.steps;
  if (c.theta) j["theta"] = *c.theta;
  if (c.data_seed) j["data_seed"] = *c.data_seed;
  if (c.observations) j["observations"] = *c.observations;
  if (c.time_budget_s) j["time_budget_s"] = *c.time_budget_s;
  j["pmmh_iterations"] = c.pmmh_iterations;
  j["pmmh_sd"] = c.pmmh_sd;
  j["shrinkage"] = c.shrinkage;
  j["resample"] = c.resample;
  j["update_order"] = c.update_order;
  j["record_timing"] = c.record_timing;
  j["permute_seed"] = c.permute_seed;
  j["jobs"] = c.jobs;
  j["oracle_grid_points"] = c.oracle_grid_points;
  j["oracle_particles"] = c.oracle_particles;
  j["oracle_replications"] = c.oracle_replications;
  j["output"] = c.output;
  j["summary"] = c.summary;
  return j;
}

}  // namespace adfsmc::harness
