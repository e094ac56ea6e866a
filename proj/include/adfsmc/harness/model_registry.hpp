#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/rng.hpp>
#include <adfsmc/harness/config.hpp>
#include <adfsmc/models/instances.hpp>

namespace adfsmc::harness {

using AnyModel = std::variant<models::SinModel, models::LinearGaussianModel, models::SlamModel>;

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"sin", "sin-bimodal", "slam-small", "slam-large", "lg"};
  return names;
}

namespace detail {

inline void check_keys(const Json& overrides, const std::set<std::string>& allowed, const std::string& model) {
  for (const auto& [key, value] : overrides.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown override '" + key + "' for model '" + model + "'");
  }
}

inline void take(const Json& o, const char* key, double& dst) {
  if (o.contains(key)) dst = get_as<double>(o.at(key), key);
}

inline void take(const Json& o, const char* key, int& dst) {
  if (o.contains(key)) dst = get_as<int>(o.at(key), key);
}

}  // namespace detail

/// Builds a canned instance by name, then applies config overrides.
inline AnyModel make_model(const std::string& name, const Json& overrides = Json::object()) {
  if (name == "sin" || name == "sin-bimodal") {
    detail::check_keys(overrides, {"obs_sd", "trans_sd", "prior_mean", "prior_sd", "x0_sd", "lower", "upper"}, name);
    auto cfg = (name == "sin" ? models::sin_instance() : models::sin_bimodal_instance()).config();
    detail::take(overrides, "obs_sd", cfg.obs_sd);
    detail::take(overrides, "trans_sd", cfg.trans_sd);
    detail::take(overrides, "prior_mean", cfg.prior_mean);
    detail::take(overrides, "prior_sd", cfg.prior_sd);
    detail::take(overrides, "x0_sd", cfg.x0_sd);
    detail::take(overrides, "lower", cfg.lower);
    detail::take(overrides, "upper", cfg.upper);
    return models::SinModel(cfg);
  }
  if (name == "lg") {
    detail::check_keys(overrides,
                       {"sigma_v", "sigma_w", "x0_sd", "prior_mean", "prior_sd", "lower", "upper", "known_theta"}, name);
    auto cfg = models::lg_instance().config();
    detail::take(overrides, "sigma_v", cfg.sigma_v);
    detail::take(overrides, "sigma_w", cfg.sigma_w);
    detail::take(overrides, "x0_sd", cfg.x0_sd);
    detail::take(overrides, "prior_mean", cfg.prior_mean);
    detail::take(overrides, "prior_sd", cfg.prior_sd);
    detail::take(overrides, "lower", cfg.lower);
    detail::take(overrides, "upper", cfg.upper);
    if (overrides.contains("known_theta")) cfg.known_theta = detail::get_as<double>(overrides.at("known_theta"), "known_theta");
    return models::LinearGaussianModel(cfg);
  }
  if (name == "slam-small" || name == "slam-large") {
    detail::check_keys(overrides, {"n_cells", "n_labels", "p_move", "p_obs", "actions", "actions_file"}, name);
    auto cfg = name == "slam-small" ? models::slam_small_config() : models::slam_large_config();
    detail::take(overrides, "n_cells", cfg.n_cells);
    detail::take(overrides, "n_labels", cfg.n_labels);
    detail::take(overrides, "p_move", cfg.p_move);
    detail::take(overrides, "p_obs", cfg.p_obs);
    if (overrides.contains("actions") && overrides.contains("actions_file")) {
      throw ConfigError("give either 'actions' or 'actions_file'");
    }
    if (overrides.contains("actions")) {
      cfg.actions = models::parse_actions(detail::get_as<std::string>(overrides.at("actions"), "actions"));
    }
    if (overrides.contains("actions_file")) {
      const auto path = detail::get_as<std::string>(overrides.at("actions_file"), "actions_file");
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open actions file '" + path + "'");
      std::stringstream text;
      text << in.rdbuf();
      cfg.actions = models::parse_actions(text.str());
    }
    return models::SlamModel(cfg);
  }
  throw ConfigError("unknown model '" + name + "'");
}

/// Fixed reference map for simulated SLAM data: pseudo-random labels.
inline std::vector<double> slam_reference_map(int cells, int labels) {
  std::vector<double> map(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c) {
    map[static_cast<std::size_t>(c)] = static_cast<double>(splitmix64(static_cast<std::uint64_t>(c) + 17) %
                                                           static_cast<std::uint64_t>(labels));
  }
  return map;
}

/// Parameter used to simulate data when the config gives none.
inline std::vector<double> default_true_theta(const std::string& name, const AnyModel& model) {
  if (name == "sin") return {models::kSinTrueTheta};
  if (name == "sin-bimodal") return {models::kBimodalTrueTheta};
  if (name == "lg") {
    const auto& m = std::get<models::LinearGaussianModel>(model);
    if (m.config().known_theta) return {};
    return {0.5};
  }
  const auto& slam = std::get<models::SlamModel>(model);
  return slam_reference_map(slam.n_cells(), slam.n_labels());
}

/// Number of transitions T (observations y_0..y_T) when the config gives none.
inline std::size_t default_steps(const std::string& name, const AnyModel& model) {
  if (name == "sin" || name == "sin-bimodal") return models::kSinSteps;
  if (name == "lg") return 200;
  return std::get<models::SlamModel>(model).steps();
}

inline ParamVector make_param(const AnyModel& model, std::vector<double> values) {
  ParamVector theta;
  std::visit([&](const auto& m) { theta.kind = m.param_space().kind; }, model);
  theta.values = std::move(values);
  std::visit([&](const auto& m) { validate(theta, m.param_space()); }, model);
  return theta;
}

}  // namespace adfsmc::harness
