#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <adfsmc/models/linear_gaussian.hpp>
#include <adfsmc/models/sin.hpp>
#include <adfsmc/models/slam.hpp>

namespace adfsmc::models {

inline constexpr double kSinTrueTheta = -0.5;
inline constexpr double kBimodalTrueTheta = 0.7;
inline constexpr std::size_t kSinSteps = 5000;
inline constexpr std::size_t kSlamLargeSteps = 164;

/// Parses "R"/"L" tokens (also "right"/"left"); '#' starts a comment line.
inline std::vector<Action> parse_actions(std::string_view text) {
  std::vector<Action> actions;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      if (tok == "R" || tok == "r" || tok == "right") {
        actions.push_back(Action::right);
      } else if (tok == "L" || tok == "l" || tok == "left") {
        actions.push_back(Action::left);
      } else {
        throw ConfigError("unknown SLAM action token '" + tok + "'");
      }
    }
  }
  return actions;
}

// Same sequence as data/slam_actions_small.txt (provisional, see that file).
inline constexpr std::string_view kSmallSlamActions = "R R R R R R R L L L L L L L R R";

inline SinModel sin_instance() { return SinModel{}; }

inline SinModel sin_bimodal_instance() {
  SinModel::Config cfg;
  cfg.variant = SinModel::Variant::bimodal;
  return SinModel(cfg);
}

inline LinearGaussianModel lg_instance() {
  LinearGaussianModel::Config cfg;
  cfg.sigma_v = 1.0;
  cfg.sigma_w = 0.5;
  return LinearGaussianModel(cfg);
}

inline SlamModel::Config slam_small_config() {
  SlamModel::Config cfg;
  cfg.n_cells = 8;
  cfg.n_labels = 2;
  cfg.p_move = 0.8;
  cfg.p_obs = 0.9;
  cfg.actions = parse_actions(kSmallSlamActions);
  return cfg;
}

/// The small sequence repeated, then truncated to 164 actions, on 20 cells.
inline SlamModel::Config slam_large_config() {
  SlamModel::Config cfg = slam_small_config();
  const std::vector<Action> base = cfg.actions;
  cfg.n_cells = 20;
  cfg.actions.clear();
  while (cfg.actions.size() < kSlamLargeSteps) {
    for (Action a : base) {
      if (cfg.actions.size() == kSlamLargeSteps) break;
      cfg.actions.push_back(a);
    }
  }
  return cfg;
}

inline SlamModel slam_small_instance() { return SlamModel(slam_small_config()); }
inline SlamModel slam_large_instance() { return SlamModel(slam_large_config()); }

}  // namespace adfsmc::models
