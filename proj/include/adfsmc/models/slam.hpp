#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc::models {

enum class Action : int { left = -1, right = 1 };

/// One-dimensional grid SLAM with a static labelled map.
///
/// Parameters are the labels of the n_cells cells (discrete, n_labels values
/// each, uniform prior). The state is the robot location, stored as a 0-based
/// cell index. At step t >= 1 the robot executes actions[t-1]: it moves one
/// cell in that direction with probability p_move and otherwise stays; a move
/// into the wall leaves it in place. It then reads the label of its cell,
/// correct with probability p_obs and uniformly wrong otherwise.
class SlamModel {
 public:
  struct Config {
    int n_cells = 8;
    int n_labels = 2;
    double p_move = 0.8;
    double p_obs = 0.9;
    std::vector<Action> actions;
  };

  explicit SlamModel(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.actions.empty()) throw ConfigError("SLAM model needs a non-empty action list");
    if (cfg_.n_cells < 1 || cfg_.n_labels < 2) throw ConfigError("SLAM model needs >= 1 cell and >= 2 labels");
    if (cfg_.p_move < 0 || cfg_.p_move > 1 || cfg_.p_obs < 0 || cfg_.p_obs > 1) {
      throw ConfigError("SLAM probabilities must lie in [0, 1]");
    }
    space_.kind = ParamKind::discrete;
    space_.dim = static_cast<std::size_t>(cfg_.n_cells);
    space_.cardinalities.assign(space_.dim, cfg_.n_labels);
    log_move_ = std::log(cfg_.p_move);
    log_slip_ = std::log(1.0 - cfg_.p_move);
    log_hit_ = std::log(cfg_.p_obs);
    log_miss_ = std::log((1.0 - cfg_.p_obs) / (cfg_.n_labels - 1));
  }

  const Config& config() const { return cfg_; }
  int n_cells() const { return cfg_.n_cells; }
  int n_labels() const { return cfg_.n_labels; }
  std::size_t steps() const { return cfg_.actions.size(); }

  Dims dims() const { return {space_.dim, 1, 1}; }
  std::size_t markov_order() const { return 1; }
  const ParamSpace& param_space() const { return space_; }

  bool obs_depends_on_param() const { return true; }
  bool transition_depends_on_param() const { return false; }
  bool state_prior_depends_on_param() const { return false; }

  Action action_at(std::size_t t) const {
    if (t == 0 || t > cfg_.actions.size()) {
      throw std::out_of_range("no SLAM action for step " + std::to_string(t));
    }
    return cfg_.actions[t - 1];
  }

  int moved(int loc, Action a) const {
    return std::clamp(loc + static_cast<int>(a), 0, cfg_.n_cells - 1);
  }

  /// Location distribution after executing `a` from `loc`.
  std::vector<double> transition_distribution(int loc, Action a) const {
    std::vector<double> dist(static_cast<std::size_t>(cfg_.n_cells), 0.0);
    const int target = moved(loc, a);
    if (target == loc) {
      dist[loc] = 1.0;
    } else {
      dist[target] = cfg_.p_move;
      dist[loc] = 1.0 - cfg_.p_move;
    }
    return dist;
  }

  /// Label distribution observed at `loc` under map `labels`.
  std::vector<double> observation_distribution(int loc, std::span<const double> labels) const {
    std::vector<double> dist(static_cast<std::size_t>(cfg_.n_labels),
                             (1.0 - cfg_.p_obs) / (cfg_.n_labels - 1));
    dist[static_cast<std::size_t>(labels[loc])] = cfg_.p_obs;
    return dist;
  }

  void sample_param_prior(RngStream& rng, std::span<double> theta) const {
    for (auto& v : theta) v = static_cast<double>(rng.index(static_cast<std::size_t>(cfg_.n_labels)));
  }
  double param_prior_logpdf(std::span<const double>) const {
    return -static_cast<double>(cfg_.n_cells) * std::log(static_cast<double>(cfg_.n_labels));
  }

  void sample_state_prior(RngStream& rng, std::span<const double>, std::span<double> x) const {
    x[0] = static_cast<double>(rng.index(static_cast<std::size_t>(cfg_.n_cells)));
  }
  double state_prior_logpdf(std::span<const double>, std::span<const double>) const {
    return -std::log(static_cast<double>(cfg_.n_cells));
  }

  void sample_transition(RngStream& rng, std::size_t t, StateWindow window, std::span<const double>,
                         std::span<double> x) const {
    const int loc = static_cast<int>(window.newest()[0]);
    const int target = moved(loc, action_at(t));
    x[0] = static_cast<double>(rng.uniform() < cfg_.p_move ? target : loc);
  }
  double transition_logpdf(std::size_t t, std::span<const double> x, StateWindow window,
                           std::span<const double>) const {
    const int loc = static_cast<int>(window.newest()[0]);
    const int target = moved(loc, action_at(t));
    const int next = static_cast<int>(x[0]);
    if (target == loc) return next == loc ? 0.0 : kNegInf;
    if (next == target) return log_move_;
    if (next == loc) return log_slip_;
    return kNegInf;
  }

  void sample_obs(RngStream& rng, std::size_t, std::span<const double> x,
                  std::span<const double> theta, std::span<double> y) const {
    const int truth = static_cast<int>(theta[static_cast<std::size_t>(x[0])]);
    if (rng.uniform() < cfg_.p_obs) {
      y[0] = truth;
      return;
    }
    // Uniform over the n_labels - 1 wrong labels.
    int wrong = static_cast<int>(rng.index(static_cast<std::size_t>(cfg_.n_labels - 1)));
    if (wrong >= truth) ++wrong;
    y[0] = wrong;
  }
  double obs_logpdf(std::size_t, std::span<const double> y, std::span<const double> x,
                    std::span<const double> theta) const {
    return y[0] == theta[static_cast<std::size_t>(x[0])] ? log_hit_ : log_miss_;
  }

 private:
  Config cfg_;
  ParamSpace space_;
  double log_move_ = 0, log_slip_ = 0, log_hit_ = 0, log_miss_ = 0;
};

}  // namespace adfsmc::models
