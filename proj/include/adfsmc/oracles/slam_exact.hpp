#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/models/slam.hpp>

namespace adfsmc::oracles {

/// Exact filtering posterior of the SLAM chain over (map, location).
struct ExactDiscretePosterior {
  std::vector<std::vector<std::vector<double>>> map_marginals;  // [t][cell][label]
  std::vector<std::vector<double>> location;                     // [t][cell]
  std::vector<double> joint_mass;                                // total joint mass per step before normalising, = 1 after
  double log_evidence = 0.0;

  std::vector<std::vector<double>> prior_map;                    // [cell][label], before any observation

  /// Map marginals after the last observation (the prior when there were none).
  const std::vector<std::vector<double>>& final_map() const {
    return map_marginals.empty() ? prior_map : map_marginals.back();
  }
};

inline constexpr std::size_t kDefaultJointBudget = std::size_t{1} << 22;

/// Forward recursion over every (map, location) pair:
///   alpha_t(m, l') = sum_l alpha_{t-1}(m, l) p(l' | l, a_t) p(y_t | l', m),
/// normalised each step. Refuses (BudgetError) when n_labels^n_cells * n_cells
/// exceeds `budget`.
inline ExactDiscretePosterior slam_exact_forward(const models::SlamModel& model, const Series& observations,
                                                 std::size_t budget = kDefaultJointBudget) {
  const std::size_t cells = static_cast<std::size_t>(model.n_cells());
  const std::size_t labels = static_cast<std::size_t>(model.n_labels());
  std::size_t maps = 1;
  for (std::size_t c = 0; c < cells; ++c) {
    if (maps > budget / labels) throw BudgetError("exact SLAM posterior exceeds the joint-state budget");
    maps *= labels;
  }
  if (maps > budget / cells) throw BudgetError("exact SLAM posterior exceeds the joint-state budget");
  if (observations.dim() != 1) throw DimensionError("SLAM observations are scalar labels");
  if (observations.size() > model.steps() + 1) throw DimensionError("more observations than SLAM actions + 1");

  const auto& cfg = model.config();
  const double hit = cfg.p_obs;
  const double miss = (1.0 - cfg.p_obs) / static_cast<double>(labels - 1);

  // label[m * cells + c] = label of cell c under map m.
  std::vector<std::uint8_t> label(maps * cells);
  for (std::size_t m = 0; m < maps; ++m) {
    std::size_t rem = m;
    for (std::size_t c = 0; c < cells; ++c) {
      label[m * cells + c] = static_cast<std::uint8_t>(rem % labels);
      rem /= labels;
    }
  }

  std::vector<double> alpha(maps * cells, 1.0 / static_cast<double>(maps * cells));
  std::vector<double> next(maps * cells);
  ExactDiscretePosterior out;
  out.prior_map.assign(cells, std::vector<double>(labels, 1.0 / static_cast<double>(labels)));

  for (std::size_t t = 0; t < observations.size(); ++t) {
    const auto y = static_cast<std::size_t>(observations[t][0]);
    if (t > 0) {
      const models::Action a = model.action_at(t);
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t m = 0; m < maps; ++m) {
        for (std::size_t l = 0; l < cells; ++l) {
          const double mass = alpha[m * cells + l];
          if (mass == 0.0) continue;
          const auto target = static_cast<std::size_t>(model.moved(static_cast<int>(l), a));
          if (target == l) {
            next[m * cells + l] += mass;
          } else {
            next[m * cells + target] += mass * cfg.p_move;
            next[m * cells + l] += mass * (1.0 - cfg.p_move);
          }
        }
      }
      alpha.swap(next);
    }
    double total = 0.0;
    for (std::size_t m = 0; m < maps; ++m) {
      for (std::size_t l = 0; l < cells; ++l) {
        alpha[m * cells + l] *= label[m * cells + l] == y ? hit : miss;
        total += alpha[m * cells + l];
      }
    }
    if (!(total > 0.0)) throw DegenerateWeightsError("observations have zero probability under the SLAM model");
    out.log_evidence += std::log(total);
    double check = 0.0;
    for (double& v : alpha) {
      v /= total;
      check += v;
    }
    out.joint_mass.push_back(check);

    std::vector<std::vector<double>> marg(cells, std::vector<double>(labels, 0.0));
    std::vector<double> loc(cells, 0.0);
    for (std::size_t m = 0; m < maps; ++m) {
      double pm = 0.0;
      for (std::size_t l = 0; l < cells; ++l) {
        pm += alpha[m * cells + l];
        loc[l] += alpha[m * cells + l];
      }
      for (std::size_t c = 0; c < cells; ++c) marg[c][label[m * cells + c]] += pm;
    }
    out.map_marginals.push_back(std::move(marg));
    out.location.push_back(std::move(loc));
  }
  return out;
}

}  // namespace adfsmc::oracles
