#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/filter/bootstrap.hpp>

namespace adfsmc {

struct PmmhConfig {
  std::size_t particles = 100;  // inner bootstrap filter
  std::size_t iterations = 5000;
  double proposal_sd = 0.1;
  std::optional<double> time_budget_s;  // stop early once exceeded
  std::uint64_t seed = 1;
  ResampleScheme resample = ResampleScheme::multinomial;

  void validate() const {
    if (particles < 1) throw ConfigError("PMMH needs >= 1 inner particle");
    if (iterations < 1) throw ConfigError("PMMH needs >= 1 iteration");
    if (!(proposal_sd > 0.0)) throw ConfigError("PMMH proposal sd must be > 0");
    if (time_budget_s && !(*time_budget_s > 0.0)) throw ConfigError("time budget must be > 0");
  }
};

struct PmmhResult {
  Series chain;                         // theta after each iteration
  std::vector<double> log_likelihood;   // estimate attached to the current state
  std::vector<std::uint8_t> accepted;
  std::size_t accepted_count = 0;
  std::size_t nonfinite_proposals = 0;  // rejected because the estimate was not finite
  std::vector<double> posterior_mean;   // mean of the second half of the chain
  std::vector<double> standard_error;   // batch-means standard error of that mean
  double wall_ms = 0.0;

  std::size_t iterations() const { return chain.size(); }
  double acceptance_rate() const {
    return chain.empty() ? 0.0 : static_cast<double>(accepted_count) / static_cast<double>(chain.size());
  }
};

namespace detail {

inline double normal_quantile(double u) {
  u = std::clamp(u, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon() / 2);
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

/// N(centre, sd^2) truncated to [lo, hi]: draws by inverse CDF and the log
/// normalising mass of the truncation.
struct TruncatedNormal {
  double lo;
  double hi;
  double sd;

  double log_mass(double centre) const {
    const double m = normal_cdf((hi - centre) / sd) - normal_cdf((lo - centre) / sd);
    return m > 0.0 ? std::log(m) : kNegInf;
  }

  double sample(double centre, RngStream& rng) const {
    const double pa = normal_cdf((lo - centre) / sd);
    const double pb = normal_cdf((hi - centre) / sd);
    const double u = pa + (pb - pa) * rng.uniform();
    return std::clamp(centre + sd * normal_quantile(u), lo, hi);
  }
};

/// Batch-means standard error of the mean of `xs`, with about sqrt(n) batches.
inline double batch_means_se(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return std::numeric_limits<double>::infinity();
  const auto batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t len = n / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < len; ++k) means[b] += xs[b * len + k];
    means[b] /= static_cast<double>(len);
  }
  double mu = 0.0;
  for (double m : means) mu += m;
  mu /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

}  // namespace detail

/// Particle-marginal Metropolis-Hastings over theta.
///
/// The target uses a bootstrap-filter estimate of p(y | theta). Continuous
/// parameters move by a Gaussian random walk truncated to the parameter
/// bounds, with the truncation masses entering the acceptance ratio;
/// discrete parameters re-draw one uniformly chosen coordinate to a different
/// value. The chain stops after cfg.iterations or once the time budget is spent.
template <DynamicModel Model>
PmmhResult pmmh_run(const Model& model, const Series& observations, const PmmhConfig& cfg) {
  cfg.validate();
  const ParamSpace& space = model.param_space();
  const std::size_t p = space.dim;
  if (p == 0) throw ConfigError("PMMH needs a parameter of dimension >= 1");
  const bool discrete = space.kind == ParamKind::discrete;

  std::vector<detail::TruncatedNormal> proposal;
  if (!discrete) {
    for (std::size_t i = 0; i < p; ++i) {
      const double lo = space.lower.empty() ? -std::numeric_limits<double>::infinity() : space.lower[i];
      const double hi = space.upper.empty() ? std::numeric_limits<double>::infinity() : space.upper[i];
      proposal.push_back({lo, hi, cfg.proposal_sd});
    }
  }

  RngStream init_rng(cfg.seed, StreamId::kInit);
  RngStream proposal_rng(cfg.seed, StreamId::kProposal);
  RngStream accept_rng(cfg.seed, StreamId::kAccept);
  RngStream inner_rng(cfg.seed, StreamId::kInnerFilter);
  BootstrapLikelihood<Model> estimate(model, observations, cfg.particles, cfg.resample);

  // Start from a prior draw inside the bounds.
  std::vector<double> current(p), candidate(p);
  for (int attempt = 0;; ++attempt) {
    model.sample_param_prior(init_rng, current);
    bool inside = true;
    for (std::size_t i = 0; i < proposal.size(); ++i) {
      inside = inside && current[i] >= proposal[i].lo && current[i] <= proposal[i].hi;
    }
    if (inside) break;
    if (attempt == 1000) {
      for (std::size_t i = 0; i < proposal.size(); ++i) current[i] = std::clamp(current[i], proposal[i].lo, proposal[i].hi);
      break;
    }
  }
  double current_ll = estimate(current, inner_rng);
  double current_lp = model.param_prior_logpdf(current);

  PmmhResult out;
  out.chain = Series(p);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    candidate = current;
    double log_ratio = 0.0;
    if (discrete) {
      const std::size_t c = proposal_rng.index(p);
      const auto card = static_cast<std::size_t>(space.cardinalities[c]);
      if (card > 1) {
        std::size_t v = proposal_rng.index(card - 1);
        if (v >= static_cast<std::size_t>(current[c])) ++v;
        candidate[c] = static_cast<double>(v);
      }
    } else {
      for (std::size_t i = 0; i < p; ++i) {
        candidate[i] = proposal[i].sample(current[i], proposal_rng);
        log_ratio += proposal[i].log_mass(current[i]) - proposal[i].log_mass(candidate[i]);
      }
    }

    const double cand_lp = model.param_prior_logpdf(candidate);
    const double cand_ll = cand_lp == kNegInf ? kNegInf : estimate(candidate, inner_rng);
    bool accept = false;
    if (!std::isfinite(cand_ll)) {
      ++out.nonfinite_proposals;
    } else if (!std::isfinite(current_ll)) {
      accept = true;
    } else {
      log_ratio += cand_ll + cand_lp - current_ll - current_lp;
      accept = std::log(accept_rng.uniform_pos()) < log_ratio;
    }
    if (accept) {
      current.swap(candidate);
      current_ll = cand_ll;
      current_lp = cand_lp;
      ++out.accepted_count;
    }
    out.chain.push_back(current);
    out.log_likelihood.push_back(current_ll);
    out.accepted.push_back(accept ? 1 : 0);

    if (cfg.time_budget_s) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed >= *cfg.time_budget_s) break;
    }
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  // Discard the first half as burn-in.
  const std::size_t total = out.chain.size();
  const std::size_t first = total - total / 2;
  out.posterior_mean.assign(p, 0.0);
  out.standard_error.assign(p, 0.0);
  std::vector<double> coord;
  for (std::size_t i = 0; i < p; ++i) {
    coord.clear();
    for (std::size_t k = first; k < total; ++k) coord.push_back(out.chain[k][i]);
    if (coord.empty()) coord.push_back(out.chain[total - 1][i]);
    double s = 0.0;
    for (double v : coord) s += v;
    out.posterior_mean[i] = s / static_cast<double>(coord.size());
    out.standard_error[i] = detail::batch_means_se(coord);
  }
  return out;
}

}  // namespace adfsmc
