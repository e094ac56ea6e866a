#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc::test {

/// E[X^r] for X ~ N(mu, sd^2), by E[X^r] = mu E[X^{r-1}] + (r-1) sd^2 E[X^{r-2}].
inline double normal_raw_moment(int r, double mu, double sd) {
  double prev = 1.0, cur = mu;
  if (r == 0) return 1.0;
  for (int k = 2; k <= r; ++k) {
    const double next = mu * cur + (k - 1) * sd * sd * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

inline double log_gauss(double x, double mean, double var) {
  return -0.5 * (x - mean) * (x - mean) / var - 0.5 * std::log(2.0 * M_PI * var);
}

/// Window of scalar states, oldest first; keeps the storage alive.
struct ScalarWindow {
  std::vector<double> values;
  std::vector<const double*> ptrs;

  explicit ScalarWindow(std::vector<double> v) : values(std::move(v)) {
    for (const double& x : values) ptrs.push_back(&x);
  }
  StateWindow view() const { return StateWindow::over(ptrs, 1); }
};

/// Function of theta usable wherever a ParamLikelihood is expected.
template <class F>
struct Lik {
  F f;
  double operator()(std::span<const double> theta) const { return f(theta); }
};
template <class F>
Lik(F) -> Lik<F>;

/// theta ~ N(0.3, 2), optionally bounded; x_t iid N(0, 1); y_t carries no
/// information about theta or x.
struct FlatModel {
  ParamSpace space;
  explicit FlatModel(double lower = -INFINITY, double upper = INFINITY) {
    space.dim = 1;
    space.prior_mean = {0.3};
    space.prior_cov = {2.0};
    space.lower = {lower};
    space.upper = {upper};
  }
  Dims dims() const { return {1, 1, 1}; }
  std::size_t markov_order() const { return 1; }
  const ParamSpace& param_space() const { return space; }
  bool obs_depends_on_param() const { return false; }
  bool transition_depends_on_param() const { return false; }
  bool state_prior_depends_on_param() const { return false; }
  void sample_param_prior(RngStream& rng, std::span<double> th) const { th[0] = rng.normal(0.3, std::sqrt(2.0)); }
  double param_prior_logpdf(std::span<const double> th) const {
    if (th[0] < space.lower[0] || th[0] > space.upper[0]) return kNegInf;
    return normal_logpdf(th[0], 0.3, std::sqrt(2.0));
  }
  void sample_state_prior(RngStream& rng, std::span<const double>, std::span<double> x) const { x[0] = rng.normal(); }
  double state_prior_logpdf(std::span<const double> x, std::span<const double>) const { return normal_logpdf(x[0], 0, 1); }
  void sample_transition(RngStream& rng, std::size_t, StateWindow, std::span<const double>, std::span<double> x) const {
    x[0] = rng.normal();
  }
  double transition_logpdf(std::size_t, std::span<const double> x, StateWindow, std::span<const double>) const {
    return normal_logpdf(x[0], 0, 1);
  }
  void sample_obs(RngStream&, std::size_t, std::span<const double>, std::span<const double>, std::span<double> y) const {
    y[0] = 0.0;
  }
  double obs_logpdf(std::size_t, std::span<const double>, std::span<const double>, std::span<const double>) const {
    return 0.0;
  }
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace adfsmc::test
