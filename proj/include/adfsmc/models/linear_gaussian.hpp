#pragma once

#include <optional>
#include <span>

#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc::models {

/// Scalar AR(1) observed in Gaussian noise:
///   x_t = theta x_{t-1} + v_t, v_t ~ N(0, sigma_v^2);  y_t = x_t + w_t, w_t ~ N(0, sigma_w^2)
/// with theta ~ N(0, 1) and x_0 ~ N(0, x0_sd^2).
///
/// With known_theta set the model is state-only (parameter dimension 0),
/// which is the configuration the Kalman comparison uses.
class LinearGaussianModel {
 public:
  struct Config {
    double sigma_v = 1.0;
    double sigma_w = 1.0;
    double x0_sd = 1.0;
    double prior_mean = 0.0;
    double prior_sd = 1.0;
    double lower = -4.0;
    double upper = 4.0;
    std::optional<double> known_theta;
  };

  LinearGaussianModel() : LinearGaussianModel(Config{}) {}
  explicit LinearGaussianModel(Config cfg) : cfg_(cfg) {
    space_.kind = ParamKind::continuous;
    if (!cfg_.known_theta) {
      space_.dim = 1;
      space_.prior_mean = {cfg_.prior_mean};
      space_.prior_cov = {cfg_.prior_sd * cfg_.prior_sd};
      space_.lower = {cfg_.lower};
      space_.upper = {cfg_.upper};
    }
  }

  const Config& config() const { return cfg_; }
  Dims dims() const { return {space_.dim, 1, 1}; }
  std::size_t markov_order() const { return 1; }
  const ParamSpace& param_space() const { return space_; }

  bool obs_depends_on_param() const { return false; }
  bool transition_depends_on_param() const { return !cfg_.known_theta.has_value(); }
  bool state_prior_depends_on_param() const { return false; }

  double theta_of(std::span<const double> theta) const {
    return cfg_.known_theta ? *cfg_.known_theta : theta[0];
  }

  void sample_param_prior(RngStream& rng, std::span<double> theta) const {
    if (!cfg_.known_theta) theta[0] = rng.normal(cfg_.prior_mean, cfg_.prior_sd);
  }
  double param_prior_logpdf(std::span<const double> theta) const {
    return cfg_.known_theta ? 0.0 : normal_logpdf(theta[0], cfg_.prior_mean, cfg_.prior_sd);
  }

  void sample_state_prior(RngStream& rng, std::span<const double>, std::span<double> x) const {
    x[0] = rng.normal(0.0, cfg_.x0_sd);
  }
  double state_prior_logpdf(std::span<const double> x, std::span<const double>) const {
    return normal_logpdf(x[0], 0.0, cfg_.x0_sd);
  }

  void sample_transition(RngStream& rng, std::size_t, StateWindow window,
                         std::span<const double> theta, std::span<double> x) const {
    x[0] = theta_of(theta) * window.newest()[0] + cfg_.sigma_v * rng.normal();
  }
  double transition_logpdf(std::size_t, std::span<const double> x, StateWindow window,
                           std::span<const double> theta) const {
    return normal_logpdf(x[0], theta_of(theta) * window.newest()[0], cfg_.sigma_v);
  }

  void sample_obs(RngStream& rng, std::size_t, std::span<const double> x, std::span<const double>,
                  std::span<double> y) const {
    y[0] = x[0] + cfg_.sigma_w * rng.normal();
  }
  double obs_logpdf(std::size_t, std::span<const double> y, std::span<const double> x,
                    std::span<const double>) const {
    return normal_logpdf(y[0], x[0], cfg_.sigma_w);
  }

 private:
  Config cfg_;
  ParamSpace space_;
};

}  // namespace adfsmc::models
