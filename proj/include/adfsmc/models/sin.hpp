#pragma once

#include <cmath>
#include <span>

#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc::models {

/// Nonlinear benchmark
///   x_t = sin(theta x_{t-1}) + v_t,  v_t ~ N(0, 1)
///   y_t = x_t + w_t,                 w_t ~ N(0, 0.5^2)
/// with theta ~ N(0, 1) and x_0 ~ N(0, 1). The bimodal variant uses
/// sin(theta^2 x_{t-1}), which makes every likelihood term even in theta.
class SinModel {
 public:
  enum class Variant { plain, bimodal };

  struct Config {
    Variant variant = Variant::plain;
    double obs_sd = 0.5;
    double trans_sd = 1.0;
    double prior_mean = 0.0;
    double prior_sd = 1.0;
    double x0_sd = 1.0;
    double lower = -4.0;
    double upper = 4.0;
  };

  SinModel() : SinModel(Config{}) {}
  explicit SinModel(Config cfg) : cfg_(cfg) {
    space_.kind = ParamKind::continuous;
    space_.dim = 1;
    space_.prior_mean = {cfg_.prior_mean};
    space_.prior_cov = {cfg_.prior_sd * cfg_.prior_sd};
    space_.lower = {cfg_.lower};
    space_.upper = {cfg_.upper};
  }

  const Config& config() const { return cfg_; }
  Dims dims() const { return {1, 1, 1}; }
  std::size_t markov_order() const { return 1; }
  const ParamSpace& param_space() const { return space_; }

  bool obs_depends_on_param() const { return false; }
  bool transition_depends_on_param() const { return true; }
  bool state_prior_depends_on_param() const { return false; }

  void sample_param_prior(RngStream& rng, std::span<double> theta) const {
    theta[0] = rng.normal(cfg_.prior_mean, cfg_.prior_sd);
  }
  double param_prior_logpdf(std::span<const double> theta) const {
    return normal_logpdf(theta[0], cfg_.prior_mean, cfg_.prior_sd);
  }

  void sample_state_prior(RngStream& rng, std::span<const double>, std::span<double> x) const {
    x[0] = rng.normal(0.0, cfg_.x0_sd);
  }
  double state_prior_logpdf(std::span<const double> x, std::span<const double>) const {
    return normal_logpdf(x[0], 0.0, cfg_.x0_sd);
  }

  double transition_mean(double x_prev, double theta) const {
    const double rate = cfg_.variant == Variant::bimodal ? theta * theta : theta;
    return std::sin(rate * x_prev);
  }

  void sample_transition(RngStream& rng, std::size_t, StateWindow window,
                         std::span<const double> theta, std::span<double> x) const {
    x[0] = rng.normal(transition_mean(window.newest()[0], theta[0]), cfg_.trans_sd);
  }
  double transition_logpdf(std::size_t, std::span<const double> x, StateWindow window,
                           std::span<const double> theta) const {
    return normal_logpdf(x[0], transition_mean(window.newest()[0], theta[0]), cfg_.trans_sd);
  }

  void sample_obs(RngStream& rng, std::size_t, std::span<const double> x, std::span<const double>,
                  std::span<double> y) const {
    y[0] = rng.normal(x[0], cfg_.obs_sd);
  }
  double obs_logpdf(std::size_t, std::span<const double> y, std::span<const double> x,
                    std::span<const double>) const {
    return normal_logpdf(y[0], x[0], cfg_.obs_sd);
  }

 private:
  Config cfg_;
  ParamSpace space_;
};

}  // namespace adfsmc::models
