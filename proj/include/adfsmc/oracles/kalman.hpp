#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/models/linear_gaussian.hpp>

namespace adfsmc::oracles {

struct KalmanResult {
  std::vector<double> mean;      // E[x_t | y_{0:t}]
  std::vector<double> variance;  // Var[x_t | y_{0:t}]
  double log_likelihood = 0.0;   // log p(y_{0:T})
};

/// Scalar Kalman filter for x_t = theta x_{t-1} + v_t, y_t = x_t + w_t, x_0 ~ N(0, x0_sd^2).
inline KalmanResult kalman_filter(double theta, double sigma_v, double sigma_w, double x0_sd,
                                  const Series& observations) {
  if (observations.dim() != 1) throw DimensionError("Kalman oracle expects scalar observations");
  KalmanResult out;
  double m = 0.0;
  double var = x0_sd * x0_sd;
  const double r = sigma_w * sigma_w;
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (t > 0) {
      m = theta * m;
      var = theta * theta * var + sigma_v * sigma_v;
    }
    const double y = observations[t][0];
    const double s = var + r;
    out.log_likelihood += -0.5 * (std::log(2.0 * std::numbers::pi * s) + (y - m) * (y - m) / s);
    const double gain = var / s;
    m += gain * (y - m);
    var *= 1.0 - gain;
    out.mean.push_back(m);
    out.variance.push_back(var);
  }
  return out;
}

inline KalmanResult kalman_filter(const models::LinearGaussianModel& model, double theta, const Series& observations) {
  const auto& c = model.config();
  return kalman_filter(theta, c.sigma_v, c.sigma_w, c.x0_sd, observations);
}

}  // namespace adfsmc::oracles
