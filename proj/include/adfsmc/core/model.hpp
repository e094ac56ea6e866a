#pragma once

#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/rng.hpp>

namespace adfsmc {

enum class ParamKind { continuous, discrete };

inline const char* to_string(ParamKind kind) {
  return kind == ParamKind::continuous ? "continuous" : "discrete";
}

struct Dims {
  std::size_t param = 0;
  std::size_t state = 0;
  std::size_t obs = 0;
};

/// Static description of the parameter space Theta.
///
/// Continuous spaces carry the Gaussian moments of the prior (used to seed
/// the Gaussian and mixture approximations) and optional box bounds (used by
/// the truncated PMMH proposal). Discrete spaces carry one cardinality per
/// coordinate; codes are stored as exact integers in doubles.
struct ParamSpace {
  ParamKind kind = ParamKind::continuous;
  std::size_t dim = 0;
  std::vector<int> cardinalities;
  std::vector<double> prior_mean;
  std::vector<double> prior_cov;  // row-major dim x dim
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t joint_cardinality(std::size_t cap = std::numeric_limits<std::size_t>::max()) const {
    std::size_t total = 1;
    for (int c : cardinalities) {
      if (total > cap / static_cast<std::size_t>(c)) return cap;
      total *= static_cast<std::size_t>(c);
    }
    return total;
  }
};

/// A parameter value theta, tagged with its kind.
struct ParamVector {
  ParamKind kind = ParamKind::continuous;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<const double> view() const { return values; }
};

inline void validate(const ParamVector& theta, const ParamSpace& space) {
  if (theta.kind != space.kind) throw DimensionError("parameter kind does not match the model");
  if (theta.values.size() != space.dim) {
    throw DimensionError("parameter dimension " + std::to_string(theta.values.size()) +
                         " != model dimension " + std::to_string(space.dim));
  }
  if (space.kind == ParamKind::discrete) {
    for (std::size_t i = 0; i < space.dim; ++i) {
      const double v = theta.values[i];
      if (v != static_cast<double>(static_cast<long>(v)) || v < 0 || v >= space.cardinalities[i]) {
        throw DimensionError("discrete code out of range at coordinate " + std::to_string(i));
      }
    }
  }
}

/// The D most recent states of one particle, oldest first.
///
/// A view over a ring of state pointers, so a window can be read straight
/// out of the particle store without copying payloads.
class StateWindow {
 public:
  StateWindow() = default;
  StateWindow(const double* const* ring, std::size_t ring_size, std::size_t start,
              std::size_t order, std::size_t dim)
      : ring_(ring), ring_size_(ring_size), start_(start), order_(order), dim_(dim) {}

  /// Window over an explicit list of state pointers (oldest first).
  static StateWindow over(std::span<const double* const> states, std::size_t dim) {
    return StateWindow(states.data(), states.size(), 0, states.size(), dim);
  }

  std::size_t size() const { return order_; }
  bool empty() const { return order_ == 0; }
  std::size_t dim() const { return dim_; }

  std::span<const double> operator[](std::size_t j) const {
    return {ring_[(start_ + j) % ring_size_], dim_};
  }
  std::span<const double> newest() const { return (*this)[order_ - 1]; }

 private:
  const double* const* ring_ = nullptr;
  std::size_t ring_size_ = 1;
  std::size_t start_ = 0;
  std::size_t order_ = 0;
  std::size_t dim_ = 0;
};

/// State-space model interface:
///   x_0 ~ p(x_0 | theta), x_t ~ p(x_t | x_{t-D:t-1}, theta), y_t ~ p(y_t | x_t, theta).
///
/// All densities are in log space and must be finite or -inf, never NaN.
/// The timestep argument lets models with exogenous inputs (SLAM actions)
/// look up their control; other models ignore it. At timesteps k < D the
/// window holds only the k states that exist.
///
/// The *_depends_on_param() flags mark terms that are constant in theta;
/// the parameter likelihood evaluates such terms once and caches them.
template <class M>
concept DynamicModel = requires(const M& model, RngStream& rng, std::span<const double> in,
                                std::span<double> out, StateWindow window, std::size_t t) {
  { model.dims() } -> std::same_as<Dims>;
  { model.markov_order() } -> std::convertible_to<std::size_t>;
  { model.param_space() } -> std::convertible_to<const ParamSpace&>;
  model.sample_param_prior(rng, out);
  { model.param_prior_logpdf(in) } -> std::convertible_to<double>;
  model.sample_state_prior(rng, in, out);
  { model.state_prior_logpdf(in, in) } -> std::convertible_to<double>;
  model.sample_transition(rng, t, window, in, out);
  { model.transition_logpdf(t, in, window, in) } -> std::convertible_to<double>;
  model.sample_obs(rng, t, in, in, out);
  { model.obs_logpdf(t, in, in, in) } -> std::convertible_to<double>;
  { model.obs_depends_on_param() } -> std::convertible_to<bool>;
  { model.transition_depends_on_param() } -> std::convertible_to<bool>;
  { model.state_prior_depends_on_param() } -> std::convertible_to<bool>;
};

/// Row-major sequence of fixed-dimension vectors (a state or observation path).
class Series {
 public:
  Series() = default;
  explicit Series(std::size_t dim, std::size_t reserve_rows = 0) : dim_(dim) {
    values_.reserve(dim * reserve_rows);
  }
  Series(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0 || values_.size() % dim_ != 0) throw DimensionError("series size not a multiple of dim");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> operator[](std::size_t t) const { return {values_.data() + t * dim_, dim_}; }
  std::span<double> operator[](std::size_t t) { return {values_.data() + t * dim_, dim_}; }

  void push_back(std::span<const double> row) {
    if (row.size() != dim_) throw DimensionError("series row has wrong dimension");
    values_.insert(values_.end(), row.begin(), row.end());
  }
  void resize(std::size_t rows) { values_.resize(rows * dim_); }

  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct Trajectory {
  Series states;
  Series observations;
};

enum class PriorTerm { include, exclude };

/// Deferred evaluation of theta -> log t_k(theta) for fixed (x_k, window, y_k):
///   k = 0: log p(theta) + log p(y_0 | x_0, theta) [+ log p(x_0 | theta) if theta-dependent]
///   k > 0: log p(y_k | x_k, theta) + log p(x_k | window, theta)
///
/// Holds views into caller storage; it must not outlive them.
template <DynamicModel Model>
class ParamLikelihood {
 public:
  ParamLikelihood(const Model& model, std::size_t k, std::span<const double> x_new,
                  StateWindow window, std::span<const double> y, PriorTerm prior)
      : model_(&model), k_(k), x_(x_new), window_(window), y_(y),
        include_prior_(prior == PriorTerm::include && k == 0),
        obs_varies_(model.obs_depends_on_param()),
        dyn_varies_(k == 0 ? model.state_prior_depends_on_param()
                           : model.transition_depends_on_param()) {}

  double operator()(std::span<const double> theta) const {
    if (!constant_ready_) {
      // theta-free terms are identical at every theta; evaluate them once.
      double c = 0.0;
      if (!obs_varies_) c += model_->obs_logpdf(k_, y_, x_, theta);
      if (!dyn_varies_) c += dynamics(theta);
      constant_ = c;
      constant_ready_ = true;
    }
    double value = constant_;
    if (include_prior_) value += model_->param_prior_logpdf(theta);
    if (obs_varies_) value += model_->obs_logpdf(k_, y_, x_, theta);
    if (dyn_varies_) value += dynamics(theta);
    return value;
  }

  std::size_t timestep() const { return k_; }

 private:
  double dynamics(std::span<const double> theta) const {
    if (k_ == 0) {
      // p(x_0 | theta) enters t_0 only when the state prior actually involves theta.
      return model_->state_prior_depends_on_param() ? model_->state_prior_logpdf(x_, theta) : 0.0;
    }
    return model_->transition_logpdf(k_, x_, window_, theta);
  }

  const Model* model_;
  std::size_t k_;
  std::span<const double> x_;
  StateWindow window_;
  std::span<const double> y_;
  bool include_prior_;
  bool obs_varies_;
  bool dyn_varies_;
  mutable double constant_ = 0.0;
  mutable bool constant_ready_ = false;
};

template <DynamicModel Model>
ParamLikelihood<Model> make_param_likelihood(const Model& model, std::size_t k,
                                             std::span<const double> x_new, StateWindow window,
                                             std::span<const double> y,
                                             PriorTerm prior = PriorTerm::include) {
  const Dims dims = model.dims();
  if (x_new.size() != dims.state) throw DimensionError("state dimension mismatch");
  if (y.size() != dims.obs) throw DimensionError("observation dimension mismatch");
  const std::size_t order = static_cast<std::size_t>(model.markov_order());
  const std::size_t expected = k == 0 ? 0 : (k < order ? k : order);
  if (window.size() != expected) {
    throw DimensionError("window length " + std::to_string(window.size()) + " != expected " +
                         std::to_string(expected));
  }
  if (!window.empty() && window.dim() != dims.state) throw DimensionError("window state dimension mismatch");
  return ParamLikelihood<Model>(model, k, x_new, window, y, prior);
}

/// Draw (x_{0:T}, y_{0:T}) from the model at fixed theta.
template <DynamicModel Model>
Trajectory simulate(const Model& model, const ParamVector& theta, std::size_t steps, RngStream& rng) {
  validate(theta, model.param_space());
  const Dims dims = model.dims();
  const std::size_t order = static_cast<std::size_t>(model.markov_order());
  Trajectory traj{Series(dims.state), Series(dims.obs)};
  traj.states.resize(steps + 1);
  traj.observations.resize(steps + 1);
  std::vector<const double*> window_ptrs(order);

  model.sample_state_prior(rng, theta.view(), traj.states[0]);
  model.sample_obs(rng, 0, traj.states[0], theta.view(), traj.observations[0]);
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::size_t len = t < order ? t : order;
    for (std::size_t j = 0; j < len; ++j) window_ptrs[j] = traj.states[t - len + j].data();
    const StateWindow window = StateWindow::over({window_ptrs.data(), len}, dims.state);
    model.sample_transition(rng, t, window, theta.view(), traj.states[t]);
    model.sample_obs(rng, t, traj.states[t], theta.view(), traj.observations[t]);
  }
  return traj;
}

template <DynamicModel Model>
Trajectory simulate(const Model& model, const ParamVector& theta, std::size_t steps,
                    std::uint64_t seed) {
  RngStream rng(seed, StreamId::kSimulate);
  return simulate(model, theta, steps, rng);
}

}  // namespace adfsmc
