#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <adfsmc/approx/discrete.hpp>
#include <adfsmc/approx/gaussian.hpp>
#include <adfsmc/approx/mixture.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc {

using ParamApprox = std::variant<GaussianApprox, MixtureApprox, FactorizedDiscreteApprox>;

inline void approx_sample(const ParamApprox& q, RngStream& rng, std::span<double> out) {
  std::visit([&](const auto& a) { approx_sample(a, rng, out); }, q);
}

inline ParamVector approx_sample(const ParamApprox& q, RngStream& rng) {
  ParamVector theta;
  theta.kind = std::holds_alternative<FactorizedDiscreteApprox>(q) ? ParamKind::discrete : ParamKind::continuous;
  theta.values.resize(std::visit([](const auto& a) { return a.dim(); }, q));
  approx_sample(q, rng, theta.values);
  return theta;
}

enum class ApproxFamily { gaussian, mixture, discrete };

inline ApproxFamily parse_approx_family(std::string_view name) {
  if (name == "gaussian") return ApproxFamily::gaussian;
  if (name == "mixture") return ApproxFamily::mixture;
  if (name == "discrete") return ApproxFamily::discrete;
  throw ConfigError("unknown approximation family '" + std::string(name) + "'");
}

inline const char* to_string(ApproxFamily f) {
  switch (f) {
    case ApproxFamily::gaussian: return "gaussian";
    case ApproxFamily::mixture: return "mixture";
    case ApproxFamily::discrete: return "discrete";
  }
  return "?";
}

struct ApproxOptions {
  MomentScheme scheme = MomentScheme::gauss_hermite(7);
  std::size_t mixture_size = 10;
};

inline GaussianApprox gaussian_prior(const ParamSpace& space) {
  const auto p = static_cast<Eigen::Index>(space.dim);
  if (space.prior_mean.size() != space.dim || space.prior_cov.size() != space.dim * space.dim) {
    throw ConfigError("continuous parameter space lacks Gaussian prior moments");
  }
  Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(space.prior_mean.data(), p);
  Eigen::MatrixXd cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      space.prior_cov.data(), p, p);
  return GaussianApprox(std::move(mean), std::move(cov));
}

/// Per-family hooks used by the filter engine.
template <class Approx>
struct ApproxTraits;

template <>
struct ApproxTraits<GaussianApprox> {
  using Workspace = MomentWorkspace;
  static constexpr ParamKind kKind = ParamKind::continuous;
  static constexpr const char* kName = "gaussian";

  template <DynamicModel Model>
  static GaussianApprox prior(const Model& model, const ApproxOptions&, RngStream&) {
    return gaussian_prior(model.param_space());
  }
  static Workspace workspace(const GaussianApprox& proto, const ApproxOptions& opts) {
    return Workspace(proto.dim(), resolve_scheme(opts.scheme, proto.dim()));
  }
  template <class Likelihood>
  static UpdateStatus update(const GaussianApprox& prev, const Likelihood& lik, RngStream& rng, Workspace& ws,
                             GaussianApprox& out) {
    return gaussian_update(prev, lik, rng, ws, out);
  }
};

template <>
struct ApproxTraits<MixtureApprox> {
  using Workspace = MixtureWorkspace;
  static constexpr ParamKind kKind = ParamKind::continuous;
  static constexpr const char* kName = "mixture";

  template <DynamicModel Model>
  static MixtureApprox prior(const Model& model, const ApproxOptions& opts, RngStream& rng) {
    if (opts.mixture_size < 1) throw ConfigError("mixture needs L >= 1 components");
    return MixtureApprox::from_prior(gaussian_prior(model.param_space()), opts.mixture_size,
                                     [&](std::span<double> out) { model.sample_param_prior(rng, out); });
  }
  static Workspace workspace(const MixtureApprox& proto, const ApproxOptions& opts) {
    return Workspace(proto.dim(), proto.capacity(), resolve_scheme(opts.scheme, proto.dim()));
  }
  template <class Likelihood>
  static UpdateStatus update(const MixtureApprox& prev, const Likelihood& lik, RngStream& rng, Workspace& ws,
                             MixtureApprox& out) {
    return mixture_update(prev, lik, rng, ws, out);
  }
};

template <>
struct ApproxTraits<FactorizedDiscreteApprox> {
  using Workspace = DiscreteWorkspace;
  static constexpr ParamKind kKind = ParamKind::discrete;
  static constexpr const char* kName = "discrete";

  template <DynamicModel Model>
  static FactorizedDiscreteApprox prior(const Model& model, const ApproxOptions&, RngStream&) {
    return FactorizedDiscreteApprox(model.param_space().cardinalities);
  }
  static Workspace workspace(const FactorizedDiscreteApprox& proto, const ApproxOptions& opts) {
    return Workspace(proto.cardinalities, opts.scheme.samples);
  }
  template <class Likelihood>
  static UpdateStatus update(const FactorizedDiscreteApprox& prev, const Likelihood& lik, RngStream& rng,
                             Workspace& ws, FactorizedDiscreteApprox& out) {
    return ws.update(prev, lik, rng, out);
  }
};

}  // namespace adfsmc
