#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include <adfsmc/core/errors.hpp>

namespace adfsmc {

/// How the moment-matching integrals are evaluated.
///   monte_carlo:   M draws from the previous approximation, equal weights
///   gauss_hermite: M-point rule per dimension, tensor grid (M^p points)
///   unscented:     2p symmetric sigma points, equal weights
struct MomentScheme {
  enum class Kind { monte_carlo, gauss_hermite, unscented };

  Kind kind = Kind::gauss_hermite;
  std::size_t samples = 7;

  static MomentScheme monte_carlo(std::size_t m) { return {Kind::monte_carlo, m}; }
  static MomentScheme gauss_hermite(std::size_t m) { return {Kind::gauss_hermite, m}; }
  static MomentScheme unscented() { return {Kind::unscented, 0}; }

  void validate() const {
    if (kind != Kind::unscented && samples < 1) throw ConfigError("moment scheme needs M >= 1");
  }

  /// Number of evaluation points for a p-dimensional parameter.
  std::size_t point_count(std::size_t p, std::size_t cap = static_cast<std::size_t>(-1)) const {
    switch (kind) {
      case Kind::monte_carlo: return samples;
      case Kind::unscented: return 2 * p;
      case Kind::gauss_hermite: {
        std::size_t n = 1;
        for (std::size_t i = 0; i < p; ++i) {
          if (n > cap / samples) return cap;
          n *= samples;
        }
        return n;
      }
    }
    return 0;
  }

  friend bool operator==(const MomentScheme&, const MomentScheme&) = default;
};

inline std::string to_string(MomentScheme::Kind kind) {
  switch (kind) {
    case MomentScheme::Kind::monte_carlo: return "monte_carlo";
    case MomentScheme::Kind::gauss_hermite: return "gauss_hermite";
    case MomentScheme::Kind::unscented: return "unscented";
  }
  return "?";
}

inline MomentScheme::Kind parse_scheme_kind(std::string_view name) {
  if (name == "monte_carlo" || name == "mc") return MomentScheme::Kind::monte_carlo;
  if (name == "gauss_hermite" || name == "gh") return MomentScheme::Kind::gauss_hermite;
  if (name == "unscented" || name == "ut") return MomentScheme::Kind::unscented;
  throw ConfigError("unknown moment scheme '" + std::string(name) + "'");
}

inline constexpr std::size_t kDefaultPointBudget = 10000;
inline constexpr std::size_t kMaxTensorGridDim = 4;

/// Deterministic schemes are preferred; the tensor grid is only used for
/// p <= 4 and within the point budget, otherwise sigma points take over.
inline MomentScheme resolve_scheme(MomentScheme scheme, std::size_t p,
                                   std::size_t budget = kDefaultPointBudget) {
  if (scheme.kind == MomentScheme::Kind::gauss_hermite &&
      (p > kMaxTensorGridDim || scheme.point_count(p, budget + 1) > budget)) {
    return MomentScheme::unscented();
  }
  return scheme;
}

/// One-dimensional Gauss-Hermite rule for the standard normal weight
/// (probabilists' convention): sum_j w_j f(z_j) ~ E[f(Z)], Z ~ N(0, 1),
/// exact for polynomials of degree <= 2M - 1. Weights sum to one.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermiteRule(std::size_t m) : nodes(m), weights(m) {
    if (m == 0) throw ConfigError("Gauss-Hermite rule needs at least one node");
    // Golub-Welsch: eigen-decomposition of the Jacobi matrix of the
    // monic probabilists' Hermite recurrence He_{k+1} = z He_k - k He_{k-1}.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                   static_cast<Eigen::Index>(m));
    for (std::size_t k = 1; k < m; ++k) {
      const double off = std::sqrt(static_cast<double>(k));
      jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
      jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      nodes[j] = eig.eigenvalues()(static_cast<Eigen::Index>(j));
      const double v0 = eig.eigenvectors()(0, static_cast<Eigen::Index>(j));
      weights[j] = v0 * v0;
      total += weights[j];
    }
    for (auto& w : weights) w /= total;
    // Symmetrise away eigen-solver round-off: the rule is even.
    for (std::size_t j = 0; j < m / 2; ++j) {
      const std::size_t k = m - 1 - j;
      const double z = 0.5 * (nodes[k] - nodes[j]);
      const double w = 0.5 * (weights[j] + weights[k]);
      nodes[j] = -z;
      nodes[k] = z;
      weights[j] = weights[k] = w;
    }
    if (m % 2 == 1) nodes[m / 2] = 0.0;
  }

  std::size_t size() const { return nodes.size(); }
};

}  // namespace adfsmc
