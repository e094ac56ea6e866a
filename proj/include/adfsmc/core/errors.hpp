#pragma once

#include <stdexcept>
#include <string>

namespace adfsmc {

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Every particle weight is zero; the filter cannot continue.
class DegenerateWeightsError : public std::runtime_error {
 public:
  explicit DegenerateWeightsError(const std::string& what) : std::runtime_error(what) {}
};

class SingularCovarianceError : public std::runtime_error {
 public:
  explicit SingularCovarianceError(const std::string& what) : std::runtime_error(what) {}
};

// Requested quadrature grid exceeds the configured point budget.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedParamKindError : public std::invalid_argument {
 public:
  explicit UnsupportedParamKindError(const std::string& what) : std::invalid_argument(what) {}
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace adfsmc
