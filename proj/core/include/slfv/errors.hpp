#pragma once

#include <stdexcept>
#include <string>

namespace slfv {

/// Invalid argument or model parameter.
class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

/// Event applied out of time order.
class SequencingError : public std::logic_error {
 public:
  explicit SequencingError(const std::string& what) : std::logic_error(what) {}
};

/// Numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved_tolerance)
      : std::runtime_error(what), achieved_tolerance(achieved_tolerance) {}
  double achieved_tolerance;
};

/// Malformed experiment configuration; `field` is the offending path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(std::move(field)) {}
  std::string field;
};

}  // namespace slfv
