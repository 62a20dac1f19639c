#pragma once

#include <stdexcept>
#include <string>

namespace ds {

// Base class for all numerical failures raised by the library. The CLI maps
// ConfigError to exit code 2 and NumericalError to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : NumericalError {
  using NumericalError::NumericalError;
};

struct Overflow : NumericalError {
  using NumericalError::NumericalError;
};

struct ZeroLambda : NumericalError {
  using NumericalError::NumericalError;
};

struct OnPole : NumericalError {
  using NumericalError::NumericalError;
};

struct VanishingDenominator : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateSeed : ConfigError {
  using ConfigError::ConfigError;
};

struct DegeneratePoles : ConfigError {
  using ConfigError::ConfigError;
};

struct IllConditioned : NumericalError {
  using NumericalError::NumericalError;
};

struct GridTooSmall : ConfigError {
  using ConfigError::ConfigError;
};

struct DepthExceeded : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace ds
