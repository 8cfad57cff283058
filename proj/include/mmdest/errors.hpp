#pragma once

#include <stdexcept>
#include <string>

namespace mmdest {

/// The model family does not provide the requested quantity (e.g. a score
/// function for the uniform translation model).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A point has zero density under the current mixture weights.
class DegenerateDensity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed experiment configuration or process specification.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mmdest
