#pragma once

#include <stdexcept>
#include <string>

namespace thetabal {

/// Invalid user input: malformed forms, out-of-range parameters. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric certificate could not be established (truncation, quadrature,
/// positivity of the pulled-back Fubini-Study form). CLI exit code 3.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The exact hull construction could not certify its faces inside the lattice
/// window it grew to. Indicates a bug, not bad input.
class WindowExhaustedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace thetabal
