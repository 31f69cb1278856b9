#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ellcm {

/// Raised when an argument lands within the pole guard of a period lattice.
class PoleError : public std::domain_error {
 public:
  PoleError(const std::string& what, std::complex<double> nearest)
      : std::domain_error(what), nearest_(nearest) {}

  /// Nearest lattice point, in the coordinates of the offending argument.
  std::complex<double> nearest() const { return nearest_; }

 private:
  std::complex<double> nearest_;
};

/// Theta series did not converge within the configured index cap.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ellcm
