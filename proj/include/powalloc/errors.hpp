#pragma once

#include <stdexcept>
#include <string>

namespace powalloc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario, noise configuration, solver options or input file.
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

/// A time share was zero or negative where a positive one is required.
class DegenerateMuError : public Error {
 public:
  using Error::Error;
};

/// The rate/bandwidth exponent exceeded the configured guard (see
/// kMaxRateExponent); the requested operating point is not representable.
class ExponentOverflowError : public Error {
 public:
  using Error::Error;
};

/// A transmit power above the model's maximum was supplied.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration requested for too many links.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A bisection hit its iteration cap before reaching tolerance.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Target rates cannot be met under the transmit-power cap.
class OverloadedError : public Error {
 public:
  OverloadedError(const std::string& msg, double sum_mu_min)
      : Error(msg), sum_mu_min_(sum_mu_min) {}

  /// Sum of the per-link minimum time shares that violated the frame budget.
  double sum_mu_min() const noexcept { return sum_mu_min_; }

 private:
  double sum_mu_min_;
};

}  // namespace powalloc
