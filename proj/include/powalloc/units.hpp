#pragma once

#include <cmath>

// dB/dBm conversions. All library internals work in linear SI units
// (watts, Hz, bit/s); decibel values appear only at the I/O boundary.

namespace powalloc {

/// Boltzmann constant in J/K (2019 SI exact value).
inline constexpr double kBoltzmann = 1.380649e-23;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

inline double dbm_to_watts(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double watts) {
  return 10.0 * std::log10(watts) + 30.0;
}

}  // namespace powalloc
