#pragma once

#include <limits>
#include <vector>

#include "powalloc/units.hpp"

// Physical-layer quantities of a single-cell downlink: noise power,
// Shannon rate of a link, and the inverse mapping from an average target
// rate and a time share to the transmit power that sustains it.

namespace powalloc {

enum class NoiseMode {
  kExplicitPower,  // noise power given directly in watts
  kThermal,        // noise power derived as bandwidth * k * temperature
};

struct NoiseConfig {
  double bandwidth_hz{0.0};
  NoiseMode mode{NoiseMode::kExplicitPower};
  double noise_power_w{0.0};  // used in kExplicitPower mode
  double temperature_k{0.0};  // used in kThermal mode

  static NoiseConfig explicit_power(double bandwidth_hz, double noise_power_w) {
    return {bandwidth_hz, NoiseMode::kExplicitPower, noise_power_w, 0.0};
  }
  static NoiseConfig thermal(double bandwidth_hz, double temperature_k) {
    return {bandwidth_hz, NoiseMode::kThermal, 0.0, temperature_k};
  }
};

/// One mobile's downlink: linear channel power gain and average target rate.
struct LinkSpec {
  double gain_linear{0.0};
  double target_rate_bps{0.0};
};

/// A cell: noise configuration, the served links, and an optional per-link
/// transmit-power cap (infinity means uncapped).
struct Scenario {
  NoiseConfig noise;
  std::vector<LinkSpec> links;
  double p_max_w{std::numeric_limits<double>::infinity()};

  bool has_power_cap() const { return std::isfinite(p_max_w); }
};

/// Guard on the rate/bandwidth exponent R/(W*mu). Operating points beyond
/// this raise ExponentOverflowError instead of propagating infinities.
inline constexpr double kMaxRateExponent = 1024.0;

void validate(const NoiseConfig& cfg);
void validate(const Scenario& scenario);

/// Resolved noise power N0 in watts: the explicit value, or
/// bandwidth * kBoltzmann * temperature in thermal mode.
double noise_power(const NoiseConfig& cfg);

/// Shannon-bound link rate in bit/s: W * log2(1 + G*P/N0).
double shannon_rate(double p_tx_w, double gain_linear, const NoiseConfig& cfg);

/// Transmit power in watts sustaining an average rate over a time share mu:
/// (N0/G) * (2^(R/(W*mu)) - 1). Exact inverse of shannon_rate composed with
/// R = mu * rate-during-transmission.
double required_tx_power(double avg_rate_bps, double mu, double gain_linear,
                         const NoiseConfig& cfg);

}  // namespace powalloc
