#include "powalloc/link_model.hpp"

#include <cmath>
#include <string>

#include "powalloc/errors.hpp"

namespace powalloc {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

void validate(const NoiseConfig& cfg) {
  if (!(cfg.bandwidth_hz > 0.0) || !std::isfinite(cfg.bandwidth_hz)) {
    throw InvalidConfigError("bandwidth_hz must be positive and finite");
  }
  switch (cfg.mode) {
    case NoiseMode::kExplicitPower:
      if (!(cfg.noise_power_w > 0.0) || !std::isfinite(cfg.noise_power_w)) {
        throw InvalidConfigError("noise_power_w must be positive and finite");
      }
      break;
    case NoiseMode::kThermal:
      if (!(cfg.temperature_k > 0.0) || !std::isfinite(cfg.temperature_k)) {
        throw InvalidConfigError("temperature_k must be positive and finite");
      }
      break;
  }
}

void validate(const Scenario& scenario) {
  validate(scenario.noise);
  if (scenario.links.empty()) {
    throw InvalidConfigError("scenario needs at least one link");
  }
  for (std::size_t i = 0; i < scenario.links.size(); ++i) {
    const LinkSpec& link = scenario.links[i];
    if (!(link.gain_linear > 0.0) || !std::isfinite(link.gain_linear)) {
      throw InvalidConfigError("link " + std::to_string(i + 1) +
                               ": gain_linear must be positive and finite");
    }
    if (!(link.target_rate_bps >= 0.0) ||
        !std::isfinite(link.target_rate_bps)) {
      throw InvalidConfigError("link " + std::to_string(i + 1) +
                               ": target_rate_bps must be non-negative");
    }
  }
  if (std::isnan(scenario.p_max_w) || scenario.p_max_w <= 0.0) {
    throw InvalidConfigError("p_max_w must be positive");
  }
}

double noise_power(const NoiseConfig& cfg) {
  validate(cfg);
  if (cfg.mode == NoiseMode::kThermal) {
    return cfg.bandwidth_hz * kBoltzmann * cfg.temperature_k;
  }
  return cfg.noise_power_w;
}

double shannon_rate(double p_tx_w, double gain_linear, const NoiseConfig& cfg) {
  const double n0 = noise_power(cfg);
  if (!(p_tx_w >= 0.0)) {
    throw InvalidConfigError("p_tx_w must be non-negative");
  }
  if (!(gain_linear > 0.0)) {
    throw InvalidConfigError("gain_linear must be positive");
  }
  const double snr = gain_linear * p_tx_w / n0;
  return cfg.bandwidth_hz * std::log1p(snr) / kLn2;
}

double required_tx_power(double avg_rate_bps, double mu, double gain_linear,
                         const NoiseConfig& cfg) {
  const double n0 = noise_power(cfg);
  if (!(gain_linear > 0.0)) {
    throw InvalidConfigError("gain_linear must be positive");
  }
  if (!(avg_rate_bps >= 0.0)) {
    throw InvalidConfigError("avg_rate_bps must be non-negative");
  }
  if (!(mu > 0.0)) {
    throw DegenerateMuError("time share must be positive, got " +
                            std::to_string(mu));
  }
  if (avg_rate_bps == 0.0) {
    return 0.0;
  }
  const double exponent = avg_rate_bps / (cfg.bandwidth_hz * mu);
  if (exponent > kMaxRateExponent) {
    throw ExponentOverflowError(
        "rate/(bandwidth*mu) = " + std::to_string(exponent) +
        " exceeds the exponent guard " + std::to_string(kMaxRateExponent));
  }
  // 2^x - 1 computed as expm1(x ln 2) to stay accurate for small exponents.
  return n0 / gain_linear * std::expm1(exponent * kLn2);
}

}  // namespace powalloc
