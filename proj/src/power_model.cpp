#include "powalloc/power_model.hpp"

#include <cmath>
#include <string>

#include "powalloc/allocator.hpp"
#include "powalloc/errors.hpp"
#include "powalloc/units.hpp"

namespace powalloc {

const std::array<BsPreset, 4>& bs_presets() {
  static const std::array<BsPreset, 4> presets{{
      {"macro", 46.0, 0.50},
      {"micro", 38.0, 0.30},
      {"pico", 21.0, 0.14},
      {"femto", 17.0, 0.10},
  }};
  return presets;
}

const BsPreset* find_preset(std::string_view name) {
  for (const BsPreset& preset : bs_presets()) {
    if (preset.name == name) {
      return &preset;
    }
  }
  return nullptr;
}

void validate(const PowerModel& model) {
  if (!(model.p0_w >= 0.0) || !std::isfinite(model.p0_w)) {
    throw InvalidConfigError("p0_w must be non-negative and finite");
  }
  if (!(model.load_factor > 0.0) || !std::isfinite(model.load_factor)) {
    throw InvalidConfigError("load_factor must be positive and finite");
  }
  if (!(model.p_max_w > 0.0)) {
    throw InvalidConfigError("p_max_w must be positive");
  }
}

namespace {

// Boundary slack for cap comparisons; powers that land on the cap within
// rounding must not be rejected.
constexpr double kCapSlack = 1e-9;

void check_cap(double p_tx_w, double p_max_w) {
  if (p_tx_w > p_max_w * (1.0 + kCapSlack)) {
    throw CapExceededError("transmit power " + std::to_string(p_tx_w) +
                           " W exceeds the model cap " +
                           std::to_string(p_max_w) + " W");
  }
}

}  // namespace

double supply_power(const PowerModel& model, double p_tx_w) {
  validate(model);
  if (!(p_tx_w >= 0.0)) {
    throw InvalidConfigError("p_tx_w must be non-negative");
  }
  check_cap(p_tx_w, model.p_max_w);
  return model.p0_w + model.load_factor * p_tx_w;
}

double load_dependence(const PowerModel& model) {
  validate(model);
  const double loaded = model.load_factor * model.p_max_w;
  return loaded / (model.p0_w + loaded);
}

PowerModel model_from_preset(const BsPreset& preset, double load_factor) {
  if (!(load_factor > 0.0) || !std::isfinite(load_factor)) {
    throw InvalidConfigError("load_factor must be positive and finite");
  }
  if (!(preset.eta_ld > 0.0) || !(preset.eta_ld < 1.0)) {
    throw InvalidConfigError("preset eta_ld must lie in (0, 1)");
  }
  const double p_max_w = dbm_to_watts(preset.p_max_dbm);
  PowerModel model;
  model.load_factor = load_factor;
  model.p_max_w = p_max_w;
  model.p0_w = load_factor * p_max_w * (1.0 - preset.eta_ld) / preset.eta_ld;
  return model;
}

double avg_supply_power(const Allocation& alloc, const PowerModel& model) {
  validate(model);
  if (alloc.mu.size() != alloc.p_tx_w.size()) {
    throw InvalidConfigError("allocation mu/p_tx length mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < alloc.mu.size(); ++i) {
    check_cap(alloc.p_tx_w[i], model.p_max_w);
    total += alloc.mu[i] * (model.p0_w + model.load_factor * alloc.p_tx_w[i]);
  }
  return total;
}

}  // namespace powalloc
