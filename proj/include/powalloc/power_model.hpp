#pragma once

#include <array>
#include <string_view>

// Affine base-station supply-power model: P_supply = P0 + l * P_tx, with the
// load-dependence fraction eta_ld = l*P_max / (P0 + l*P_max) as the metric
// that decides how much of the consumption power control can touch.

namespace powalloc {

struct Allocation;  // defined in allocator.hpp

struct PowerModel {
  double p0_w{0.0};        // idle (load-independent) supply power
  double load_factor{1.0}; // slope mapping radiated power to supply power
  double p_max_w{0.0};     // maximum transmit power
};

/// Typical base-station classes with their transmit-power cap and
/// load-dependence fraction.
struct BsPreset {
  std::string_view name;
  double p_max_dbm;
  double eta_ld;
};

/// The four built-in presets: macro, micro, pico, femto.
const std::array<BsPreset, 4>& bs_presets();

/// Preset lookup by name; nullptr when unknown.
const BsPreset* find_preset(std::string_view name);

void validate(const PowerModel& model);

/// P0 + l * p_tx. Throws CapExceededError when p_tx exceeds the model cap.
double supply_power(const PowerModel& model, double p_tx_w);

/// Load-dependence fraction l*P_max / (P0 + l*P_max).
double load_dependence(const PowerModel& model);

/// Builds the affine model that reproduces the preset's eta_ld at the given
/// slope: P0 = l * P_max * (1 - eta) / eta.
PowerModel model_from_preset(const BsPreset& preset, double load_factor = 1.0);

/// Time-weighted supply power sum_i mu_i * (P0 + l * P_tx_i). Equals
/// P0 + l * p_sys_w whenever the time shares sum to one.
double avg_supply_power(const Allocation& alloc, const PowerModel& model);

}  // namespace powalloc
