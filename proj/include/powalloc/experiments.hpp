#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "powalloc/allocator.hpp"

// Deterministic tabular experiments. Grid points are independent, so both
// runners may evaluate them in parallel; rows are always emitted in grid
// order and are bit-identical between the serial and parallel paths.

namespace powalloc {

enum class ExecPolicy {
  kSerial,    // reference path, plain loop
  kParallel,  // OpenMP worksharing over grid points
};

/// Two-link sweep over the channel-gain gap: link 2 keeps fixed_gain_db
/// while link 1 is degraded below it by the swept amount, so the gap in dB
/// is the independent variable. Both links carry the same target rate.
struct GainSweepSpec {
  double fixed_gain_db{-100.0};
  double sweep_lo_db{0.0};
  double sweep_hi_db{40.0};
  double step_db{1.0};
  double rate_bps{1e7};
  NoiseConfig noise = NoiseConfig::explicit_power(1e7, dbm_to_watts(-103.0));
  double p_max_w{std::numeric_limits<double>::infinity()};
  SolverOptions solver{};
};

/// Supply-power savings of the optimal allocation against the equal-time
/// baseline mu_i = 1/N_L, across load-dependence fractions and per-user
/// target rates. The scenario supplies the gains and the transmit cap; its
/// per-link rates are overridden by each rate_grid entry. Requires a
/// bounded cap, which anchors the eta -> P0 inversion.
struct ModelComparisonSpec {
  Scenario scenario;
  std::vector<double> eta_grid;
  std::vector<double> rate_grid;
  double load_factor{1.0};
  SolverOptions solver{};
};

/// Generic result table. Numeric cells of flagged rows hold NaN and are
/// emitted as empty CSV fields; row_labels is an optional leading string
/// column (unused when label_column is empty).
struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_status;
  std::string label_column;
  std::vector<std::string> row_labels;

  std::vector<double> column(std::string_view name) const;
  double at(std::size_t row, std::string_view name) const;
};

SweepResult run_gain_sweep(const GainSweepSpec& spec,
                           ExecPolicy policy = ExecPolicy::kParallel);

SweepResult run_model_comparison(const ModelComparisonSpec& spec,
                                 ExecPolicy policy = ExecPolicy::kParallel);

/// Energy in joules consumed at an average power over a duration.
double energy(double avg_power_w, double duration_s);

/// CSV emission: header then data rows, comma-delimited, 9 significant
/// digits, locale-independent.
std::string to_csv(const SweepResult& result);

}  // namespace powalloc
