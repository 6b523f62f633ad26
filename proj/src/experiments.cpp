#include "powalloc/experiments.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <utility>

#include "double_format.hpp"
#include "powalloc/errors.hpp"
#include "powalloc/units.hpp"

namespace powalloc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Grid-point loop shared by the runners: rows are computed independently
// and written to their own slot, so evaluation order never shows in the
// output. Exceptions other than per-point overloads are rethrown after the
// loop (they must not escape an OpenMP region).
template <typename Body>
void for_each_grid_point(std::int64_t count, ExecPolicy policy, Body&& body) {
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  if (policy == ExecPolicy::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) {
      std::rethrow_exception(failure);
    }
  }
}

std::int64_t grid_size(double lo, double hi, double step) {
  if (!(step > 0.0)) {
    throw InvalidConfigError("step must be positive");
  }
  if (hi < lo) {
    throw InvalidConfigError("sweep range is empty (hi < lo)");
  }
  return static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

}  // namespace

std::vector<double> SweepResult::column(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) {
      std::vector<double> values(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        values[r] = rows[r][c];
      }
      return values;
    }
  }
  throw InvalidConfigError("no such column: " + std::string(name));
}

double SweepResult::at(std::size_t row, std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) {
      return rows.at(row)[c];
    }
  }
  throw InvalidConfigError("no such column: " + std::string(name));
}

SweepResult run_gain_sweep(const GainSweepSpec& spec, ExecPolicy policy) {
  validate(spec.noise);
  if (!(spec.rate_bps >= 0.0)) {
    throw InvalidConfigError("rate_bps must be non-negative");
  }
  const std::int64_t n = grid_size(spec.sweep_lo_db, spec.sweep_hi_db, spec.step_db);

  SweepResult result;
  result.columns = {"dgain_db",   "mu_1",      "mu_2",    "ptx_1_w",
                    "ptx_2_w",    "ptx_1_dbm", "ptx_2_dbm", "dp_db",
                    "psys_w"};
  result.rows.assign(static_cast<std::size_t>(n),
                     std::vector<double>(result.columns.size(), kNan));
  result.row_status.assign(static_cast<std::size_t>(n), "ok");

  const double fixed_gain = db_to_linear(spec.fixed_gain_db);

  for_each_grid_point(n, policy, [&](std::int64_t i) {
    const double dgain_db = spec.sweep_lo_db + static_cast<double>(i) * spec.step_db;
    auto& row = result.rows[static_cast<std::size_t>(i)];
    row[0] = dgain_db;

    Scenario scenario;
    scenario.noise = spec.noise;
    scenario.p_max_w = spec.p_max_w;
    scenario.links = {
        {db_to_linear(spec.fixed_gain_db - dgain_db), spec.rate_bps},
        {fixed_gain, spec.rate_bps},
    };
    try {
      const Allocation alloc = solve_general(scenario, spec.solver);
      const double p1_dbm = watts_to_dbm(alloc.p_tx_w[0]);
      const double p2_dbm = watts_to_dbm(alloc.p_tx_w[1]);
      row[1] = alloc.mu[0];
      row[2] = alloc.mu[1];
      row[3] = alloc.p_tx_w[0];
      row[4] = alloc.p_tx_w[1];
      row[5] = p1_dbm;
      row[6] = p2_dbm;
      row[7] = p1_dbm - p2_dbm;
      row[8] = alloc.p_sys_w;
    } catch (const OverloadedError&) {
      result.row_status[static_cast<std::size_t>(i)] = "overloaded";
    }
  });
  return result;
}

SweepResult run_model_comparison(const ModelComparisonSpec& spec,
                                 ExecPolicy policy) {
  validate(spec.scenario);
  if (!spec.scenario.has_power_cap()) {
    throw InvalidConfigError(
        "model comparison needs a bounded p_max_w to anchor the eta -> P0 "
        "inversion");
  }
  if (spec.eta_grid.empty() || spec.rate_grid.empty()) {
    throw InvalidConfigError("eta_grid and rate_grid must be non-empty");
  }
  for (double eta : spec.eta_grid) {
    if (!(eta > 0.0) || !(eta < 1.0)) {
      throw InvalidConfigError("eta values must lie in (0, 1)");
    }
  }
  for (double rate : spec.rate_grid) {
    if (!(rate >= 0.0)) {
      throw InvalidConfigError("rates must be non-negative");
    }
  }
  if (!(spec.load_factor > 0.0)) {
    throw InvalidConfigError("load_factor must be positive");
  }

  const std::size_t n_links = spec.scenario.links.size();
  const std::int64_t n_rates = static_cast<std::int64_t>(spec.rate_grid.size());

  // The optimizer is invariant to (P0, l), so each rate is solved once and
  // shared across the whole eta grid.
  struct RatePoint {
    bool feasible = false;
    bool baseline_feasible = false;
    double psys_opt = kNan;
    double psys_base = kNan;
    Allocation alloc;
  };
  std::vector<RatePoint> points(static_cast<std::size_t>(n_rates));

  for_each_grid_point(n_rates, policy, [&](std::int64_t j) {
    RatePoint& point = points[static_cast<std::size_t>(j)];
    Scenario scenario = spec.scenario;
    for (LinkSpec& link : scenario.links) {
      link.target_rate_bps = spec.rate_grid[static_cast<std::size_t>(j)];
    }
    try {
      point.alloc = solve_general(scenario, spec.solver);
      point.psys_opt = point.alloc.p_sys_w;
      point.feasible = true;
    } catch (const OverloadedError&) {
      return;
    }
    // Equal-time baseline: mu = 1/N for every link, each at the power its
    // rate demands in that slot.
    const double mu_base = 1.0 / static_cast<double>(n_links);
    double psys_base = 0.0;
    bool base_ok = true;
    for (const LinkSpec& link : scenario.links) {
      const double p = required_tx_power(link.target_rate_bps, mu_base,
                                         link.gain_linear, scenario.noise);
      if (p > scenario.p_max_w * (1.0 + 1e-9)) {
        base_ok = false;
        break;
      }
      psys_base += mu_base * p;
    }
    point.baseline_feasible = base_ok;
    if (base_ok) {
      point.psys_base = psys_base;
    }
  });

  SweepResult result;
  result.columns = {"eta_ld",        "rate_bps",      "p0_w",
                    "psys_opt_w",    "psys_base_w",   "psupply_opt_w",
                    "psupply_base_w", "savings"};
  const std::size_t total = spec.eta_grid.size() * static_cast<std::size_t>(n_rates);
  result.rows.assign(total, std::vector<double>(result.columns.size(), kNan));
  result.row_status.assign(total, "ok");

  std::size_t r = 0;
  for (double eta : spec.eta_grid) {
    PowerModel model;
    model.load_factor = spec.load_factor;
    model.p_max_w = spec.scenario.p_max_w;
    model.p0_w = spec.load_factor * model.p_max_w * (1.0 - eta) / eta;
    for (std::int64_t j = 0; j < n_rates; ++j, ++r) {
      const RatePoint& point = points[static_cast<std::size_t>(j)];
      auto& row = result.rows[r];
      row[0] = eta;
      row[1] = spec.rate_grid[static_cast<std::size_t>(j)];
      row[2] = model.p0_w;
      if (!point.feasible) {
        result.row_status[r] = "overloaded";
        continue;
      }
      row[3] = point.psys_opt;
      const double supply_opt = avg_supply_power(point.alloc, model);
      const double supply_opt_affine =
          model.p0_w + model.load_factor * point.psys_opt;
      if (std::abs(supply_opt - supply_opt_affine) >
          1e-12 * std::max(1.0, std::abs(supply_opt))) {
        throw Error("supply power accounting mismatch between the weighted "
                    "sum and the affine form");
      }
      row[5] = supply_opt;
      if (!point.baseline_feasible) {
        result.row_status[r] = "baseline_overloaded";
        continue;
      }
      row[4] = point.psys_base;
      const double supply_base =
          model.p0_w + model.load_factor * point.psys_base;
      row[6] = supply_base;
      row[7] = (supply_base - supply_opt) / supply_base;
    }
  }
  return result;
}

double energy(double avg_power_w, double duration_s) {
  if (!(duration_s >= 0.0)) {
    throw InvalidConfigError("duration_s must be non-negative");
  }
  return avg_power_w * duration_s;
}

std::string to_csv(const SweepResult& result) {
  std::string out;
  const bool labeled = !result.label_column.empty();
  if (labeled) {
    out += result.label_column;
    out += ',';
  }
  for (std::size_t c = 0; c < result.columns.size(); ++c) {
    out += result.columns[c];
    out += ',';
  }
  out += "status\n";
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    if (labeled) {
      out += result.row_labels.at(r);
      out += ',';
    }
    for (double value : result.rows[r]) {
      if (!std::isnan(value)) {
        out += detail::format_double(value);
      }
      out += ',';
    }
    out += result.row_status[r];
    out += '\n';
  }
  return out;
}

}  // namespace powalloc
