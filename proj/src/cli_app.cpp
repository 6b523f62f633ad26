#include "powalloc/cli_app.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "double_format.hpp"
#include "powalloc/allocator.hpp"
#include "powalloc/errors.hpp"
#include "powalloc/experiments.hpp"
#include "powalloc/scenario_io.hpp"
#include "powalloc/units.hpp"

namespace powalloc {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitOverloaded = 3;
constexpr int kExitNoConvergence = 4;

struct GlobalOptions {
  std::string format;  // empty = per-command default
  std::optional<double> tolerance;
  std::optional<int> max_iterations;

  SolverOptions solver() const {
    SolverOptions opts;
    if (tolerance) {
      // One knob for both loops: the outer residual gets the value, the
      // inner bisection a decade finer.
      opts.lambda_tolerance = *tolerance;
      opts.mu_tolerance = *tolerance / 10.0;
    }
    if (max_iterations) {
      opts.max_iterations = *max_iterations;
    }
    return opts;
  }

  std::string format_or(const std::string& fallback) const {
    return format.empty() ? fallback : format;
  }
};

std::string fmt(double value) { return detail::format_double(value); }

json allocation_to_json(const Allocation& alloc) {
  json mu = json::array();
  json ptx_w = json::array();
  json ptx_dbm = json::array();
  for (std::size_t i = 0; i < alloc.mu.size(); ++i) {
    mu.push_back(alloc.mu[i]);
    ptx_w.push_back(alloc.p_tx_w[i]);
    if (alloc.p_tx_w[i] > 0.0) {
      ptx_dbm.push_back(watts_to_dbm(alloc.p_tx_w[i]));
    } else {
      ptx_dbm.push_back(nullptr);
    }
  }
  return json{{"mu", mu},
              {"ptx_w", ptx_w},
              {"ptx_dbm", ptx_dbm},
              {"p_sys_w", alloc.p_sys_w},
              {"converged", alloc.converged},
              {"kkt_residual_w", alloc.kkt_residual}};
}

void print_solve_text(std::ostream& out, const LoadedScenario& loaded,
                      const Allocation& alloc,
                      const std::optional<double>& p_supply) {
  const auto cell = [](const std::string& text) {
    std::string padded = text;
    padded.resize(std::max<std::size_t>(padded.size() + 2, 16), ' ');
    return padded;
  };
  out << "link  " << cell("gain_db") << cell("rate_bps") << cell("mu")
      << cell("ptx_w") << "ptx_dbm\n";
  for (std::size_t i = 0; i < alloc.mu.size(); ++i) {
    const LinkSpec& link = loaded.scenario.links[i];
    char index[32];
    std::snprintf(index, sizeof(index), "%4zu  ", i + 1);
    out << index << cell(fmt(linear_to_db(link.gain_linear)))
        << cell(fmt(link.target_rate_bps)) << cell(fmt(alloc.mu[i]))
        << cell(fmt(alloc.p_tx_w[i]))
        << (alloc.p_tx_w[i] > 0.0 ? fmt(watts_to_dbm(alloc.p_tx_w[i])) : "-")
        << "\n";
  }
  out << "p_sys_w         " << fmt(alloc.p_sys_w);
  if (alloc.p_sys_w > 0.0) {
    out << "  (" << fmt(watts_to_dbm(alloc.p_sys_w)) << " dBm)";
  }
  out << "\n";
  out << "converged       " << (alloc.converged ? "yes" : "no") << "\n";
  out << "kkt_residual_w  " << fmt(alloc.kkt_residual) << "\n";
  if (p_supply) {
    const PowerModel& model = *loaded.power_model;
    out << "p_supply_w      " << fmt(*p_supply) << "\n";
    out << "eta_ld          " << fmt(load_dependence(model)) << "\n";
  }
}

int cmd_solve(const std::string& path, const GlobalOptions& global,
              std::ostream& out) {
  const LoadedScenario loaded = load_scenario_file(path);
  const std::string format = global.format_or("text");
  if (format != "text" && format != "json") {
    throw CLI::ValidationError("--format", "solve supports text or json");
  }

  const SolverOptions opts = global.solver();
  Allocation alloc;
  std::optional<double> p_supply;
  if (loaded.power_model) {
    const SupplySolution solution =
        solve_supply(loaded.scenario, *loaded.power_model, opts);
    alloc = solution.allocation;
    p_supply = solution.p_supply_w;
  } else {
    alloc = solve_general(loaded.scenario, opts);
  }

  if (format == "json") {
    json report;
    report["scenario"] = scenario_to_json(loaded.scenario, loaded.power_model);
    report["allocation"] = allocation_to_json(alloc);
    if (p_supply) {
      report["supply"] = {{"p0_w", loaded.power_model->p0_w},
                          {"load_factor", loaded.power_model->load_factor},
                          {"p_max_dbm", watts_to_dbm(loaded.power_model->p_max_w)},
                          {"eta_ld", load_dependence(*loaded.power_model)},
                          {"p_supply_w", *p_supply}};
    }
    out << report.dump(2) << "\n";
  } else {
    print_solve_text(out, loaded, alloc, p_supply);
  }
  return kExitOk;
}

void emit_table(const SweepResult& table, const std::string& format,
                std::ostream& out) {
  if (format == "csv") {
    out << to_csv(table);
    return;
  }
  if (format != "json") {
    throw CLI::ValidationError("--format", "sweeps support csv or json");
  }
  json rows = json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    json row;
    if (!table.label_column.empty()) {
      row[table.label_column] = table.row_labels[r];
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double value = table.rows[r][c];
      row[table.columns[c]] = std::isnan(value) ? json(nullptr) : json(value);
    }
    row["status"] = table.row_status[r];
    rows.push_back(row);
  }
  out << rows.dump(2) << "\n";
}

struct SweepFlags {
  double fixed_gain_db = -100.0;
  std::string range_db = "0:40";
  double step_db = 1.0;
  double rate_bps = 1e7;
  double bandwidth_hz = 1e7;
  double noise_dbm = -103.0;
  std::optional<double> p_max_dbm;
  bool serial = false;
};

int cmd_sweep(const SweepFlags& flags, const GlobalOptions& global,
              std::ostream& out) {
  GainSweepSpec spec;
  spec.fixed_gain_db = flags.fixed_gain_db;
  const auto colon = flags.range_db.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError("--range-db", "expected lo:hi");
  }
  try {
    spec.sweep_lo_db = std::stod(flags.range_db.substr(0, colon));
    spec.sweep_hi_db = std::stod(flags.range_db.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--range-db", "expected lo:hi as numbers");
  }
  spec.step_db = flags.step_db;
  spec.rate_bps = flags.rate_bps;
  spec.noise = NoiseConfig::explicit_power(flags.bandwidth_hz,
                                           dbm_to_watts(flags.noise_dbm));
  if (flags.p_max_dbm) {
    spec.p_max_w = dbm_to_watts(*flags.p_max_dbm);
  }
  spec.solver = global.solver();

  const SweepResult table = run_gain_sweep(
      spec, flags.serial ? ExecPolicy::kSerial : ExecPolicy::kParallel);
  emit_table(table, global.format_or("csv"), out);
  return kExitOk;
}

struct CompareFlags {
  std::vector<std::string> presets{"macro", "micro", "pico", "femto"};
  std::vector<double> rates{1e6, 3e6, 1e7};
  int users = 10;
  double bandwidth_hz = 1e7;
  double noise_dbm = -103.0;
  double p_max_dbm = 46.0;
  double center_gain_db = -100.0;
  double gain_spread_db = 18.0;
  double load_factor = 1.0;
  bool serial = false;
};

int cmd_compare_models(const CompareFlags& flags, const GlobalOptions& global,
                       std::ostream& out) {
  if (flags.users < 1) {
    throw CLI::ValidationError("--users", "need at least one user");
  }
  ModelComparisonSpec spec;
  spec.scenario.noise = NoiseConfig::explicit_power(
      flags.bandwidth_hz, dbm_to_watts(flags.noise_dbm));
  spec.scenario.p_max_w = dbm_to_watts(flags.p_max_dbm);
  // Users spread evenly in dB around the center gain, best first.
  for (int i = 0; i < flags.users; ++i) {
    const double offset =
        flags.users == 1
            ? 0.0
            : flags.gain_spread_db *
                  (0.5 - static_cast<double>(i) / (flags.users - 1));
    spec.scenario.links.push_back(
        {db_to_linear(flags.center_gain_db + offset), 0.0});
  }
  spec.rate_grid = flags.rates;
  spec.load_factor = flags.load_factor;
  spec.solver = global.solver();

  std::vector<std::string> labels;
  for (const std::string& name : flags.presets) {
    const BsPreset* preset = find_preset(name);
    if (preset == nullptr) {
      throw CLI::ValidationError("--presets", "unknown preset \"" + name +
                                                  "\" (macro|micro|pico|femto)");
    }
    spec.eta_grid.push_back(preset->eta_ld);
    labels.push_back(name);
  }

  SweepResult table = run_model_comparison(
      spec, flags.serial ? ExecPolicy::kSerial : ExecPolicy::kParallel);
  table.label_column = "preset";
  table.row_labels.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    table.row_labels.push_back(labels[r / spec.rate_grid.size()]);
  }
  emit_table(table, global.format_or("csv"), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Energy-optimal downlink transmit power and duration "
               "allocation for a multi-user cell"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--format", global.format,
                 "Output format: text|json for solve, csv|json for sweeps")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--tolerance", global.tolerance,
                 "Solver constraint tolerance (default 1e-9; the inner "
                 "bisection runs a decade finer)");
  app.add_option("--max-iterations", global.max_iterations,
                 "Iteration cap per bisection (default 200)");

  std::string scenario_path;
  CLI::App* solve =
      app.add_subcommand("solve", "Solve one scenario file and report the "
                                  "optimal allocation");
  solve->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();

  SweepFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Two-link channel-gain-gap sweep; emits one row per gap");
  sweep->footer(
      "CSV columns: dgain_db (gap between the fixed link 2 and the degraded "
      "link 1),\n  mu_1, mu_2 (time shares), ptx_1_w, ptx_2_w, ptx_1_dbm, "
      "ptx_2_dbm (transmit\n  powers), dp_db (ptx_1_dbm - ptx_2_dbm), psys_w "
      "(time-weighted transmit power),\n  status (ok | overloaded; flagged "
      "rows leave the value fields empty).\n  Values carry 9 significant "
      "digits.");
  sweep->add_option("--fixed-gain-db", sweep_flags.fixed_gain_db,
                    "Gain of the fixed link (link 2)")
      ->capture_default_str();
  sweep->add_option("--range-db", sweep_flags.range_db,
                    "Inclusive gap range lo:hi in dB; link 1 is degraded "
                    "below link 2 by the gap")
      ->capture_default_str();
  sweep->add_option("--step-db", sweep_flags.step_db, "Grid step in dB")
      ->capture_default_str();
  sweep->add_option("--rate-bps", sweep_flags.rate_bps,
                    "Common target rate of both links")
      ->capture_default_str();
  sweep->add_option("--bandwidth-hz", sweep_flags.bandwidth_hz, "Bandwidth")
      ->capture_default_str();
  sweep->add_option("--noise-dbm", sweep_flags.noise_dbm, "Noise power")
      ->capture_default_str();
  sweep->add_option("--p-max-dbm", sweep_flags.p_max_dbm,
                    "Per-link transmit cap (absent = uncapped)");
  sweep->add_flag("--serial", sweep_flags.serial,
                  "Use the serial reference runner");

  CompareFlags compare_flags;
  CLI::App* compare = app.add_subcommand(
      "compare-models",
      "Supply-power savings of optimal allocation vs the equal-time "
      "baseline across base-station power models");
  compare->footer(
      "CSV columns: preset, eta_ld (load-dependence fraction), rate_bps "
      "(per-user\n  target), p0_w (idle power from the eta inversion), "
      "psys_opt_w, psys_base_w\n  (transmit objectives), psupply_opt_w, "
      "psupply_base_w (supply powers), savings\n  ((base - opt) / base), "
      "status (ok | overloaded | baseline_overloaded).\n  Rows are "
      "preset-major in the order given, rates in the order given.");
  compare->add_option("--presets", compare_flags.presets,
                      "Comma-separated presets (macro,micro,pico,femto)")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--rates", compare_flags.rates,
                      "Comma-separated per-user target rates in bit/s")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--users", compare_flags.users, "Number of users")
      ->capture_default_str();
  compare->add_option("--bandwidth-hz", compare_flags.bandwidth_hz, "Bandwidth")
      ->capture_default_str();
  compare->add_option("--noise-dbm", compare_flags.noise_dbm, "Noise power")
      ->capture_default_str();
  compare->add_option("--p-max-dbm", compare_flags.p_max_dbm,
                      "Transmit cap used for the allocation and the eta -> "
                      "P0 inversion")
      ->capture_default_str();
  compare->add_option("--center-gain-db", compare_flags.center_gain_db,
                      "Mean channel gain of the user population")
      ->capture_default_str();
  compare->add_option("--gain-spread-db", compare_flags.gain_spread_db,
                      "Total gain spread between best and worst user")
      ->capture_default_str();
  compare->add_option("--load-factor", compare_flags.load_factor,
                      "Supply-power slope l")
      ->capture_default_str();
  compare->add_flag("--serial", compare_flags.serial,
                    "Use the serial reference runner");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (solve->parsed()) {
      return cmd_solve(scenario_path, global, out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_flags, global, out);
    }
    if (compare->parsed()) {
      return cmd_compare_models(compare_flags, global, out);
    }
    err << "error: no command selected\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OverloadedError& e) {
    err << "error: " << e.what()
        << " (sum mu_min = " << detail::format_double(e.sum_mu_min()) << ")\n";
    return kExitOverloaded;
  } catch (const NoConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const InvalidConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace powalloc
