#pragma once

#include <vector>

#include "powalloc/link_model.hpp"
#include "powalloc/power_model.hpp"

// Minimizes the time-weighted transmit power sum_i mu_i * P_tx_i(mu_i)
// over the simplex sum_i mu_i = 1, mu_i > 0, optionally under a per-link
// transmit-power cap. Links with a zero target rate are excluded from the
// simplex and receive mu = 0, P = 0.
//
// The solver is a dual bisection: the outer loop bisects the Lagrange
// multiplier, the inner loop finds each link's time share from the
// stationarity condition marginal_cost_i(mu_i) = -lambda, whose root is
// unique because the marginal cost is strictly increasing in mu.

namespace powalloc {

struct SolverOptions {
  /// Relative width at which the inner (per-link) bisection stops.
  double mu_tolerance{1e-10};
  /// Absolute residual |sum mu - 1| at which the outer bisection stops.
  double lambda_tolerance{1e-9};
  /// Iteration cap per bisection.
  int max_iterations{200};
};

struct Allocation {
  std::vector<double> mu;      // time shares, one per link (0 for idle links)
  std::vector<double> p_tx_w;  // transmit powers, one per link
  double p_sys_w{0.0};         // sum_i mu_i * p_tx_i
  bool converged{false};
  double kkt_residual{0.0};    // max spread of uncapped marginal costs, W
};

struct SupplySolution {
  Allocation allocation;
  double p_supply_w{0.0};
};

struct OverloadReport {
  bool overloaded{false};
  double slack{0.0};       // 1 - sum of minimum time shares
  double sum_mu_min{0.0};
};

/// Derivative of mu -> mu * required_tx_power(rate, mu) at the given mu:
/// (N0/G) * (2^x * (1 - x ln 2) - 1) with x = R/(W*mu). Non-positive,
/// strictly increasing in mu, approaching 0 as mu grows.
double marginal_cost(double mu, const LinkSpec& link, const NoiseConfig& cfg);

/// Closed-form optimum for equal channel gains: mu_i = R_i / sum_j R_j.
/// Throws InvalidConfigError when all rates are zero.
std::vector<double> solve_equal_channel(const std::vector<double>& rates_bps);

/// General solver. Throws OverloadedError when the rates are infeasible
/// under the cap and NoConvergenceError when an iteration cap is hit.
Allocation solve_general(const Scenario& scenario,
                         const SolverOptions& opts = {});

/// Same optimum as solve_general (the affine supply model does not change
/// the minimizer); additionally reports P0 + l * p_sys_w.
SupplySolution solve_supply(const Scenario& scenario, const PowerModel& model,
                            const SolverOptions& opts = {});

/// Smallest feasible time share under the cap:
/// R / (W * log2(1 + G*p_max/N0)). Zero for a zero rate or an infinite cap.
double min_time_fraction(const LinkSpec& link, double p_max_w,
                         const NoiseConfig& cfg);

/// Overload check: infeasible iff the minimum time shares exceed the frame.
OverloadReport is_overloaded(const Scenario& scenario);

/// Exhaustive minimum over the simplex grid {mu_i = k_i * grid_step}.
/// Test oracle, independent of the dual solver; supports at most 4 links.
/// The default entry point enumerates in parallel (OpenMP); the serial
/// variant is the straightforward reference both must agree with.
Allocation brute_force_oracle(const Scenario& scenario, double grid_step);
Allocation brute_force_oracle_serial(const Scenario& scenario,
                                     double grid_step);

/// Stationarity diagnostic: max |marginal_cost_i - median marginal cost|
/// over active links whose cap is not binding. Zero when fewer than two
/// such links exist.
double kkt_residual(const Allocation& alloc, const Scenario& scenario);

}  // namespace powalloc
