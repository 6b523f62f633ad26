#include "powalloc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "powalloc/errors.hpp"

namespace powalloc {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Treat sum(mu_min) this close below 1 as overloaded; exact equality is the
// feasible boundary and returns the clamped allocation directly.
constexpr double kOverloadMargin = 1e-12;

// A link whose inner root lands within this relative distance of its
// exponent cap counts as cap-limited.
constexpr double kCapBindTol = 1e-12;

void validate(const SolverOptions& opts) {
  if (!(opts.mu_tolerance > 0.0) || !(opts.lambda_tolerance > 0.0)) {
    throw InvalidConfigError("solver tolerances must be positive");
  }
  if (opts.max_iterations < 1) {
    throw InvalidConfigError("max_iterations must be at least 1");
  }
}

// Kernel of the marginal cost: g(x) = 2^x (1 - x ln 2) - 1 with
// x = R/(W*mu). Strictly decreasing on x >= 0, g(0) = 0, g -> -inf.
// The direct form cancels catastrophically near x = 0, so small arguments
// use the series -u^2/2 - u^3/3 - u^4/8 - u^5/30 - u^6/144 in u = x ln 2,
// and large arguments avoid the inf - inf trap of expm1(u) - u e^u.
double marginal_kernel(double x) {
  const double u = x * kLn2;
  if (u <= 1e-3) {
    return -u * u *
           (0.5 + u * (1.0 / 3.0 + u * (0.125 + u * (1.0 / 30.0 + u / 144.0))));
  }
  if (u >= 690.0) {
    return std::exp2(x) * (1.0 - u) - 1.0;  // -inf beyond ~2^1012; monotone
  }
  return std::expm1(u) - u * std::exp(u);
}

// Unique root of marginal_kernel(x) = target for target < 0. Bisection with
// a geometrically grown bracket; terminates on relative bracket width. The
// bracket schedule is independent of the link, so links with identical
// cost/target pairs produce bit-identical roots.
double invert_marginal_kernel(double target, double rel_tol, int max_iter) {
  double lo = 0.0;
  double hi = 1.0;
  while (marginal_kernel(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 4096.0) {
      break;  // kernel(2048) is already -inf; unreachable in practice
    }
  }
  int iter = 0;
  while ((hi - lo) > rel_tol * hi && iter < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (marginal_kernel(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iter;
  }
  if ((hi - lo) > rel_tol * hi) {
    throw NoConvergenceError(
        "inner bisection hit the iteration cap before reaching tolerance");
  }
  return 0.5 * (lo + hi);
}

struct ActiveLink {
  std::size_t index;   // position in scenario.links
  double rate_norm;    // R / W
  double cost;         // N0 / G
  double x_cap;        // log2(1 + G*p_max/N0); inf when uncapped
  double mu_min;       // rate_norm / x_cap; 0 when uncapped
};

std::vector<ActiveLink> collect_active(const Scenario& scenario, double n0) {
  const double bw = scenario.noise.bandwidth_hz;
  std::vector<ActiveLink> active;
  active.reserve(scenario.links.size());
  for (std::size_t i = 0; i < scenario.links.size(); ++i) {
    const LinkSpec& link = scenario.links[i];
    if (link.target_rate_bps <= 0.0) {
      continue;
    }
    ActiveLink a;
    a.index = i;
    a.rate_norm = link.target_rate_bps / bw;
    a.cost = n0 / link.gain_linear;
    if (scenario.has_power_cap()) {
      // Same expression as min_time_fraction so the overload screen and the
      // solver agree to the last bit.
      a.x_cap = std::log1p(link.gain_linear * scenario.p_max_w / n0) / kLn2;
      a.mu_min = link.target_rate_bps / (bw * a.x_cap);
    } else {
      a.x_cap = kInf;
      a.mu_min = 0.0;
    }
    active.push_back(a);
  }
  return active;
}

// Inner pass: per-link roots at a given multiplier, cap-clamped. Returns the
// resulting sum of time shares; xs holds the (possibly clamped) exponents.
double eval_sum_mu(double lambda, const std::vector<ActiveLink>& active,
                   double rel_tol, int max_iter, std::vector<double>& xs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const ActiveLink& a = active[i];
    double x = invert_marginal_kernel(-lambda / a.cost, rel_tol, max_iter);
    if (x > a.x_cap) {
      x = a.x_cap;
    }
    xs[i] = x;
    sum += a.rate_norm / x;
  }
  return sum;
}

Allocation finish_allocation(const Scenario& scenario,
                             const std::vector<ActiveLink>& active,
                             const std::vector<double>& xs) {
  Allocation out;
  out.mu.assign(scenario.links.size(), 0.0);
  out.p_tx_w.assign(scenario.links.size(), 0.0);

  // Clamped links keep their exact minimum share; the free ones are scaled
  // so the shares sum to one exactly.
  double capped_mu = 0.0;
  double free_mu = 0.0;
  std::vector<bool> capped(active.size(), false);
  std::vector<double> mu(active.size(), 0.0);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const ActiveLink& a = active[i];
    capped[i] = xs[i] >= a.x_cap * (1.0 - kCapBindTol);
    mu[i] = capped[i] ? a.mu_min : a.rate_norm / xs[i];
    (capped[i] ? capped_mu : free_mu) += mu[i];
  }
  if (free_mu > 0.0) {
    const double scale = (1.0 - capped_mu) / free_mu;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (!capped[i]) {
        mu[i] *= scale;
      }
    }
  }

  for (std::size_t i = 0; i < active.size(); ++i) {
    const ActiveLink& a = active[i];
    const LinkSpec& link = scenario.links[a.index];
    out.mu[a.index] = mu[i];
    out.p_tx_w[a.index] =
        capped[i] ? scenario.p_max_w
                  : required_tx_power(link.target_rate_bps, mu[i],
                                      link.gain_linear, scenario.noise);
  }
  double p_sys = 0.0;
  for (std::size_t i = 0; i < out.mu.size(); ++i) {
    p_sys += out.mu[i] * out.p_tx_w[i];
  }
  out.p_sys_w = p_sys;
  out.converged = true;
  out.kkt_residual = kkt_residual(out, scenario);
  return out;
}

}  // namespace

double marginal_cost(double mu, const LinkSpec& link, const NoiseConfig& cfg) {
  const double n0 = noise_power(cfg);
  if (!(link.gain_linear > 0.0)) {
    throw InvalidConfigError("gain_linear must be positive");
  }
  if (!(mu > 0.0)) {
    throw DegenerateMuError("time share must be positive, got " +
                            std::to_string(mu));
  }
  if (link.target_rate_bps <= 0.0) {
    return 0.0;
  }
  const double x = link.target_rate_bps / (cfg.bandwidth_hz * mu);
  if (x > kMaxRateExponent) {
    throw ExponentOverflowError(
        "rate/(bandwidth*mu) = " + std::to_string(x) +
        " exceeds the exponent guard " + std::to_string(kMaxRateExponent));
  }
  return n0 / link.gain_linear * marginal_kernel(x);
}

std::vector<double> solve_equal_channel(const std::vector<double>& rates_bps) {
  double sum = 0.0;
  for (double rate : rates_bps) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw InvalidConfigError("rates must be non-negative and finite");
    }
    sum += rate;
  }
  if (sum <= 0.0) {
    throw InvalidConfigError("equal-channel closed form needs at least one "
                             "positive rate");
  }
  std::vector<double> mu(rates_bps.size());
  for (std::size_t i = 0; i < rates_bps.size(); ++i) {
    mu[i] = rates_bps[i] / sum;
  }
  return mu;
}

Allocation solve_general(const Scenario& scenario, const SolverOptions& opts) {
  validate(scenario);
  validate(opts);
  const double n0 = noise_power(scenario.noise);
  const std::vector<ActiveLink> active = collect_active(scenario, n0);

  Allocation out;
  out.mu.assign(scenario.links.size(), 0.0);
  out.p_tx_w.assign(scenario.links.size(), 0.0);
  if (active.empty()) {
    out.converged = true;  // nothing to transmit
    return out;
  }

  double sum_mu_min = 0.0;
  for (const ActiveLink& a : active) {
    sum_mu_min += a.mu_min;
  }
  if (sum_mu_min == 1.0) {
    // Feasible boundary: every link pinned at its minimum share and the cap.
    std::vector<double> xs(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      xs[i] = active[i].x_cap;
    }
    return finish_allocation(scenario, active, xs);
  }
  if (sum_mu_min > 1.0 - kOverloadMargin) {
    throw OverloadedError("overloaded: sum of minimum time shares " +
                              std::to_string(sum_mu_min) + " exceeds 1",
                          sum_mu_min);
  }

  if (active.size() == 1) {
    std::vector<double> xs{active[0].rate_norm};  // mu = 1
    return finish_allocation(scenario, active, xs);
  }

  // The inner roots feed the outer residual, so they are resolved finer
  // than the outer tolerance to keep the residual meaningful.
  const double inner_tol =
      std::min(opts.mu_tolerance,
               opts.lambda_tolerance / (8.0 * static_cast<double>(active.size())));

  std::vector<double> xs(active.size());

  // Lower bracket: the flattest marginal at mu = 1 over the links. There the
  // corresponding link's root is exactly 1, so the share total is >= 1.
  double lambda_lo = kInf;
  for (const ActiveLink& a : active) {
    lambda_lo = std::min(lambda_lo, a.cost * -marginal_kernel(a.rate_norm));
  }

  // Upper bracket grown geometrically until the share total drops below 1.
  double lambda_hi = lambda_lo;
  double sum = eval_sum_mu(lambda_hi, active, inner_tol, opts.max_iterations, xs);
  while (sum >= 1.0) {
    lambda_hi *= 4.0;
    if (!std::isfinite(lambda_hi)) {
      throw NoConvergenceError("multiplier bracket growth diverged");
    }
    sum = eval_sum_mu(lambda_hi, active, inner_tol, opts.max_iterations, xs);
  }

  bool converged = false;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    sum = eval_sum_mu(mid, active, inner_tol, opts.max_iterations, xs);
    if (std::abs(sum - 1.0) <= opts.lambda_tolerance) {
      converged = true;
      break;
    }
    if (sum > 1.0) {
      lambda_lo = mid;
    } else {
      lambda_hi = mid;
    }
  }
  if (!converged) {
    throw NoConvergenceError(
        "outer bisection hit the iteration cap; |sum mu - 1| = " +
        std::to_string(std::abs(sum - 1.0)));
  }
  return finish_allocation(scenario, active, xs);
}

SupplySolution solve_supply(const Scenario& scenario, const PowerModel& model,
                            const SolverOptions& opts) {
  validate(model);
  SupplySolution result;
  result.allocation = solve_general(scenario, opts);
  // The affine map leaves the minimizer unchanged; with the shares summing
  // to one the supply power reduces to P0 + l * p_sys.
  result.p_supply_w =
      model.p0_w + model.load_factor * result.allocation.p_sys_w;
  return result;
}

double min_time_fraction(const LinkSpec& link, double p_max_w,
                         const NoiseConfig& cfg) {
  const double n0 = noise_power(cfg);
  if (!(link.gain_linear > 0.0)) {
    throw InvalidConfigError("gain_linear must be positive");
  }
  if (!(p_max_w > 0.0)) {
    throw InvalidConfigError("p_max_w must be positive");
  }
  if (link.target_rate_bps <= 0.0) {
    return 0.0;
  }
  const double x_cap = std::log1p(link.gain_linear * p_max_w / n0) / kLn2;
  return link.target_rate_bps / (cfg.bandwidth_hz * x_cap);
}

OverloadReport is_overloaded(const Scenario& scenario) {
  validate(scenario);
  double sum = 0.0;
  for (const LinkSpec& link : scenario.links) {
    sum += min_time_fraction(link, scenario.p_max_w, scenario.noise);
  }
  OverloadReport report;
  report.sum_mu_min = sum;
  report.slack = 1.0 - sum;
  report.overloaded = sum > 1.0 - kOverloadMargin && sum != 1.0;
  return report;
}

double kkt_residual(const Allocation& alloc, const Scenario& scenario) {
  validate(scenario);
  if (alloc.mu.size() != scenario.links.size() ||
      alloc.p_tx_w.size() != scenario.links.size()) {
    throw InvalidConfigError("allocation does not match the scenario size");
  }
  std::vector<double> costs;
  costs.reserve(alloc.mu.size());
  for (std::size_t i = 0; i < alloc.mu.size(); ++i) {
    const LinkSpec& link = scenario.links[i];
    if (link.target_rate_bps <= 0.0 || alloc.mu[i] <= 0.0) {
      continue;  // idle link
    }
    if (scenario.has_power_cap() &&
        alloc.p_tx_w[i] >= scenario.p_max_w * (1.0 - 1e-9)) {
      continue;  // cap binding; stationarity does not apply
    }
    costs.push_back(marginal_cost(alloc.mu[i], link, scenario.noise));
  }
  if (costs.size() < 2) {
    return 0.0;
  }
  std::vector<double> sorted = costs;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  double spread = 0.0;
  for (double cost : costs) {
    spread = std::max(spread, std::abs(cost - median));
  }
  return spread;
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace {

struct GridSetup {
  std::int64_t steps;                 // K: shares are k/K
  std::vector<ActiveLink> active;     // enumerated links
  std::vector<std::int64_t> k_min;    // per-link minimum grid index
};

GridSetup prepare_grid(const Scenario& scenario, double grid_step) {
  validate(scenario);
  if (!(grid_step > 0.0) || grid_step > 0.1) {
    throw InvalidConfigError("grid_step must lie in (0, 0.1]");
  }
  const double n0 = noise_power(scenario.noise);
  GridSetup setup;
  setup.active = collect_active(scenario, n0);
  if (setup.active.size() > 4) {
    throw DimensionError(
        "brute-force enumeration supports at most 4 active links, got " +
        std::to_string(setup.active.size()));
  }
  setup.steps = std::llround(1.0 / grid_step);
  if (setup.steps < 1) {
    throw InvalidConfigError("grid_step too coarse");
  }
  if (setup.steps > 2'000'000) {
    throw InvalidConfigError("grid_step finer than 5e-7 is not supported");
  }
  setup.k_min.resize(setup.active.size());
  for (std::size_t i = 0; i < setup.active.size(); ++i) {
    const double k_min_real = setup.active[i].mu_min * static_cast<double>(setup.steps);
    std::int64_t k = static_cast<std::int64_t>(std::ceil(k_min_real * (1.0 - 1e-12)));
    setup.k_min[i] = std::max<std::int64_t>(k, 1);
  }
  return setup;
}

// Objective contribution of one link at share k/K. Shared by the serial and
// parallel paths so their arithmetic is identical.
double grid_term(const ActiveLink& link, std::int64_t k, std::int64_t steps) {
  const double mu = static_cast<double>(k) / static_cast<double>(steps);
  const double x = link.rate_norm / mu;
  return mu * link.cost * std::expm1(x * kLn2);
}

struct GridBest {
  double objective = kInf;
  std::array<std::int64_t, 4> comp{};  // grid indices, lexicographic tie-break

  bool improves(double obj, const std::array<std::int64_t, 4>& c,
                std::size_t n) const {
    if (obj < objective) return true;
    if (obj > objective) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if (c[i] != comp[i]) return c[i] < comp[i];
    }
    return false;
  }
};

Allocation allocation_from_grid(const Scenario& scenario,
                                const GridSetup& setup, const GridBest& best) {
  if (!std::isfinite(best.objective)) {
    throw InvalidConfigError(
        "no feasible grid point; the grid is too coarse for the cap");
  }
  Allocation out;
  out.mu.assign(scenario.links.size(), 0.0);
  out.p_tx_w.assign(scenario.links.size(), 0.0);
  double p_sys = 0.0;
  for (std::size_t i = 0; i < setup.active.size(); ++i) {
    const ActiveLink& a = setup.active[i];
    const LinkSpec& link = scenario.links[a.index];
    const double mu =
        static_cast<double>(best.comp[i]) / static_cast<double>(setup.steps);
    out.mu[a.index] = mu;
    out.p_tx_w[a.index] =
        required_tx_power(link.target_rate_bps, mu, link.gain_linear,
                          scenario.noise);
    p_sys += mu * out.p_tx_w[a.index];
  }
  out.p_sys_w = p_sys;
  out.converged = true;
  out.kkt_residual = kkt_residual(out, scenario);
  return out;
}

}  // namespace

Allocation brute_force_oracle_serial(const Scenario& scenario,
                                     double grid_step) {
  const GridSetup setup = prepare_grid(scenario, grid_step);
  const std::size_t n = setup.active.size();
  const std::int64_t steps = setup.steps;

  Allocation out;
  out.mu.assign(scenario.links.size(), 0.0);
  out.p_tx_w.assign(scenario.links.size(), 0.0);
  if (n == 0) {
    out.converged = true;
    return out;
  }

  GridBest best;
  std::array<std::int64_t, 4> comp{};
  // Plain recursive enumeration of the compositions of `steps` into n
  // positive parts, evaluating the objective term by term in link order.
  auto enumerate = [&](auto&& self, std::size_t link, std::int64_t remaining,
                       double partial) -> void {
    if (link + 1 == n) {
      if (remaining < setup.k_min[link]) {
        return;
      }
      comp[link] = remaining;
      const double obj = partial + grid_term(setup.active[link], remaining, steps);
      if (best.improves(obj, comp, n)) {
        best.objective = obj;
        best.comp = comp;
      }
      return;
    }
    std::int64_t tail_min = 0;
    for (std::size_t j = link + 1; j < n; ++j) {
      tail_min += setup.k_min[j];
    }
    for (std::int64_t k = setup.k_min[link]; k <= remaining - tail_min; ++k) {
      comp[link] = k;
      self(self, link + 1, remaining - k,
           partial + grid_term(setup.active[link], k, steps));
    }
  };
  enumerate(enumerate, 0, steps, 0.0);
  return allocation_from_grid(scenario, setup, best);
}

Allocation brute_force_oracle(const Scenario& scenario, double grid_step) {
  const GridSetup setup = prepare_grid(scenario, grid_step);
  const std::size_t n = setup.active.size();
  const std::int64_t steps = setup.steps;

  Allocation out;
  out.mu.assign(scenario.links.size(), 0.0);
  out.p_tx_w.assign(scenario.links.size(), 0.0);
  if (n == 0) {
    out.converged = true;
    return out;
  }

  // Per-link objective tables: the grid objective is a sum of single-index
  // terms, so each link's contribution is precomputed once per index.
  std::vector<std::vector<double>> table(n);
  for (std::size_t i = 0; i < n; ++i) {
    table[i].assign(static_cast<std::size_t>(steps) + 1, kInf);
    for (std::int64_t k = setup.k_min[i]; k <= steps; ++k) {
      table[i][static_cast<std::size_t>(k)] = grid_term(setup.active[i], k, steps);
    }
  }
  const auto k_min = setup.k_min;

  GridBest best;
  if (n == 1) {
    if (steps >= k_min[0]) {
      best.objective = table[0][static_cast<std::size_t>(steps)];
      best.comp = {steps, 0, 0, 0};
    }
    return allocation_from_grid(scenario, setup, best);
  }

  std::int64_t tail_min = 0;
  for (std::size_t j = 1; j < n; ++j) {
    tail_min += k_min[j];
  }
  const std::int64_t k1_lo = k_min[0];
  const std::int64_t k1_hi = steps - tail_min;

#pragma omp parallel if (k1_hi >= k1_lo)
  {
    GridBest local;
    std::array<std::int64_t, 4> comp{};
#pragma omp for nowait schedule(static)
    for (std::int64_t k1 = k1_lo; k1 <= k1_hi; ++k1) {
      comp[0] = k1;
      const double t1 = table[0][static_cast<std::size_t>(k1)];
      const std::int64_t rem1 = steps - k1;
      if (n == 2) {
        comp[1] = rem1;
        const double obj = t1 + table[1][static_cast<std::size_t>(rem1)];
        if (local.improves(obj, comp, n)) {
          local.objective = obj;
          local.comp = comp;
        }
        continue;
      }
      const std::int64_t tail2 = (n == 3) ? k_min[2] : k_min[2] + k_min[3];
      for (std::int64_t k2 = k_min[1]; k2 <= rem1 - tail2; ++k2) {
        comp[1] = k2;
        const double t2 = t1 + table[1][static_cast<std::size_t>(k2)];
        const std::int64_t rem2 = rem1 - k2;
        if (n == 3) {
          comp[2] = rem2;
          const double obj = t2 + table[2][static_cast<std::size_t>(rem2)];
          if (local.improves(obj, comp, n)) {
            local.objective = obj;
            local.comp = comp;
          }
          continue;
        }
        for (std::int64_t k3 = k_min[2]; k3 <= rem2 - k_min[3]; ++k3) {
          comp[2] = k3;
          comp[3] = rem2 - k3;
          const double obj = t2 + table[2][static_cast<std::size_t>(k3)] +
                             table[3][static_cast<std::size_t>(comp[3])];
          if (local.improves(obj, comp, n)) {
            local.objective = obj;
            local.comp = comp;
          }
        }
      }
    }
#pragma omp critical(powalloc_grid_best)
    {
      if (best.improves(local.objective, local.comp, n)) {
        best.objective = local.objective;
        best.comp = local.comp;
      }
    }
  }
  return allocation_from_grid(scenario, setup, best);
}

}  // namespace powalloc
