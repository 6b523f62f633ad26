#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "powalloc/errors.hpp"
#include "powalloc/experiments.hpp"
#include "powalloc/units.hpp"
#include "test_support.hpp"

using namespace powalloc;
using powalloc::testing::close_rel;
using powalloc::testing::table1_noise;

namespace {

ModelComparisonSpec ten_user_spec() {
  ModelComparisonSpec spec;
  spec.scenario.noise = table1_noise();
  spec.scenario.p_max_w = dbm_to_watts(46.0);
  for (int i = 0; i < 10; ++i) {
    spec.scenario.links.push_back({db_to_linear(-91.0 - 2.0 * i), 0.0});
  }
  spec.eta_grid = {0.10, 0.14, 0.30, 0.50};
  spec.rate_grid = {1e6, 3e6, 1e7};
  return spec;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("grid arithmetic") {
  GainSweepSpec single;
  single.sweep_lo_db = 0.0;
  single.sweep_hi_db = 0.0;
  const SweepResult one = run_gain_sweep(single);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.at(0, "dp_db") == 0.0);

  GainSweepSpec spec;  // defaults: 0..40 dB in 1 dB steps
  const SweepResult table = run_gain_sweep(spec);
  CHECK(table.rows.size() == 41);
  CHECK(table.at(40, "dgain_db") == 40.0);
}

TEST_CASE("symmetric grid point") {
  GainSweepSpec spec;
  spec.sweep_hi_db = 0.0;
  const SweepResult table = run_gain_sweep(spec);
  CHECK(std::abs(table.at(0, "mu_1") - 0.5) <= 1e-9);
  CHECK(std::abs(table.at(0, "mu_2") - 0.5) <= 1e-9);
  CHECK(table.at(0, "dp_db") == 0.0);
  CHECK(table.at(0, "ptx_1_w") == table.at(0, "ptx_2_w"));
}

TEST_CASE("joint power increase and time compensation") {
  const SweepResult table = run_gain_sweep(GainSweepSpec{});
  const std::vector<double> p1 = table.column("ptx_1_w");
  const std::vector<double> p2 = table.column("ptx_2_w");
  const std::vector<double> mu1 = table.column("mu_1");
  const std::vector<double> mu2 = table.column("mu_2");
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    // Widening the gap raises the power on both links; the degrading link
    // gains share, the fixed link gives it up.
    CHECK(p1[i] >= p1[i - 1] * (1.0 - 1e-9));
    CHECK(p2[i] >= p2[i - 1] * (1.0 - 1e-9));
    CHECK(mu1[i] >= mu1[i - 1] * (1.0 - 1e-9));
    CHECK(mu2[i] <= mu2[i - 1] * (1.0 + 1e-9));
  }
}

TEST_CASE("capped sweep flags overloaded points and narrows the power gap") {
  GainSweepSpec spec;
  spec.sweep_hi_db = 60.0;
  spec.p_max_w = dbm_to_watts(46.0);
  spec.step_db = 0.5;
  const SweepResult table = run_gain_sweep(spec);

  bool seen_capped = false;
  bool seen_overloaded = false;
  double dp_before_cap = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.row_status[i] == "overloaded") {
      seen_overloaded = true;
      CHECK(std::isnan(table.at(i, "mu_1")));
      continue;
    }
    const double p1 = table.at(i, "ptx_1_w");
    CHECK(p1 <= spec.p_max_w * (1.0 + 1e-9));
    if (p1 >= spec.p_max_w * (1.0 - 1e-9)) {
      seen_capped = true;
      // Once the cap pins the weak link the power gap collapses.
      CHECK(table.at(i, "dp_db") < dp_before_cap);
    } else {
      dp_before_cap = table.at(i, "dp_db");
    }
  }
  CHECK(seen_capped);
  CHECK(seen_overloaded);
  // Overload begins past the 48.6 dB feasibility edge and is terminal.
  CHECK(table.row_status[97] == "ok");        // 48.5 dB
  CHECK(table.row_status[98] == "overloaded");  // 49.0 dB
  CHECK(table.row_status.back() == "overloaded");
}

TEST_CASE("sweep is deterministic and policy-independent") {
  GainSweepSpec spec;
  spec.step_db = 0.25;
  const std::string parallel = to_csv(run_gain_sweep(spec, ExecPolicy::kParallel));
  const std::string serial = to_csv(run_gain_sweep(spec, ExecPolicy::kSerial));
  const std::string again = to_csv(run_gain_sweep(spec, ExecPolicy::kParallel));
  CHECK(parallel == serial);
  CHECK(parallel == again);
}

TEST_CASE("csv shape") {
  GainSweepSpec spec;
  spec.sweep_hi_db = 2.0;
  const std::string csv = to_csv(run_gain_sweep(spec));
  CHECK(csv.substr(0, csv.find('\n')) ==
        "dgain_db,mu_1,mu_2,ptx_1_w,ptx_2_w,ptx_1_dbm,ptx_2_dbm,dp_db,psys_w,"
        "status");
  CHECK(csv.find("0,0.5,0.5,0.0015035617,0.0015035617,") != std::string::npos);
  // Three data rows plus header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("model comparison on the ten-user cell") {
  const SweepResult table = run_model_comparison(ten_user_spec());
  REQUIRE(table.rows.size() == 12);

  // Rows are eta-major; savings grow strictly with eta at every rate and
  // never exceed the transmit-side savings they converge to.
  for (std::size_t rate_idx = 0; rate_idx < 3; ++rate_idx) {
    double previous = -1.0;
    for (std::size_t eta_idx = 0; eta_idx < 4; ++eta_idx) {
      const std::size_t row = eta_idx * 3 + rate_idx;
      REQUIRE(table.row_status[row] == "ok");
      const double savings = table.at(row, "savings");
      CHECK(savings > previous);
      previous = savings;

      const double opt = table.at(row, "psys_opt_w");
      const double base = table.at(row, "psys_base_w");
      CHECK(opt <= base);  // baseline dominance
      CHECK(savings <= (base - opt) / base + 1e-15);
      CHECK(table.at(row, "psupply_opt_w") <= table.at(row, "psupply_base_w"));
    }
  }
}

TEST_CASE("model comparison converges to transmit savings as eta approaches one") {
  ModelComparisonSpec spec = ten_user_spec();
  spec.eta_grid = {1.0 - 1e-9};
  spec.rate_grid = {1e7};
  const SweepResult table = run_model_comparison(spec);
  const double opt = table.at(0, "psys_opt_w");
  const double base = table.at(0, "psys_base_w");
  const double tx_savings = (base - opt) / base;
  CHECK(close_rel(table.at(0, "savings"), tx_savings, 1e-4));
}

TEST_CASE("symmetric cells save nothing") {
  ModelComparisonSpec spec;
  spec.scenario.noise = table1_noise();
  spec.scenario.p_max_w = dbm_to_watts(46.0);
  for (int i = 0; i < 4; ++i) {
    spec.scenario.links.push_back({1e-10, 0.0});
  }
  spec.eta_grid = {0.5};
  spec.rate_grid = {2e6};
  const SweepResult table = run_model_comparison(spec);
  CHECK(std::abs(table.at(0, "savings")) <= 1e-12);
}

TEST_CASE("baseline can be infeasible while the optimum is not") {
  // The weak link needs 0.55 of the frame at this rate, so the equal-time
  // baseline violates the cap while the optimal allocation stays feasible.
  ModelComparisonSpec spec;
  spec.scenario.noise = table1_noise();
  spec.scenario.p_max_w = dbm_to_watts(46.0);
  const double n0 = noise_power(spec.scenario.noise);
  const double gain_weak = (std::exp2(10.0) - 1.0) * n0 / spec.scenario.p_max_w;
  const double gain_strong = (std::exp2(40.0) - 1.0) * n0 / spec.scenario.p_max_w;
  spec.scenario.links = {{gain_weak, 0.0}, {gain_strong, 0.0}};
  spec.eta_grid = {0.5};
  spec.rate_grid = {6e7};
  REQUIRE_FALSE(is_overloaded([&] {
                  Scenario s = spec.scenario;
                  for (auto& link : s.links) link.target_rate_bps = 6e7;
                  return s;
                }()).overloaded);

  const SweepResult table = run_model_comparison(spec);
  CHECK(table.row_status[0] == "baseline_overloaded");
  CHECK_FALSE(std::isnan(table.at(0, "psys_opt_w")));
  CHECK(std::isnan(table.at(0, "savings")));
}

TEST_CASE("comparison runners agree") {
  const ModelComparisonSpec spec = ten_user_spec();
  CHECK(to_csv(run_model_comparison(spec, ExecPolicy::kParallel)) ==
        to_csv(run_model_comparison(spec, ExecPolicy::kSerial)));
}

TEST_CASE("comparison input guards") {
  ModelComparisonSpec spec = ten_user_spec();
  spec.scenario.p_max_w = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(run_model_comparison(spec), InvalidConfigError);

  spec = ten_user_spec();
  spec.eta_grid = {1.5};
  CHECK_THROWS_AS(run_model_comparison(spec), InvalidConfigError);

  spec = ten_user_spec();
  spec.rate_grid.clear();
  CHECK_THROWS_AS(run_model_comparison(spec), InvalidConfigError);
}

TEST_CASE("energy helper") {
  CHECK(energy(0.0, 3600.0) == 0.0);
  CHECK(close_rel(energy(40.31, 3600.0), 145116.0, 1e-12));
  CHECK(energy(7.5, 120.0) == 2.0 * energy(7.5, 60.0));
  CHECK_THROWS_AS(energy(1.0, -1.0), InvalidConfigError);
}

}  // TEST_SUITE
