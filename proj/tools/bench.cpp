// Timing comparison of the OpenMP grid kernels against their serial
// reference implementations. Results must match bit for bit; only the wall
// time may differ.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "powalloc/allocator.hpp"
#include "powalloc/experiments.hpp"
#include "powalloc/units.hpp"

namespace {

using powalloc::Allocation;
using powalloc::Scenario;
using powalloc::SweepResult;

double seconds_since(std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double>(elapsed).count();
}

template <typename Fn>
double time_call(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return seconds_since(start);
}

void report(const char* name, double serial_s, double parallel_s, bool match) {
  std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n",
              name, serial_s, parallel_s, serial_s / parallel_s,
              match ? "results identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both paths run serially\n");
#endif

  Scenario scenario;
  scenario.noise = powalloc::NoiseConfig::explicit_power(
      1e7, powalloc::dbm_to_watts(-103.0));
  scenario.p_max_w = powalloc::dbm_to_watts(46.0);
  scenario.links = {{powalloc::db_to_linear(-95.0), 8e6},
                    {powalloc::db_to_linear(-100.0), 5e6},
                    {powalloc::db_to_linear(-107.0), 3e6}};

  {
    const double step = 2e-4;
    Allocation serial_result;
    Allocation parallel_result;
    const double ts = time_call([&] {
      serial_result = powalloc::brute_force_oracle_serial(scenario, step);
    });
    const double tp = time_call([&] {
      parallel_result = powalloc::brute_force_oracle(scenario, step);
    });
    const bool match = serial_result.mu == parallel_result.mu &&
                       serial_result.p_sys_w == parallel_result.p_sys_w;
    report("oracle 3 links @ 2e-4", ts, tp, match);
  }

  {
    powalloc::GainSweepSpec spec;
    spec.step_db = 0.01;  // 4001 solver runs
    SweepResult serial_result;
    SweepResult parallel_result;
    const double ts = time_call([&] {
      serial_result = powalloc::run_gain_sweep(spec, powalloc::ExecPolicy::kSerial);
    });
    const double tp = time_call([&] {
      parallel_result =
          powalloc::run_gain_sweep(spec, powalloc::ExecPolicy::kParallel);
    });
    const bool match = powalloc::to_csv(serial_result) ==
                       powalloc::to_csv(parallel_result);
    report("gain sweep 4001 points", ts, tp, match);
  }

  return 0;
}
