#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hydroq/mpc.hpp"

namespace hydroq::fixtures {

inline Forecast constant_forecast(std::int64_t first_slot, int steps, int slots_per_step, double pv, double wt,
                                  std::vector<double> load) {
  Forecast f;
  f.first_slot = first_slot;
  f.slots_per_step = slots_per_step;
  f.steps.assign(static_cast<std::size_t>(steps), ExogenousStep{pv, wt, std::move(load)});
  return f;
}

/// 1 household, 3 hourly steps, 2 power bits, 2 slack bits, no battery
/// decisions; 24 free variables.
inline Scenario tiny_scenario() {
  Scenario sc = default_scenario(1, 7, 1);
  sc.day_ahead_horizon = 3;
  sc.power_bits = 2;
  sc.slack_bits = 2;
  sc.battery_bits = 0;
  return sc;
}

inline ConstrainedModel tiny_day_ahead(const Scenario& sc, double pv = 0.0, double wt = 0.3, double load = 0.8) {
  return build_day_ahead(sc, constant_forecast(0, sc.day_ahead_horizon, kSlotsPerHour, pv, wt, {load}), initial_state(sc));
}

/// Exhaustive minimum over assignments accepted by `ok`, by direct QUBO
/// evaluation (no Gray code, no pruning).
template <class Ok>
double naive_minimum(const QuboModel& q, Ok ok, std::vector<std::uint8_t>* arg = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> x(static_cast<std::size_t>(q.n));
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << q.n); ++a) {
    for (int i = 0; i < q.n; ++i) x[static_cast<std::size_t>(i)] = (a >> i) & 1u;
    if (!ok(x)) continue;
    const double e = energy(q, x);
    if (e < best) {
      best = e;
      if (arg) *arg = x;
    }
  }
  return best;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hydroq_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

} // namespace hydroq::fixtures
