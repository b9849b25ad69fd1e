#include <gtest/gtest.h>

#include "hydroq/trajectory_io.hpp"
#include "support.hpp"

using namespace hydroq;

namespace {

Scenario small_scenario() {
  Scenario sc = default_scenario(1, 7, 2);
  sc.power_bits = 1;
  sc.battery_bits = 1;
  sc.slack_bits = 2;
  sc.short_term_horizon = 2;
  return sc;
}

SolverConfig quick_config(std::uint64_t seed = 1) {
  SolverConfig cfg;
  cfg.anneal.n_sweeps = 100;
  cfg.anneal.n_restarts = 20;
  cfg.anneal.seed = seed;
  return cfg;
}

} // namespace

TEST(Forecast, HourlyAveragesOfRealizedSeries) {
  Scenario sc = small_scenario();
  sc.forecast_noise = 0;
  const Forecast f = make_forecast(sc, 0, 2, kSlotsPerHour);
  ASSERT_EQ(f.steps.size(), 2u);
  double load = 0;
  for (int s = 0; s < 4; ++s) load += realized_step(sc, s).load[0] / 4;
  EXPECT_NEAR(f.steps[0].load[0], load, 1e-12);
  EXPECT_EQ(make_forecast(sc, 0, 2, kSlotsPerHour).steps, f.steps);
}

TEST(RuleBased, KeepsBatteryInBounds) {
  const Scenario sc = small_scenario();
  PlantState s = initial_state(sc);
  s.households[0].soc = sc.device.soc_min + 1e-3;
  CommitmentSchedule c;
  c.hours.assign(1, std::vector<UnitCommit>(1));
  const auto f = fixtures::constant_forecast(0, 4, 1, 0, 0, {3.0});
  const auto p = rule_based_dispatch(sc, c, f, s);
  EXPECT_TRUE(check_feasibility(c, p, sc, s, f).empty());
  EXPECT_GT(p.steps[0][0].unmet, 0.0);
}

TEST(RuleBased, RaisesElectrolyzerForReserve) {
  Scenario sc = small_scenario();
  PlantState s = initial_state(sc);
  s.hydrogen = 0.05;
  s.households[0].el = Mode::On;
  s.households[0].el_ages = {kSettledAge, 0};
  CommitmentSchedule c;
  c.hours.assign(3, std::vector<UnitCommit>(1));
  c.hours[0][0].el = Mode::On;
  c.hours[1][0].fc = Mode::Standby;
  c.hours[1][0].fc_event = Event::StandbyUp;
  c.hours[2][0].fc = Mode::On;
  c.hours[2][0].fc_event = Event::StartUp;
  const auto f = fixtures::constant_forecast(0, 4, 1, 0, 3.0, {0.5});
  const auto p = rule_based_dispatch(sc, c, f, s);
  double h = s.hydrogen;
  for (const auto& st : p.steps) h += sc.device.eta_prod * st[0].el_power * 0.25;
  EXPECT_GE(h + 1e-9, hydrogen_reserve(c, sc, 4));
}

TEST(DayAheadStage, AlwaysReturnsLegalSchedule) {
  const Scenario sc = small_scenario();
  SolverConfig cfg = quick_config();
  cfg.max_rounds = 1;
  cfg.penalty.kappa = 1e-6; // penalties too weak to steer the sampler
  cfg.penalty.floor = 0;
  const PlantState s = initial_state(sc);
  const auto r = run_day_ahead_stage(sc, make_forecast(sc, 0, sc.day_ahead_horizon, kSlotsPerHour), s, cfg);
  ASSERT_EQ(r.schedule.n_hours(), sc.day_ahead_horizon);
  EXPECT_TRUE(check_schedule(r.schedule, sc, s).empty());
  if (r.record.fallback) {
    EXPECT_FALSE(r.record.note.empty());
  }
}

TEST(ClosedLoop, OneDayStaysInBoundsAndReplays) {
  const Scenario sc = small_scenario();
  const TrajectoryLog log = run_closed_loop(sc, 1, quick_config());
  ASSERT_EQ(log.steps.size(), static_cast<std::size_t>(kSlotsPerDay));
  EXPECT_EQ(log.day_ahead.size(), 1u);
  EXPECT_EQ(log.short_term.size(), static_cast<std::size_t>(kSlotsPerDay));
  for (const auto& st : log.steps) {
    EXPECT_GE(st.after.households[0].soc, sc.device.soc_min - kBoundTol);
    EXPECT_LE(st.after.households[0].soc, sc.device.soc_max + kBoundTol);
    EXPECT_GE(st.after.hydrogen, sc.device.h_min - kBoundTol);
    EXPECT_LE(st.after.hydrogen, sc.device.h_max + kBoundTol);
  }
  std::istringstream in(trajectory_csv(sc, log));
  const auto rows = read_trajectory_csv(in, sc.n_households);
  EXPECT_TRUE(replay_trajectory(sc, rows).empty());
}

TEST(ClosedLoop, DeterministicForSeed) {
  const Scenario sc = small_scenario();
  SolverConfig a = quick_config(3), b = quick_config(3);
  b.threads = 2;
  EXPECT_EQ(trajectory_csv(sc, run_closed_loop(sc, 1, a)), trajectory_csv(sc, run_closed_loop(sc, 1, b)));
}

TEST(ClosedLoop, CoverageChecked) {
  const Scenario sc = small_scenario();
  EXPECT_THROW(run_closed_loop(sc, 3, quick_config()), CoverageError);
  EXPECT_THROW(run_closed_loop(sc, 0, quick_config()), ValidationError);
}

TEST(Replay, DetectsCorruptedSoc) {
  const Scenario sc = small_scenario();
  const TrajectoryLog log = run_closed_loop(sc, 1, quick_config());
  std::istringstream in(trajectory_csv(sc, log));
  auto rows = read_trajectory_csv(in, sc.n_households);
  rows[10].soc[0] = 1.5;
  const auto v = replay_trajectory(sc, rows);
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.constraint_id == ConstraintId::SocBounds; }));
}
