#include <gtest/gtest.h>

#include "hydroq/plant.hpp"
#include "support.hpp"

using namespace hydroq;

TEST(StepUnit, StandbyStartUp) {
  const auto r = step_unit(Mode::Standby, Event::StartUp, {0, 5}, {2, 2});
  EXPECT_EQ(r.mode, Mode::On);
  EXPECT_EQ(r.ages.on_age, 1);
}

TEST(StepUnit, EarlyShutdown) { EXPECT_THROW(step_unit(Mode::On, Event::ShutDown, {1, 0}, {2, 2}), IllegalTransition); }

TEST(StepUnit, EarlyStartUp) { EXPECT_THROW(step_unit(Mode::Standby, Event::StartUp, {0, 1}, {2, 2}), IllegalTransition); }

TEST(StepUnit, LegalEdgeSet) {
  // Only the four Standby edges and the self-loops are legal.
  const Mode modes[] = {Mode::Off, Mode::Standby, Mode::On};
  const Event events[] = {Event::None, Event::StartUp, Event::ShutDown, Event::StandbyUp, Event::StandbyDown};
  int legal = 0;
  for (Mode m : modes)
    for (Event e : events) {
      try {
        step_unit(m, e, {kSettledAge, kSettledAge}, {1, 1});
        ++legal;
      } catch (const InvalidEdge&) {
      }
    }
  EXPECT_EQ(legal, 3 + 4);
  EXPECT_THROW(step_unit(Mode::Off, Event::StartUp, {0, kSettledAge}, {1, 1}), InvalidEdge);
  EXPECT_THROW(edge_between(Mode::Off, Mode::On), InvalidEdge);
  EXPECT_THROW(edge_between(Mode::On, Mode::Off), InvalidEdge);
}

TEST(StepBattery, Examples) {
  const DeviceParams d;
  EXPECT_EQ(step_battery(0.6, 0, 0, d, 1.0), 0.6);
  EXPECT_NEAR(step_battery(0.6, 1, 0, d, 1.0), 0.695, 1e-12);
  EXPECT_THROW(step_battery(0.6, 1, 1, d, 1.0), SimultaneousChargeDischarge);
  EXPECT_THROW(step_battery(0.6, 4, 0, d, 1.0), PowerLimitExceeded);
  EXPECT_THROW(step_battery(0.21, 0, 3, d, 1.0), SocOutOfBounds);
}

TEST(StepHydrogen, Examples) {
  const DeviceParams d;
  EXPECT_EQ(step_hydrogen(1, 0, 0, d, 1.0), 1.0);
  EXPECT_NEAR(step_hydrogen(1, 2, 0, d, 1.0), 1.036, 1e-12);
  EXPECT_THROW(step_hydrogen(d.h_min, 0, 2, d, 1.0), HydrogenOutOfBounds);
}

TEST(PowerBalance, Examples) {
  EXPECT_EQ(power_balance_residual(0, 0, 0, 0, 0, 0), 0.0);
  EXPECT_EQ(power_balance_residual(1, 0, 0.5, 0, -0.5, 1), 0.0);
  EXPECT_EQ(power_balance_residual(0, 0, 2, 2, 0, 0), 0.0);
}

TEST(IntervalCost, Examples) {
  const CostParams c;
  EXPECT_EQ(fc_interval_cost(Mode::On, Event::None, c), 0.0);
  EXPECT_DOUBLE_EQ(fc_interval_cost(Mode::Standby, Event::None, c), 0.05);
  EXPECT_DOUBLE_EQ(fc_interval_cost(Mode::Standby, Event::StartUp, c), 0.15);
  EXPECT_DOUBLE_EQ(el_interval_cost(Mode::Standby, Event::StandbyUp, c), 0.25);
}

namespace {

CommitmentSchedule schedule_of(const std::vector<Mode>& fc, Mode el = Mode::Off) {
  CommitmentSchedule s;
  Mode prev_fc = Mode::Off, prev_el = Mode::Off;
  for (Mode m : fc) {
    s.hours.push_back({{m, el, edge_between(prev_fc, m), edge_between(prev_el, el)}});
    prev_fc = m;
    prev_el = el;
  }
  return s;
}

DispatchPlan zero_plan(int hours, const Forecast& f) {
  DispatchPlan p;
  p.slots_per_step = kSlotsPerHour;
  p.steps.assign(static_cast<std::size_t>(hours), std::vector<HouseholdDispatch>(1));
  for (std::size_t k = 0; k < p.steps.size(); ++k) settle_balance(p.steps[k][0], f.steps[k], 0);
  return p;
}

} // namespace

TEST(CheckFeasibility, IdleSystem) {
  const Scenario sc = default_scenario(1, 7, 1);
  const auto f = fixtures::constant_forecast(0, 4, kSlotsPerHour, 0, 0, {0});
  const auto sched = schedule_of({Mode::Off, Mode::Off, Mode::Off, Mode::Off});
  EXPECT_TRUE(check_feasibility(sched, zero_plan(4, f), sc, initial_state(sc), f).empty());
}

TEST(CheckFeasibility, MinOnDuration) {
  Scenario sc = default_scenario(1, 7, 1);
  PlantState s0 = initial_state(sc);
  s0.households[0].fc = Mode::Standby;
  const auto f = fixtures::constant_forecast(0, 3, kSlotsPerHour, 0, 0, {0});
  CommitmentSchedule sched;
  sched.hours = {{{Mode::On, Mode::Off, Event::StartUp, Event::None}}, {{Mode::Standby, Mode::Off, Event::ShutDown, Event::None}},
                 {{Mode::Standby, Mode::Off, Event::None, Event::None}}};
  DispatchPlan p = zero_plan(3, f);
  p.steps[0][0].fc_power = 0.5;
  settle_balance(p.steps[0][0], f.steps[0], 0);
  const auto v = check_feasibility(sched, p, sc, s0, f);
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.constraint_id == ConstraintId::MinOnDuration; }));
}

TEST(CheckFeasibility, PowerWhenNotOn) {
  const Scenario sc = default_scenario(1, 7, 1);
  const auto f = fixtures::constant_forecast(0, 1, kSlotsPerHour, 0, 0, {1});
  const auto sched = schedule_of({Mode::Standby});
  DispatchPlan p = zero_plan(1, f);
  p.steps[0][0].fc_power = 1.0;
  settle_balance(p.steps[0][0], f.steps[0], 0);
  const auto v = check_feasibility(sched, p, sc, initial_state(sc), f);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint_id, ConstraintId::PowerWhenNotOn);
}

TEST(Advance, AppliesCommitAtHourAndLogsSlack) {
  const Scenario sc = default_scenario(1, 7, 1);
  const PlantState s0 = initial_state(sc);
  const std::vector<UnitCommit> commit{{Mode::Standby, Mode::Off, Event::StandbyUp, Event::None}};
  const ExogenousStep ex{0.5, 0.0, {1.0}};
  const auto out = advance(s0, sc, &commit, {HouseholdDispatch{0, 0, 0, 0.2, 0, 0}}, ex);
  EXPECT_EQ(out.state.slot, 1);
  EXPECT_EQ(out.state.households[0].fc, Mode::Standby);
  EXPECT_NEAR(out.residual[0], -0.3, 1e-12);
  EXPECT_NEAR(out.applied[0].unmet, 0.3, 1e-12);
  EXPECT_EQ(out.applied[0].curtailment, 0.0);
  EXPECT_NEAR(out.state.households[0].soc, 0.6 - 0.2 * 0.25 / (0.95 * 10), 1e-15);
  EXPECT_THROW(advance(s0, sc, nullptr, {HouseholdDispatch{}}, ex), CommitmentGap);
}

TEST(Advance, RejectsPowerOutsideMode) {
  const Scenario sc = default_scenario(1, 7, 1);
  const std::vector<UnitCommit> commit{{Mode::Off, Mode::Off, Event::None, Event::None}};
  EXPECT_THROW(advance(initial_state(sc), sc, &commit, {HouseholdDispatch{1.0, 0, 0, 0, 0, 0}}, {0, 0, {0}}), PowerWhenNotOn);
}

TEST(HydrogenReserve, CountsCommittedFuelCells) {
  const Scenario sc = default_scenario(1, 7, 1);
  const auto s = schedule_of({Mode::Standby, Mode::On, Mode::On});
  const double per_hour = sc.device.eta_cons * sc.device.p_fc_min;
  EXPECT_NEAR(hydrogen_reserve(s, sc, 0), 2 * per_hour, 1e-12);
  EXPECT_NEAR(hydrogen_reserve(s, sc, 10), 0.5 * per_hour, 1e-12);
  EXPECT_EQ(hydrogen_reserve(schedule_of({Mode::Off}), sc, 0), sc.device.h_min);
}
