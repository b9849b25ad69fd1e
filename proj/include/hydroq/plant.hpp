#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hydroq/error.hpp"
#include "hydroq/renewables.hpp"
#include "hydroq/scenario.hpp"

namespace hydroq {

// ---------------------------------------------------------------------------
// Unit state machine
//
//   Off <-> Standby <-> On
//
// Off and On are never adjacent: a unit passes through Standby in both
// directions.

enum class Mode : std::uint8_t { Off, Standby, On };
enum class Event : std::uint8_t { None, StartUp, ShutDown, StandbyUp, StandbyDown };

inline constexpr std::string_view to_string(Mode m) noexcept {
  switch (m) {
  case Mode::Off: return "Off";
  case Mode::Standby: return "Standby";
  case Mode::On: return "On";
  }
  return "?";
}

inline constexpr std::string_view to_string(Event e) noexcept {
  switch (e) {
  case Event::None: return "None";
  case Event::StartUp: return "StartUp";
  case Event::ShutDown: return "ShutDown";
  case Event::StandbyUp: return "StandbyUp";
  case Event::StandbyDown: return "StandbyDown";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "Off") return Mode::Off;
  if (s == "Standby") return Mode::Standby;
  if (s == "On") return Mode::On;
  throw ParseError("unknown unit mode '" + std::string(s) + "'");
}

/// Hours spent in the current regime. `on_age` counts consecutive On hours;
/// `off_age` counts hours not On since the last shutdown.
struct UnitAges {
  int on_age = 0;
  int off_age = 0;
  bool operator==(const UnitAges&) const = default;
};

/// Age of a unit that has been idle long enough to move freely.
inline constexpr int kSettledAge = 1'000'000;

struct MinDurations {
  int on = 1;
  int off = 1;
};

inline MinDurations fc_durations(const DeviceParams& d) { return {d.t_on_min_fc, d.t_off_min_fc}; }
inline MinDurations el_durations(const DeviceParams& d) { return {d.t_on_min_el, d.t_off_min_el}; }

/// The event that moves `from` to `to`. Throws InvalidEdge for On <-> Off.
inline Event edge_between(Mode from, Mode to) {
  if (from == to) return Event::None;
  if (from == Mode::Standby && to == Mode::On) return Event::StartUp;
  if (from == Mode::On && to == Mode::Standby) return Event::ShutDown;
  if (from == Mode::Off && to == Mode::Standby) return Event::StandbyUp;
  if (from == Mode::Standby && to == Mode::Off) return Event::StandbyDown;
  throw InvalidEdge("no direct edge " + std::string(to_string(from)) + " -> " + std::string(to_string(to)));
}

/// Mode reached by applying `e` in mode `m`. Throws InvalidEdge when the event
/// does not leave `m`.
inline Mode apply_event(Mode m, Event e) {
  switch (e) {
  case Event::None: return m;
  case Event::StartUp:
    if (m == Mode::Standby) return Mode::On;
    break;
  case Event::ShutDown:
    if (m == Mode::On) return Mode::Standby;
    break;
  case Event::StandbyUp:
    if (m == Mode::Off) return Mode::Standby;
    break;
  case Event::StandbyDown:
    if (m == Mode::Standby) return Mode::Off;
    break;
  }
  throw InvalidEdge(std::string(to_string(e)) + " is not applicable in mode " + std::string(to_string(m)));
}

struct UnitStep {
  Mode mode;
  UnitAges ages;
  bool operator==(const UnitStep&) const = default;
};

/// Age bookkeeping for one hour boundary, without duration checks.
inline UnitAges advance_ages(Mode before, Event e, UnitAges a) {
  auto bump = [](int v) { return std::min(v + 1, kSettledAge); };
  switch (e) {
  case Event::None:
    if (before == Mode::On) a.on_age = bump(a.on_age);
    else a.off_age = bump(a.off_age);
    break;
  case Event::StartUp: a = {1, 0}; break;
  case Event::ShutDown: a = {0, 1}; break;
  case Event::StandbyUp:
  case Event::StandbyDown: a.off_age = bump(a.off_age); break;
  }
  return a;
}

/// One hourly transition of a unit. Rejects shutdowns before the minimum On
/// time and start-ups before the minimum Off time (IllegalTransition) and
/// events that do not apply to the current mode (InvalidEdge).
inline UnitStep step_unit(Mode m, Event e, UnitAges ages, MinDurations min) {
  const Mode next = apply_event(m, e);
  if (e == Event::ShutDown && ages.on_age < min.on)
    throw IllegalTransition("shutdown after " + std::to_string(ages.on_age) + " h On, minimum is " + std::to_string(min.on));
  if (e == Event::StartUp && ages.off_age < min.off)
    throw IllegalTransition("start-up after " + std::to_string(ages.off_age) + " h Off, minimum is " + std::to_string(min.off));
  return {next, advance_ages(m, e, ages)};
}

// ---------------------------------------------------------------------------
// Storage dynamics

inline constexpr double kBoundTol = 1e-9;
inline constexpr double kBalanceTol = 1e-6;

/// SOC after `dt` hours. Discharge power is measured at the bus, so the cell
/// loses p_dis / eta_dis.
inline double step_battery(double soc, double p_ch, double p_dis, const DeviceParams& d, double dt) {
  if (p_ch < 0 || p_dis < 0) throw PowerLimitExceeded("battery powers must be non-negative");
  if (p_ch > 0 && p_dis > 0) throw SimultaneousChargeDischarge("battery cannot charge and discharge in one interval");
  if (p_ch > d.p_ch_max + kBoundTol) throw PowerLimitExceeded("charge power " + std::to_string(p_ch) + " kW above limit");
  if (p_dis > d.p_dis_max + kBoundTol) throw PowerLimitExceeded("discharge power " + std::to_string(p_dis) + " kW above limit");
  const double next = soc + d.eta_ch * p_ch * dt / d.batt_capacity - p_dis * dt / (d.eta_dis * d.batt_capacity);
  if (next < d.soc_min - kBoundTol || next > d.soc_max + kBoundTol)
    throw SocOutOfBounds("SOC would reach " + std::to_string(next));
  return std::clamp(next, d.soc_min, d.soc_max);
}

/// Shared tank level after `dt` hours of electrolysis and fuel-cell use.
inline double step_hydrogen(double h, double total_el_power, double total_fc_power, const DeviceParams& d, double dt) {
  if (total_el_power < 0 || total_fc_power < 0) throw PowerLimitExceeded("unit powers must be non-negative");
  const double next = h + d.eta_prod * total_el_power * dt - d.eta_cons * total_fc_power * dt;
  if (next < d.h_min - kBoundTol || next > d.h_max + kBoundTol)
    throw HydrogenOutOfBounds("hydrogen would reach " + std::to_string(next) + " kg");
  return std::clamp(next, d.h_min, d.h_max);
}

/// Bus surplus: generation minus demand. The electrolyzer counts as load and
/// `p_bat_net` is discharge minus charge.
constexpr double power_balance_residual(double pv, double wt, double fc, double el, double p_bat_net, double load) noexcept {
  return pv + wt + fc - el + p_bat_net - load;
}

// ---------------------------------------------------------------------------
// Unit costs

namespace detail {
inline double interval_cost(Mode state, Event e, double standby, double hot, double trans) {
  double c = state == Mode::Standby ? standby : 0.0;
  if (e == Event::StandbyUp || e == Event::StandbyDown) c += hot;
  if (e == Event::StartUp || e == Event::ShutDown) c += trans;
  return c;
}
} // namespace detail

inline double fc_interval_cost(Mode state, Event e, const CostParams& c) {
  return detail::interval_cost(state, e, c.c_standby_fc, c.c_hot_fc, c.c_trans_fc);
}
inline double el_interval_cost(Mode state, Event e, const CostParams& c) {
  return detail::interval_cost(state, e, c.c_standby_el, c.c_hot_el, c.c_trans_el);
}

// ---------------------------------------------------------------------------
// Plant state and plans

struct HouseholdState {
  double soc = 0.6;
  Mode fc = Mode::Off, el = Mode::Off;
  UnitAges fc_ages{0, kSettledAge}, el_ages{0, kSettledAge};
  double fc_power = 0, el_power = 0;
  bool operator==(const HouseholdState&) const = default;
};

/// `slot` is the next 15-minute slot to execute. Unit modes are those in
/// effect during the previous slot; at an hour boundary the next hour's
/// commitment has not been applied yet.
struct PlantState {
  std::int64_t slot = 0;
  std::vector<HouseholdState> households;
  double hydrogen = 1.0;
  bool operator==(const PlantState&) const = default;
};

inline PlantState initial_state(const Scenario& sc) {
  PlantState s;
  s.households.assign(static_cast<std::size_t>(sc.n_households), HouseholdState{});
  for (auto& h : s.households) h.soc = sc.device.soc_init;
  s.hydrogen = sc.device.h_init;
  return s;
}

struct UnitCommit {
  Mode fc = Mode::Off, el = Mode::Off;
  Event fc_event = Event::None, el_event = Event::None;
  bool operator==(const UnitCommit&) const = default;
};

/// Hourly unit modes. `hours[h][i]` is household i during absolute hour
/// `first_hour + h`.
struct CommitmentSchedule {
  std::int64_t first_hour = 0;
  std::vector<std::vector<UnitCommit>> hours;

  std::int64_t n_hours() const noexcept { return static_cast<std::int64_t>(hours.size()); }
  bool covers(std::int64_t hour) const noexcept { return hour >= first_hour && hour < first_hour + n_hours(); }
  const UnitCommit& at(std::int64_t hour, int household) const {
    if (!covers(hour)) throw CommitmentGap("no commitment for hour " + std::to_string(hour));
    return hours[static_cast<std::size_t>(hour - first_hour)][static_cast<std::size_t>(household)];
  }
  bool operator==(const CommitmentSchedule&) const = default;
};

struct HouseholdDispatch {
  double fc_power = 0, el_power = 0, p_ch = 0, p_dis = 0;
  double curtailment = 0, unmet = 0;
  bool operator==(const HouseholdDispatch&) const = default;
};

/// Power setpoints per step. A step spans `slots_per_step` 15-minute slots
/// (1 for the short-term stage, 4 for the hourly day-ahead stage).
struct DispatchPlan {
  std::int64_t first_slot = 0;
  int slots_per_step = 1;
  std::vector<std::vector<HouseholdDispatch>> steps;

  double dt_hours() const noexcept { return slots_per_step * 0.25; }
  std::int64_t slot_of(std::size_t k) const noexcept { return first_slot + static_cast<std::int64_t>(k) * slots_per_step; }
  bool operator==(const DispatchPlan&) const = default;
};

struct ExogenousStep {
  double pv = 0, wt = 0;
  std::vector<double> load; // per household
  bool operator==(const ExogenousStep&) const = default;
};

/// Predicted or realized renewables and loads on the same grid as a plan.
/// Every household has identical PV and wind installations.
struct Forecast {
  std::int64_t first_slot = 0;
  int slots_per_step = 1;
  std::vector<ExogenousStep> steps;
  double dt_hours() const noexcept { return slots_per_step * 0.25; }
};

/// Sets curtailment or unmet load so the bus balances exactly.
inline void settle_balance(HouseholdDispatch& d, const ExogenousStep& env, std::size_t household) {
  const double r = power_balance_residual(env.pv, env.wt, d.fc_power, d.el_power, d.p_dis - d.p_ch, env.load[household]);
  d.curtailment = std::max(r, 0.0);
  d.unmet = std::max(-r, 0.0);
}

// ---------------------------------------------------------------------------
// Constraint audit

enum class ConstraintId : std::uint8_t {
  OneHot,
  Transition,
  MinOnDuration,
  MinOffDuration,
  PowerWhenNotOn,
  PowerBounds,
  ChargeDischargeExclusive,
  BatteryPowerLimit,
  SocBounds,
  HydrogenBounds,
  PowerBalance,
  Fluctuation,
  ReplayMismatch,
};

inline constexpr ConstraintId kAllConstraintIds[] = {
    ConstraintId::OneHot,         ConstraintId::Transition,      ConstraintId::MinOnDuration,
    ConstraintId::MinOffDuration, ConstraintId::PowerWhenNotOn,  ConstraintId::PowerBounds,
    ConstraintId::ChargeDischargeExclusive, ConstraintId::BatteryPowerLimit, ConstraintId::SocBounds,
    ConstraintId::HydrogenBounds, ConstraintId::PowerBalance,    ConstraintId::Fluctuation,
    ConstraintId::ReplayMismatch};

inline constexpr std::string_view to_string(ConstraintId c) noexcept {
  switch (c) {
  case ConstraintId::OneHot: return "OneHot";
  case ConstraintId::Transition: return "Transition";
  case ConstraintId::MinOnDuration: return "MinOnDuration";
  case ConstraintId::MinOffDuration: return "MinOffDuration";
  case ConstraintId::PowerWhenNotOn: return "PowerWhenNotOn";
  case ConstraintId::PowerBounds: return "PowerBounds";
  case ConstraintId::ChargeDischargeExclusive: return "ChargeDischargeExclusive";
  case ConstraintId::BatteryPowerLimit: return "BatteryPowerLimit";
  case ConstraintId::SocBounds: return "SocBounds";
  case ConstraintId::HydrogenBounds: return "HydrogenBounds";
  case ConstraintId::PowerBalance: return "PowerBalance";
  case ConstraintId::Fluctuation: return "Fluctuation";
  case ConstraintId::ReplayMismatch: return "ReplayMismatch";
  }
  return "?";
}

inline constexpr int kShared = -1;

struct Violation {
  ConstraintId constraint_id;
  int household = kShared;      // kShared for the community tank
  std::int64_t time_index = 0;  // absolute 15-minute slot
  double magnitude = 0;         // 0 for logical constraints
  bool operator==(const Violation&) const = default;
};

inline void sort_violations(std::vector<Violation>& v) {
  std::stable_sort(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
    return std::tuple(a.time_index, a.household, a.constraint_id) < std::tuple(b.time_index, b.household, b.constraint_id);
  });
}

namespace detail {

struct UnitView {
  Mode HouseholdState::*mode;
  UnitAges HouseholdState::*ages;
  Mode UnitCommit::*commit;
  Event UnitCommit::*event;
  MinDurations min;
};

inline void check_unit_schedule(const CommitmentSchedule& sched, const PlantState& init, int household, const UnitView& u,
                                std::vector<Violation>& out) {
  const HouseholdState& hs = init.households[static_cast<std::size_t>(household)];
  Mode mode = hs.*(u.mode);
  UnitAges ages = hs.*(u.ages);
  const bool mid_hour = init.slot % kSlotsPerHour != 0;
  for (std::int64_t h = 0; h < sched.n_hours(); ++h) {
    const UnitCommit& c = sched.hours[static_cast<std::size_t>(h)][static_cast<std::size_t>(household)];
    const Mode target = c.*(u.commit);
    const std::int64_t slot = (sched.first_hour + h) * kSlotsPerHour;
    if (h == 0 && mid_hour) {
      // The first hour is already under way: no transition may occur.
      if (target != mode) out.push_back({ConstraintId::Transition, household, init.slot, 0});
      mode = target;
      continue;
    }
    const bool direct = (mode == Mode::On && target == Mode::Off) || (mode == Mode::Off && target == Mode::On);
    if (direct) {
      out.push_back({ConstraintId::Transition, household, slot, 0});
      ages = target == Mode::On ? UnitAges{1, 0} : UnitAges{0, 1};
      mode = target;
      continue;
    }
    const Event e = edge_between(mode, target);
    if (c.*(u.event) != e) out.push_back({ConstraintId::Transition, household, slot, 0});
    if (e == Event::ShutDown && ages.on_age < u.min.on) out.push_back({ConstraintId::MinOnDuration, household, slot, 0});
    if (e == Event::StartUp && ages.off_age < u.min.off) out.push_back({ConstraintId::MinOffDuration, household, slot, 0});
    ages = advance_ages(mode, e, ages);
    mode = target;
  }
}

inline UnitView fc_view(const DeviceParams& d) {
  return {&HouseholdState::fc, &HouseholdState::fc_ages, &UnitCommit::fc, &UnitCommit::fc_event, fc_durations(d)};
}
inline UnitView el_view(const DeviceParams& d) {
  return {&HouseholdState::el, &HouseholdState::el_ages, &UnitCommit::el, &UnitCommit::el_event, el_durations(d)};
}

} // namespace detail

/// Logical checks of a schedule starting from `initial`: legal edges,
/// recorded events, minimum On/Off durations.
inline std::vector<Violation> check_schedule(const CommitmentSchedule& sched, const Scenario& sc, const PlantState& initial) {
  if (sched.first_hour != initial.slot / kSlotsPerHour)
    throw WindowMismatch("schedule starts at hour " + std::to_string(sched.first_hour) + ", state is in hour " +
                         std::to_string(initial.slot / kSlotsPerHour));
  for (const auto& row : sched.hours)
    if (row.size() != initial.households.size()) throw WindowMismatch("schedule household count mismatch");
  std::vector<Violation> out;
  for (int i = 0; i < static_cast<int>(initial.households.size()); ++i) {
    detail::check_unit_schedule(sched, initial, i, detail::fc_view(sc.device), out);
    detail::check_unit_schedule(sched, initial, i, detail::el_view(sc.device), out);
  }
  sort_violations(out);
  return out;
}

/// Smallest tank level at `from_slot` that keeps the rest of `sched`
/// runnable: committed fuel cells at P_min and committed electrolyzers at
/// P_max must never draw the tank below h_min.
inline double hydrogen_reserve(const CommitmentSchedule& sched, const Scenario& sc, std::int64_t from_slot) {
  const auto& d = sc.device;
  const std::int64_t end = (sched.first_hour + sched.n_hours()) * kSlotsPerHour;
  double draw = 0, worst = 0;
  for (std::int64_t s = std::max(from_slot, sched.first_hour * kSlotsPerHour); s < end; ++s) {
    for (const auto& c : sched.hours[static_cast<std::size_t>(s / kSlotsPerHour - sched.first_hour)]) {
      if (c.fc == Mode::On) draw += d.eta_cons * d.p_fc_min * 0.25;
      if (c.el == Mode::On) draw -= d.eta_prod * d.p_el_max * 0.25;
    }
    worst = std::max(worst, draw);
  }
  return d.h_min + worst;
}

/// Audits a schedule plus dispatch against every plant constraint. Returns
/// an empty list iff the plan is feasible; otherwise violations are ordered
/// by time, then household (shared first), then constraint.
inline std::vector<Violation> check_feasibility(const CommitmentSchedule& sched, const DispatchPlan& plan, const Scenario& sc,
                                                const PlantState& initial, const Forecast& env) {
  const auto& d = sc.device;
  if (plan.first_slot != initial.slot || env.first_slot != plan.first_slot || env.slots_per_step != plan.slots_per_step ||
      env.steps.size() != plan.steps.size())
    throw WindowMismatch("dispatch, forecast and initial state cover different windows");
  if (!plan.steps.empty()) {
    const std::int64_t last_hour = (plan.slot_of(plan.steps.size() - 1) + plan.slots_per_step - 1) / kSlotsPerHour;
    if (!sched.covers(plan.first_slot / kSlotsPerHour) || !sched.covers(last_hour))
      throw WindowMismatch("schedule does not cover the dispatch window");
  }
  std::vector<Violation> out = check_schedule(sched, sc, initial);

  const std::size_t n = initial.households.size();
  std::vector<double> soc(n);
  for (std::size_t i = 0; i < n; ++i) soc[i] = initial.households[i].soc;
  double h2 = initial.hydrogen;
  const double dt = plan.dt_hours();

  auto unit_power = [&](double p, Mode m, double lo, double hi, int hh, std::int64_t slot) {
    if (p < -kBoundTol) out.push_back({ConstraintId::PowerBounds, hh, slot, -p});
    else if (m != Mode::On && p > kBoundTol) out.push_back({ConstraintId::PowerWhenNotOn, hh, slot, p});
    else if (m == Mode::On && p < lo - kBoundTol) out.push_back({ConstraintId::PowerBounds, hh, slot, lo - p});
    else if (m == Mode::On && p > hi + kBoundTol) out.push_back({ConstraintId::PowerBounds, hh, slot, p - hi});
  };

  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const std::int64_t slot = plan.slot_of(k);
    const auto& step = plan.steps[k];
    const auto& ex = env.steps[k];
    if (step.size() != n || ex.load.size() != n) throw WindowMismatch("household count mismatch at step " + std::to_string(k));
    double fc_total = 0, el_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int hh = static_cast<int>(i);
      const HouseholdDispatch& x = step[i];
      const UnitCommit& c = sched.at(slot / kSlotsPerHour, hh);
      unit_power(x.fc_power, c.fc, d.p_fc_min, d.p_fc_max, hh, slot);
      unit_power(x.el_power, c.el, d.p_el_min, d.p_el_max, hh, slot);
      if (x.p_ch < -kBoundTol || x.p_ch > d.p_ch_max + kBoundTol)
        out.push_back({ConstraintId::BatteryPowerLimit, hh, slot, x.p_ch < 0 ? -x.p_ch : x.p_ch - d.p_ch_max});
      if (x.p_dis < -kBoundTol || x.p_dis > d.p_dis_max + kBoundTol)
        out.push_back({ConstraintId::BatteryPowerLimit, hh, slot, x.p_dis < 0 ? -x.p_dis : x.p_dis - d.p_dis_max});
      if (x.p_ch > kBoundTol && x.p_dis > kBoundTol)
        out.push_back({ConstraintId::ChargeDischargeExclusive, hh, slot, std::min(x.p_ch, x.p_dis)});
      soc[i] += d.eta_ch * x.p_ch * dt / d.batt_capacity - x.p_dis * dt / (d.eta_dis * d.batt_capacity);
      if (soc[i] < d.soc_min - kBoundTol) out.push_back({ConstraintId::SocBounds, hh, slot, d.soc_min - soc[i]});
      if (soc[i] > d.soc_max + kBoundTol) out.push_back({ConstraintId::SocBounds, hh, slot, soc[i] - d.soc_max});
      const double r = power_balance_residual(ex.pv, ex.wt, x.fc_power, x.el_power, x.p_dis - x.p_ch, ex.load[i]) -
                       x.curtailment + x.unmet;
      if (std::abs(r) > kBalanceTol || x.curtailment < -kBoundTol || x.unmet < -kBoundTol)
        out.push_back({ConstraintId::PowerBalance, hh, slot, std::abs(r)});
      fc_total += std::max(x.fc_power, 0.0);
      el_total += std::max(x.el_power, 0.0);
    }
    h2 += d.eta_prod * el_total * dt - d.eta_cons * fc_total * dt;
    if (h2 < d.h_min - kBoundTol) out.push_back({ConstraintId::HydrogenBounds, kShared, slot, d.h_min - h2});
    if (h2 > d.h_max + kBoundTol) out.push_back({ConstraintId::HydrogenBounds, kShared, slot, h2 - d.h_max});
  }
  sort_violations(out);
  return out;
}

// ---------------------------------------------------------------------------
// Objective recomputation
//
// Reference evaluations of the two stage objectives directly from plans.
// Unit costs use the indicator form c_s [Standby] + c_h [Off status changed]
// + c_l [On status changed], which equals fc/el_interval_cost on legal edges.

namespace detail {
inline double unit_cost_indicator(Mode prev, Mode cur, double standby, double hot, double trans) {
  double c = cur == Mode::Standby ? standby : 0.0;
  if ((prev == Mode::Off) != (cur == Mode::Off)) c += hot;
  if ((prev == Mode::On) != (cur == Mode::On)) c += trans;
  return c;
}

/// Storage and balance terms shared by both stages.
inline double storage_terms(const DispatchPlan& plan, const Scenario& sc, const PlantState& init, const Forecast& env) {
  const auto& d = sc.device;
  const auto& w = sc.costs;
  const double dt = plan.dt_hours();
  std::vector<double> soc;
  for (const auto& h : init.households) soc.push_back(h.soc);
  double h2 = init.hydrogen;
  double total = 0;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    double fc = 0, el = 0;
    for (std::size_t i = 0; i < soc.size(); ++i) {
      const auto& x = plan.steps[k][i];
      soc[i] += d.eta_ch * x.p_ch * dt / d.batt_capacity - x.p_dis * dt / (d.eta_dis * d.batt_capacity);
      total += w.w_soc * (soc[i] - d.soc_target) * (soc[i] - d.soc_target);
      const auto& ex = env.steps[k];
      const double r = power_balance_residual(ex.pv, ex.wt, x.fc_power, x.el_power, x.p_dis - x.p_ch, ex.load[i]);
      total += w.w_slack_balance * dt * r * r;
      fc += x.fc_power;
      el += x.el_power;
    }
    h2 += d.eta_prod * el * dt - d.eta_cons * fc * dt;
    total -= w.w_hydrogen * h2 / d.h_max;
  }
  return total;
}
} // namespace detail

/// Day-ahead objective: weighted unit costs, minus normalized stored
/// hydrogen, plus squared SOC deviation from target, plus the squared balance
/// residual weighted by w_slack_balance.
inline double day_ahead_objective(const CommitmentSchedule& sched, const DispatchPlan& plan, const Scenario& sc,
                                  const PlantState& init, const Forecast& env) {
  const auto& c = sc.costs;
  double total = 0;
  for (std::size_t i = 0; i < init.households.size(); ++i) {
    Mode fc = init.households[i].fc, el = init.households[i].el;
    for (const auto& row : sched.hours) {
      total += c.w_cost * detail::unit_cost_indicator(fc, row[i].fc, c.c_standby_fc, c.c_hot_fc, c.c_trans_fc);
      total += c.w_cost * detail::unit_cost_indicator(el, row[i].el, c.c_standby_el, c.c_hot_el, c.c_trans_el);
      fc = row[i].fc;
      el = row[i].el;
    }
  }
  return total + detail::storage_terms(plan, sc, init, env);
}

/// Short-term objective: fluctuation cost on unit power changes (the first
/// step is measured against the live setpoints in `init`) plus the storage
/// and balance terms of the day-ahead objective.
inline double short_term_objective(const DispatchPlan& plan, const Scenario& sc, const PlantState& init, const Forecast& env) {
  double total = 0;
  for (std::size_t i = 0; i < init.households.size(); ++i) {
    double fc = init.households[i].fc_power, el = init.households[i].el_power;
    for (const auto& step : plan.steps) {
      total += sc.costs.w_fluct * (std::abs(step[i].fc_power - fc) + std::abs(step[i].el_power - el));
      fc = step[i].fc_power;
      el = step[i].el_power;
    }
  }
  return total + detail::storage_terms(plan, sc, init, env);
}

// ---------------------------------------------------------------------------
// Simulation step

struct StepOutcome {
  PlantState state;
  std::vector<HouseholdDispatch> applied; // with realized curtailment / unmet
  std::vector<double> residual;           // bus surplus before slack, kW
};

/// Executes one 15-minute slot. At an hour boundary `commit` (one entry per
/// household) is applied first through the unit state machine. Throws on any
/// constraint breach; the returned state is always feasible.
inline StepOutcome advance(const PlantState& state, const Scenario& sc, const std::vector<UnitCommit>* commit,
                           const std::vector<HouseholdDispatch>& dispatch, const ExogenousStep& realized) {
  const auto& d = sc.device;
  const std::size_t n = state.households.size();
  if (dispatch.size() != n || realized.load.size() != n) throw WindowMismatch("household count mismatch in advance");
  StepOutcome out{state, dispatch, std::vector<double>(n, 0.0)};
  PlantState& s = out.state;

  if (s.slot % kSlotsPerHour == 0) {
    if (!commit || commit->size() != n) throw CommitmentGap("missing commitment at hour boundary, slot " + std::to_string(s.slot));
    for (std::size_t i = 0; i < n; ++i) {
      auto& h = s.households[i];
      const auto fc = step_unit(h.fc, edge_between(h.fc, (*commit)[i].fc), h.fc_ages, fc_durations(d));
      const auto el = step_unit(h.el, edge_between(h.el, (*commit)[i].el), h.el_ages, el_durations(d));
      h.fc = fc.mode;
      h.fc_ages = fc.ages;
      h.el = el.mode;
      h.el_ages = el.ages;
    }
  }

  constexpr double dt = 0.25;
  double fc_total = 0, el_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& h = s.households[i];
    auto& x = out.applied[i];
    auto gate = [](double p, Mode m, double lo, double hi, const char* unit) {
      if (p < 0) throw PowerLimitExceeded(std::string(unit) + " power is negative");
      if (m != Mode::On && p > 0) throw PowerWhenNotOn(std::string(unit) + " power requested while not On");
      if (m == Mode::On && (p < lo - kBoundTol || p > hi + kBoundTol))
        throw PowerLimitExceeded(std::string(unit) + " power " + std::to_string(p) + " kW outside limits");
    };
    gate(x.fc_power, h.fc, d.p_fc_min, d.p_fc_max, "fuel cell");
    gate(x.el_power, h.el, d.p_el_min, d.p_el_max, "electrolyzer");
    h.soc = step_battery(h.soc, x.p_ch, x.p_dis, d, dt);
    h.fc_power = x.fc_power;
    h.el_power = x.el_power;
    fc_total += x.fc_power;
    el_total += x.el_power;
    out.residual[i] = power_balance_residual(realized.pv, realized.wt, x.fc_power, x.el_power, x.p_dis - x.p_ch, realized.load[i]);
    x.curtailment = std::max(out.residual[i], 0.0);
    x.unmet = std::max(-out.residual[i], 0.0);
  }
  s.hydrogen = step_hydrogen(s.hydrogen, el_total, fc_total, d, dt);
  ++s.slot;
  return out;
}

/// Realized renewables and loads for one slot, straight from the scenario.
inline ExogenousStep realized_step(const Scenario& sc, std::int64_t slot) {
  const Timestamp t = sc.slot_time(slot);
  ExogenousStep e;
  e.pv = pv_power(sc.pv(), sc.ambient_temp.at(t), sc.insolation.at(t));
  e.wt = wt_power(sc.wt(), sc.wind_speed.at(t));
  e.load.reserve(sc.loads.size());
  for (const auto& l : sc.loads) e.load.push_back(l.at(t));
  return e;
}

} // namespace hydroq
