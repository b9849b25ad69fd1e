#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hydroq/error.hpp"
#include "hydroq/plant.hpp"
#include "hydroq/rng.hpp"
#include "hydroq/scenario.hpp"
#include "hydroq/solvers.hpp"
#include "hydroq/stage_models.hpp"

namespace hydroq {

// ---------------------------------------------------------------------------
// Forecasts

namespace detail {

/// Realized step for `slot`, repeating the last covered slot past the end of
/// the series.
inline ExogenousStep realized_or_last(const Scenario& sc, std::int64_t slot) {
  return realized_step(sc, std::min(slot, covered_slots(sc) - 1));
}

inline void perturb(ExogenousStep& e, double sigma, Rng& rng) {
  auto f = [&](double v) { return std::max(0.0, v * (1.0 + sigma * rng.normal())); };
  e.pv = f(e.pv);
  e.wt = f(e.wt);
  for (auto& l : e.load) l = f(l);
}

} // namespace detail

/// Forecast of `steps` steps of `slots_per_step` slots starting at `first_slot`:
/// slot averages of the realized series, optionally perturbed by
/// multiplicative Gaussian noise seeded from (scenario seed, slot, stage).
inline Forecast make_forecast(const Scenario& sc, std::int64_t first_slot, int steps, int slots_per_step) {
  Forecast f;
  f.first_slot = first_slot;
  f.slots_per_step = slots_per_step;
  for (int k = 0; k < steps; ++k) {
    ExogenousStep avg;
    avg.load.assign(static_cast<std::size_t>(sc.n_households), 0.0);
    for (int s = 0; s < slots_per_step; ++s) {
      const auto e = detail::realized_or_last(sc, first_slot + static_cast<std::int64_t>(k) * slots_per_step + s);
      avg.pv += e.pv / slots_per_step;
      avg.wt += e.wt / slots_per_step;
      for (std::size_t i = 0; i < avg.load.size(); ++i) avg.load[i] += e.load[i] / slots_per_step;
    }
    if (sc.forecast_noise > 0) {
      Rng rng(derive_seed(derive_seed(sc.rng_seed, static_cast<std::uint64_t>(first_slot)),
                          static_cast<std::uint64_t>(k * 8 + slots_per_step)));
      detail::perturb(avg, sc.forecast_noise, rng);
    }
    f.steps.push_back(std::move(avg));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Stage runs

struct StageRecord {
  Stage stage = Stage::DayAhead;
  std::int64_t slot = 0;
  std::size_t n_variables = 0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  int rounds = 0;
  double wall_time = 0; // seconds
  bool fallback = false;
  std::string note;
};

struct DayAheadResult {
  CommitmentSchedule schedule;
  StageRecord record;
};

struct ShortTermResult {
  DispatchPlan plan;
  StageRecord record;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Recomputes transition events of a schedule from `initial`'s modes.
inline void retime_events(CommitmentSchedule& s, const PlantState& initial) {
  for (std::size_t i = 0; i < initial.households.size(); ++i) {
    Mode fc = initial.households[i].fc, el = initial.households[i].el;
    for (auto& row : s.hours) {
      auto edge = [](Mode a, Mode b) {
        try {
          return edge_between(a, b);
        } catch (const InvalidEdge&) {
          return Event::None;
        }
      };
      row[i].fc_event = edge(fc, row[i].fc);
      row[i].el_event = edge(el, row[i].el);
      fc = row[i].fc;
      el = row[i].el;
    }
  }
}

inline CommitmentSchedule hold_schedule(const PlantState& state, int hours) {
  CommitmentSchedule s;
  s.first_hour = state.slot / kSlotsPerHour;
  std::vector<UnitCommit> row;
  for (const auto& h : state.households) row.push_back({h.fc, h.el, Event::None, Event::None});
  s.hours.assign(static_cast<std::size_t>(hours), row);
  return s;
}

/// Holds every unit except running fuel cells, which drop to Standby as soon
/// as their minimum On time allows.
inline CommitmentSchedule wind_down_schedule(const Scenario& sc, const PlantState& state, int hours) {
  CommitmentSchedule s = hold_schedule(state, hours);
  for (std::size_t i = 0; i < state.households.size(); ++i) {
    const auto& h = state.households[i];
    if (h.fc != Mode::On) continue;
    const int keep = std::max(0, sc.device.t_on_min_fc - h.fc_ages.on_age);
    for (int k = keep; k < hours; ++k) s.hours[static_cast<std::size_t>(k)][i].fc = Mode::Standby;
  }
  retime_events(s, state);
  return s;
}

} // namespace detail

/// Solves the day-ahead commitment model. On solver failure the previous
/// schedule shifted by one day is used if it is legal from `state` and the
/// tank can carry it, else every unit holds its current mode, else running
/// fuel cells wind down; the record is flagged.
inline DayAheadResult run_day_ahead_stage(const Scenario& sc, const Forecast& forecast, const PlantState& state, const SolverConfig& cfg,
                                          const CommitmentSchedule* previous = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  DayAheadResult out;
  out.record.stage = Stage::DayAhead;
  out.record.slot = state.slot;
  try {
    const ConstrainedModel m = build_day_ahead(sc, forecast, state);
    out.record.n_variables = m.size();
    const SolveResult r = solve(m, cfg, plant_validator(m, sc));
    out.schedule = decode_day_ahead(r.assignment, m);
    out.record.energy = r.samples.best().energy;
    out.record.rounds = r.rounds;
    if (!check_schedule(out.schedule, sc, state).empty()) throw NoFeasibleSample("decoded schedule failed audit", r.assignment, {}, r.rounds);
  } catch (const Error& e) {
    out.record.fallback = true;
    out.record.note = e.what();
    auto viable = [&](const CommitmentSchedule& s) { return hydrogen_reserve(s, sc, state.slot) <= state.hydrogen + kBoundTol; };
    bool shifted = false;
    if (previous && !previous->hours.empty()) {
      CommitmentSchedule s = *previous;
      s.first_hour += 24;
      s.hours.resize(static_cast<std::size_t>(sc.day_ahead_horizon), s.hours.back());
      detail::retime_events(s, state);
      if (check_schedule(s, sc, state).empty() && viable(s)) {
        out.schedule = std::move(s);
        shifted = true;
      }
    }
    if (shifted) {
      out.record.note += " [previous schedule shifted]";
    } else if (auto hold = detail::hold_schedule(state, sc.day_ahead_horizon); viable(hold)) {
      out.schedule = std::move(hold);
      out.record.note += " [holding current modes]";
    } else {
      out.schedule = detail::wind_down_schedule(sc, state, sc.day_ahead_horizon);
      out.record.note += " [winding down fuel cells]";
    }
  }
  out.record.wall_time = detail::seconds_since(t0);
  return out;
}

/// Battery-first rule: committed units at their minimum power, the battery
/// absorbs or covers the remaining imbalance within its SOC headroom.
/// Committed electrolyzers run harder when the tank would otherwise fall
/// below the reserve the rest of the schedule needs.
inline DispatchPlan rule_based_dispatch(const Scenario& sc, const CommitmentSchedule& commitments, const Forecast& forecast,
                                        const PlantState& state) {
  const auto& d = sc.device;
  const double dt = forecast.dt_hours();
  constexpr double margin = 1.0 - 1e-9;
  DispatchPlan p;
  p.first_slot = forecast.first_slot;
  p.slots_per_step = forecast.slots_per_step;
  std::vector<double> soc;
  for (const auto& h : state.households) soc.push_back(h.soc);
  double h2 = state.hydrogen;
  for (std::size_t k = 0; k < forecast.steps.size(); ++k) {
    const auto& ex = forecast.steps[k];
    std::vector<HouseholdDispatch> row(soc.size());
    double net = 0;
    for (std::size_t i = 0; i < soc.size(); ++i) {
      const auto& c = commitments.at(p.slot_of(k) / kSlotsPerHour, static_cast<int>(i));
      row[i].fc_power = c.fc == Mode::On ? d.p_fc_min : 0.0;
      row[i].el_power = c.el == Mode::On ? d.p_el_min : 0.0;
      net += (d.eta_prod * row[i].el_power - d.eta_cons * row[i].fc_power) * dt;
    }
    const std::int64_t next = p.slot_of(k) + p.slots_per_step;
    double deficit = hydrogen_reserve(commitments, sc, next) - (h2 + net);
    for (auto& x : row) {
      if (deficit <= 0 || x.el_power == 0.0) continue;
      const double extra = std::min(d.p_el_max - x.el_power, deficit / (d.eta_prod * dt));
      x.el_power += extra;
      net += d.eta_prod * extra * dt;
      deficit -= d.eta_prod * extra * dt;
    }
    h2 += net;
    for (std::size_t i = 0; i < soc.size(); ++i) {
      auto& x = row[i];
      const double r = power_balance_residual(ex.pv, ex.wt, x.fc_power, x.el_power, 0.0, ex.load[i]);
      if (r > 0) {
        const double headroom = (d.soc_max - soc[i]) * d.batt_capacity / (d.eta_ch * dt);
        x.p_ch = std::max(0.0, std::min({r, d.p_ch_max, headroom * margin}));
      } else if (r < 0) {
        const double avail = (soc[i] - d.soc_min) * d.batt_capacity * d.eta_dis / dt;
        x.p_dis = std::max(0.0, std::min({-r, d.p_dis_max, avail * margin}));
      }
      soc[i] += d.eta_ch * x.p_ch * dt / d.batt_capacity - x.p_dis * dt / (d.eta_dis * d.batt_capacity);
      settle_balance(x, ex, i);
    }
    p.steps.push_back(std::move(row));
  }
  return p;
}

/// Commitments covering `hours` from `first_hour`, extending the last known
/// hour's modes past the end of `s`.
inline CommitmentSchedule pad_schedule(const CommitmentSchedule& s, std::int64_t last_hour) {
  CommitmentSchedule out = s;
  while (out.first_hour + out.n_hours() <= last_hour) {
    auto row = out.hours.back();
    for (auto& c : row) c.fc_event = c.el_event = Event::None;
    out.hours.push_back(std::move(row));
  }
  return out;
}

/// Solves the short-term dispatch model; only step 0 of the plan is binding.
/// Falls back to rule_based_dispatch on solver failure (flagged).
inline ShortTermResult run_short_term_stage(const Scenario& sc, const CommitmentSchedule& commitments, const Forecast& forecast,
                                            const PlantState& state, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ShortTermResult out;
  out.record.stage = Stage::ShortTerm;
  out.record.slot = state.slot;
  const CommitmentSchedule window = pad_schedule(commitments, (state.slot + sc.short_term_horizon - 1) / kSlotsPerHour);
  try {
    const ConstrainedModel m = build_short_term(sc, window, forecast, state);
    out.record.n_variables = m.size();
    const SolveResult r = solve(m, cfg, plant_validator(m, sc));
    out.plan = decode_short_term(r.assignment, m);
    out.record.energy = r.samples.best().energy;
    out.record.rounds = r.rounds;
  } catch (const CommitmentGap&) {
    throw;
  } catch (const Error& e) {
    out.record.fallback = true;
    out.record.note = std::string(e.what()) + " [rule-based dispatch]";
    out.plan = rule_based_dispatch(sc, window, forecast, state);
  }
  out.record.wall_time = detail::seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Closed loop

struct StepRecord {
  std::int64_t slot = 0;
  ExogenousStep realized;
  std::vector<HouseholdDispatch> applied;
  std::vector<double> residual; // bus surplus before curtailment / unmet, kW
  PlantState after;
};

struct TrajectorySummary {
  int days = 0;
  std::int64_t steps = 0;
  double unit_cost = 0; // weighted standby / hot-start / transition costs
  double unmet_kwh = 0, curtailed_kwh = 0;
  double soc_min = 0, soc_max = 0, hydrogen_min = 0, hydrogen_max = 0;
  double hydrogen_final = 0;
  int day_ahead_runs = 0, day_ahead_fallbacks = 0;
  int short_term_runs = 0, short_term_fallbacks = 0;
  double day_ahead_time_mean = 0, day_ahead_time_max = 0;
  double short_term_time_mean = 0, short_term_time_max = 0;
};

struct TrajectoryLog {
  PlantState initial;
  std::vector<StepRecord> steps;
  std::vector<CommitmentSchedule> schedules; // one per day
  std::vector<StageRecord> day_ahead, short_term;

  TrajectorySummary summary(const Scenario& sc) const {
    TrajectorySummary s;
    s.days = static_cast<int>(schedules.size());
    s.steps = static_cast<std::int64_t>(steps.size());
    s.soc_min = s.hydrogen_min = std::numeric_limits<double>::infinity();
    s.soc_max = s.hydrogen_max = -std::numeric_limits<double>::infinity();
    const auto& c = sc.costs;
    PlantState prev = initial;
    for (const auto& st : steps) {
      for (std::size_t i = 0; i < st.applied.size(); ++i) {
        s.unmet_kwh += st.applied[i].unmet * 0.25;
        s.curtailed_kwh += st.applied[i].curtailment * 0.25;
        s.soc_min = std::min(s.soc_min, st.after.households[i].soc);
        s.soc_max = std::max(s.soc_max, st.after.households[i].soc);
        if (st.slot % kSlotsPerHour == 0) {
          const auto& a = prev.households[i];
          const auto& b = st.after.households[i];
          s.unit_cost += c.w_cost * detail::unit_cost_indicator(a.fc, b.fc, c.c_standby_fc, c.c_hot_fc, c.c_trans_fc);
          s.unit_cost += c.w_cost * detail::unit_cost_indicator(a.el, b.el, c.c_standby_el, c.c_hot_el, c.c_trans_el);
        }
      }
      s.hydrogen_min = std::min(s.hydrogen_min, st.after.hydrogen);
      s.hydrogen_max = std::max(s.hydrogen_max, st.after.hydrogen);
      s.hydrogen_final = st.after.hydrogen;
      prev = st.after;
    }
    auto stats = [](const std::vector<StageRecord>& v, int& runs, int& fb, double& mean, double& mx) {
      runs = static_cast<int>(v.size());
      for (const auto& r : v) {
        fb += r.fallback;
        mean += r.wall_time;
        mx = std::max(mx, r.wall_time);
      }
      if (runs) mean /= runs;
    };
    stats(day_ahead, s.day_ahead_runs, s.day_ahead_fallbacks, s.day_ahead_time_mean, s.day_ahead_time_max);
    stats(short_term, s.short_term_runs, s.short_term_fallbacks, s.short_term_time_mean, s.short_term_time_max);
    return s;
  }
};

/// Receding-horizon simulation: a day-ahead solve at the start of each day,
/// a short-term solve every slot, and the binding first step applied with
/// realized renewables and loads.
inline TrajectoryLog run_closed_loop(const Scenario& sc, int days, const SolverConfig& cfg) {
  validate(sc);
  if (days < 1) throw ValidationError("days", "must be >= 1");
  const std::int64_t total = static_cast<std::int64_t>(days) * kSlotsPerDay;
  if (covered_slots(sc) < total)
    throw CoverageError("series cover " + std::to_string(covered_slots(sc)) + " slots, " + std::to_string(days) + " days need " +
                        std::to_string(total));

  TrajectoryLog log;
  log.initial = initial_state(sc);
  PlantState state = log.initial;
  CommitmentSchedule schedule;

  for (std::int64_t slot = 0; slot < total; ++slot) {
    if (slot % kSlotsPerDay == 0) {
      SolverConfig day_cfg = cfg;
      day_cfg.anneal.seed = derive_seed(cfg.anneal.seed, static_cast<std::uint64_t>(slot) * 2);
      const Forecast f = make_forecast(sc, slot, sc.day_ahead_horizon, kSlotsPerHour);
      auto r = run_day_ahead_stage(sc, f, state, day_cfg, log.schedules.empty() ? nullptr : &log.schedules.back());
      schedule = r.schedule;
      log.schedules.push_back(std::move(r.schedule));
      log.day_ahead.push_back(std::move(r.record));
    }
    SolverConfig st_cfg = cfg;
    st_cfg.anneal.seed = derive_seed(cfg.anneal.seed, static_cast<std::uint64_t>(slot) * 2 + 1);
    const Forecast f = make_forecast(sc, slot, sc.short_term_horizon, 1);
    auto r = run_short_term_stage(sc, schedule, f, state, st_cfg);

    const ExogenousStep realized = realized_step(sc, slot);
    std::vector<UnitCommit> commit;
    for (int i = 0; i < sc.n_households; ++i) commit.push_back(schedule.at(slot / kSlotsPerHour, i));
    StepOutcome out;
    try {
      out = advance(state, sc, &commit, r.plan.steps.front(), realized);
    } catch (const Error& e) {
      // The binding step broke a plant limit (possible only after a solver
      // fallback); retry with the rule-based step.
      r.record.fallback = true;
      r.record.note += std::string(" [binding step rejected: ") + e.what() + "]";
      const auto fb = rule_based_dispatch(sc, pad_schedule(schedule, slot / kSlotsPerHour), make_forecast(sc, slot, 1, 1), state);
      out = advance(state, sc, &commit, fb.steps.front(), realized);
    }
    log.short_term.push_back(std::move(r.record));
    log.steps.push_back({slot, realized, out.applied, out.residual, out.state});
    state = std::move(out.state);
  }
  return log;
}

} // namespace hydroq
