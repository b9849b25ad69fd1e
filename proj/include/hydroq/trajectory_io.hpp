#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroq/mpc.hpp"

namespace hydroq {

// ---------------------------------------------------------------------------
// Atomic output

/// Writes `content` to `path` through a sibling temp file and a rename, so the
/// destination is either complete or untouched.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("write to " + tmp.string() + " failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(lineno) + ": '" + s + "' is not a number");
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Trajectory CSV: one row per 15-minute slot.
//
//   slot,time,pv,wt,{load,fc_mode,el_mode,fc_power,el_power,p_ch,p_dis,
//   curtailment,unmet,residual,soc}_<i>...,hydrogen

inline constexpr const char* kHouseholdColumns[] = {"load",  "fc_mode",     "el_mode", "fc_power", "el_power", "p_ch",
                                                     "p_dis", "curtailment", "unmet",   "residual", "soc"};
inline constexpr std::size_t kHouseholdColumnCount = std::size(kHouseholdColumns);

inline std::vector<std::string> trajectory_header(int n_households) {
  std::vector<std::string> h{"slot", "time", "pv", "wt"};
  for (int i = 0; i < n_households; ++i)
    for (const char* c : kHouseholdColumns) h.push_back(std::string(c) + "_" + std::to_string(i));
  h.emplace_back("hydrogen");
  return h;
}

inline std::string trajectory_csv(const Scenario& sc, const TrajectoryLog& log) {
  std::string out;
  const auto header = trajectory_header(sc.n_households);
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  using detail::fmt;
  for (const auto& st : log.steps) {
    out += std::to_string(st.slot) + ',' + format_timestamp(sc.slot_time(st.slot)) + ',' + fmt(st.realized.pv) + ',' + fmt(st.realized.wt);
    for (std::size_t i = 0; i < st.applied.size(); ++i) {
      const auto& a = st.applied[i];
      const auto& h = st.after.households[i];
      out += ',' + fmt(st.realized.load[i]) + ',' + std::string(to_string(h.fc)) + ',' + std::string(to_string(h.el));
      for (double v : {a.fc_power, a.el_power, a.p_ch, a.p_dis, a.curtailment, a.unmet, st.residual[i], h.soc}) out += ',' + fmt(v);
    }
    out += ',' + fmt(st.after.hydrogen) + '\n';
  }
  return out;
}

struct TrajectoryRow {
  std::int64_t slot = 0;
  ExogenousStep realized;
  std::vector<Mode> fc_mode, el_mode;
  std::vector<HouseholdDispatch> applied;
  std::vector<double> residual, soc;
  double hydrogen = 0;
};

/// Parses a trajectory CSV for `n_households`. Throws ParseError on an empty
/// file, a header that does not match, or malformed cells.
inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is, int n_households) {
  std::string line;
  if (!std::getline(is, line) || line.empty()) throw ParseError("trajectory file is empty");
  const auto expected = trajectory_header(n_households);
  if (detail::split_csv(line) != expected)
    throw ParseError("trajectory header does not match a " + std::to_string(n_households) + "-household scenario");
  std::vector<TrajectoryRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != expected.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(expected.size()) + " cells, got " +
                       std::to_string(cells.size()));
    auto num = [&](std::size_t k) { return detail::parse_number(cells[k], lineno); };
    TrajectoryRow r;
    r.slot = static_cast<std::int64_t>(num(0));
    r.realized.pv = num(2);
    r.realized.wt = num(3);
    for (int i = 0; i < n_households; ++i) {
      const std::size_t b = 4 + static_cast<std::size_t>(i) * kHouseholdColumnCount;
      r.realized.load.push_back(num(b));
      try {
        r.fc_mode.push_back(parse_mode(cells[b + 1]));
        r.el_mode.push_back(parse_mode(cells[b + 2]));
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
      }
      HouseholdDispatch a;
      a.fc_power = num(b + 3);
      a.el_power = num(b + 4);
      a.p_ch = num(b + 5);
      a.p_dis = num(b + 6);
      a.curtailment = num(b + 7);
      a.unmet = num(b + 8);
      r.applied.push_back(a);
      r.residual.push_back(num(b + 9));
      r.soc.push_back(num(b + 10));
    }
    r.hydrogen = num(cells.size() - 1);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("trajectory file has no rows");
  return rows;
}

// ---------------------------------------------------------------------------
// Replay

inline constexpr double kReplayTol = 1e-9;

/// Re-simulates logged dispatch from the scenario's initial state and reports
/// every breach. The replay continues from the recomputed state, so a single
/// corrupted cell yields violations at its own slot only.
inline std::vector<Violation> replay_trajectory(const Scenario& sc, const std::vector<TrajectoryRow>& rows) {
  const auto& d = sc.device;
  std::vector<Violation> out;
  PlantState s = initial_state(sc);
  constexpr double dt = 0.25;
  for (const auto& r : rows) {
    const std::int64_t slot = r.slot;
    if (slot != s.slot) {
      out.push_back({ConstraintId::ReplayMismatch, kShared, slot, std::abs(static_cast<double>(slot - s.slot))});
      s.slot = slot;
    }
    if (slot < covered_slots(sc)) {
      const ExogenousStep e = realized_step(sc, slot);
      double dev = std::max(std::abs(e.pv - r.realized.pv), std::abs(e.wt - r.realized.wt));
      for (std::size_t i = 0; i < e.load.size(); ++i) dev = std::max(dev, std::abs(e.load[i] - r.realized.load[i]));
      if (dev > kReplayTol) out.push_back({ConstraintId::ReplayMismatch, kShared, slot, dev});
    } else {
      out.push_back({ConstraintId::ReplayMismatch, kShared, slot, 0.0});
    }

    double fc_total = 0, el_total = 0;
    for (std::size_t i = 0; i < s.households.size(); ++i) {
      const int hh = static_cast<int>(i);
      auto& h = s.households[i];
      auto unit = [&](Mode& mode, UnitAges& ages, Mode target, MinDurations min) {
        if (slot % kSlotsPerHour != 0) {
          if (mode != target) out.push_back({ConstraintId::Transition, hh, slot, 0.0});
          mode = target;
          return;
        }
        try {
          const auto next = step_unit(mode, edge_between(mode, target), ages, min);
          ages = next.ages;
        } catch (const InvalidEdge&) {
          out.push_back({ConstraintId::Transition, hh, slot, 0.0});
          ages = {};
        } catch (const IllegalTransition&) {
          const bool shutdown = mode == Mode::On;
          out.push_back({shutdown ? ConstraintId::MinOnDuration : ConstraintId::MinOffDuration, hh, slot, 0.0});
          ages = advance_ages(mode, edge_between(mode, target), ages);
        }
        mode = target;
      };
      unit(h.fc, h.fc_ages, r.fc_mode[i], fc_durations(d));
      unit(h.el, h.el_ages, r.el_mode[i], el_durations(d));

      const auto& a = r.applied[i];
      auto gate = [&](double p, Mode m, double lo, double hi) {
        if (m != Mode::On) {
          if (std::abs(p) > kBoundTol) out.push_back({ConstraintId::PowerWhenNotOn, hh, slot, std::abs(p)});
        } else if (p < lo - kBoundTol || p > hi + kBoundTol) {
          out.push_back({ConstraintId::PowerBounds, hh, slot, p < lo ? lo - p : p - hi});
        }
      };
      gate(a.fc_power, h.fc, d.p_fc_min, d.p_fc_max);
      gate(a.el_power, h.el, d.p_el_min, d.p_el_max);
      if (a.p_ch > kBoundTol && a.p_dis > kBoundTol)
        out.push_back({ConstraintId::ChargeDischargeExclusive, hh, slot, std::min(a.p_ch, a.p_dis)});
      if (a.p_ch < -kBoundTol || a.p_ch > d.p_ch_max + kBoundTol)
        out.push_back({ConstraintId::BatteryPowerLimit, hh, slot, a.p_ch < 0 ? -a.p_ch : a.p_ch - d.p_ch_max});
      if (a.p_dis < -kBoundTol || a.p_dis > d.p_dis_max + kBoundTol)
        out.push_back({ConstraintId::BatteryPowerLimit, hh, slot, a.p_dis < 0 ? -a.p_dis : a.p_dis - d.p_dis_max});

      const double soc = h.soc + d.eta_ch * a.p_ch * dt / d.batt_capacity - a.p_dis * dt / (d.eta_dis * d.batt_capacity);
      for (double v : {soc, r.soc[i]}) {
        if (v < d.soc_min - kBoundTol) out.push_back({ConstraintId::SocBounds, hh, slot, d.soc_min - v});
        else if (v > d.soc_max + kBoundTol) out.push_back({ConstraintId::SocBounds, hh, slot, v - d.soc_max});
        if (r.soc[i] == soc) break;
      }
      if (std::abs(soc - r.soc[i]) > kReplayTol) out.push_back({ConstraintId::ReplayMismatch, hh, slot, std::abs(soc - r.soc[i])});
      h.soc = std::clamp(soc, d.soc_min, d.soc_max);
      h.fc_power = a.fc_power;
      h.el_power = a.el_power;

      const double res = power_balance_residual(r.realized.pv, r.realized.wt, a.fc_power, a.el_power, a.p_dis - a.p_ch, r.realized.load[i]);
      const double unlogged = std::max({std::abs(res - r.residual[i]), std::abs(std::max(res, 0.0) - a.curtailment),
                                        std::abs(std::max(-res, 0.0) - a.unmet)});
      if (unlogged > kBalanceTol) out.push_back({ConstraintId::PowerBalance, hh, slot, unlogged});
      fc_total += a.fc_power;
      el_total += a.el_power;
    }

    const double h2 = s.hydrogen + d.eta_prod * el_total * dt - d.eta_cons * fc_total * dt;
    for (double v : {h2, r.hydrogen}) {
      if (v < d.h_min - kBoundTol) out.push_back({ConstraintId::HydrogenBounds, kShared, slot, d.h_min - v});
      else if (v > d.h_max + kBoundTol) out.push_back({ConstraintId::HydrogenBounds, kShared, slot, v - d.h_max});
      if (r.hydrogen == h2) break;
    }
    if (std::abs(h2 - r.hydrogen) > kReplayTol) out.push_back({ConstraintId::ReplayMismatch, kShared, slot, std::abs(h2 - r.hydrogen)});
    s.hydrogen = std::clamp(h2, d.h_min, d.h_max);
    s.slot = slot + 1;
  }
  sort_violations(out);
  return out;
}

inline std::string violations_csv(const std::vector<Violation>& v) {
  std::string out = "time,household,constraint,magnitude\n";
  for (const auto& x : v)
    out += std::to_string(x.time_index) + ',' + (x.household == kShared ? std::string("shared") : std::to_string(x.household)) + ',' +
           std::string(to_string(x.constraint_id)) + ',' + detail::fmt(x.magnitude) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Summary and plot data

inline nlohmann::json summary_json(const TrajectorySummary& s) {
  return {{"days", s.days},
          {"steps", s.steps},
          {"unit_cost", s.unit_cost},
          {"unmet_kwh", s.unmet_kwh},
          {"curtailed_kwh", s.curtailed_kwh},
          {"soc_min", s.soc_min},
          {"soc_max", s.soc_max},
          {"hydrogen_min", s.hydrogen_min},
          {"hydrogen_max", s.hydrogen_max},
          {"hydrogen_final", s.hydrogen_final},
          {"day_ahead", {{"runs", s.day_ahead_runs}, {"fallbacks", s.day_ahead_fallbacks}, {"time_mean", s.day_ahead_time_mean}, {"time_max", s.day_ahead_time_max}}},
          {"short_term",
           {{"runs", s.short_term_runs}, {"fallbacks", s.short_term_fallbacks}, {"time_mean", s.short_term_time_mean}, {"time_max", s.short_term_time_max}}}};
}

inline std::string stages_csv(const TrajectoryLog& log) {
  std::string out = "stage,slot,n_variables,energy,rounds,wall_time,fallback,note\n";
  auto row = [&](const StageRecord& r) {
    std::string note = r.note;
    for (char& c : note)
      if (c == ',' || c == '\n') c = ';';
    out += std::string(to_string(r.stage)) + ',' + std::to_string(r.slot) + ',' + std::to_string(r.n_variables) + ',' + detail::fmt(r.energy) +
           ',' + std::to_string(r.rounds) + ',' + detail::fmt(r.wall_time) + ',' + (r.fallback ? "1" : "0") + ',' + note + '\n';
  };
  for (const auto& r : log.day_ahead) row(r);
  for (const auto& r : log.short_term) row(r);
  return out;
}

inline std::string commitments_csv(const TrajectoryLog& log) {
  std::string out = "hour,household,fc_mode,el_mode\n";
  for (const auto& s : log.schedules)
    for (std::size_t h = 0; h < s.hours.size(); ++h)
      for (std::size_t i = 0; i < s.hours[h].size(); ++i)
        out += std::to_string(s.first_hour + static_cast<std::int64_t>(h)) + ',' + std::to_string(i) + ',' +
               std::string(to_string(s.hours[h][i].fc)) + ',' + std::string(to_string(s.hours[h][i].el)) + '\n';
  return out;
}

/// Plot-ready tables keyed by file name: power profiles and SOC, unit powers
/// and tank level.
inline std::vector<std::pair<std::string, std::string>> plot_tables(const Scenario& sc, const TrajectoryLog& log) {
  using detail::fmt;
  const int n = sc.n_households;
  std::string power = "slot,time,pv,wt", soc = "slot,time", units = "slot,time", h2 = "slot,time,hydrogen\n";
  for (int i = 0; i < n; ++i) {
    const auto k = std::to_string(i);
    power += ",load_" + k + ",fc_" + k + ",el_" + k + ",battery_net_" + k;
    soc += ",soc_" + k;
    units += ",fc_power_" + k + ",el_power_" + k;
  }
  power += '\n';
  soc += '\n';
  units += ",fc_total,el_total\n";
  for (const auto& st : log.steps) {
    const std::string head = std::to_string(st.slot) + ',' + format_timestamp(sc.slot_time(st.slot));
    power += head + ',' + fmt(st.realized.pv) + ',' + fmt(st.realized.wt);
    soc += head;
    units += head;
    double fc = 0, el = 0;
    for (std::size_t i = 0; i < st.applied.size(); ++i) {
      const auto& a = st.applied[i];
      power += ',' + fmt(st.realized.load[i]) + ',' + fmt(a.fc_power) + ',' + fmt(a.el_power) + ',' + fmt(a.p_dis - a.p_ch);
      soc += ',' + fmt(st.after.households[i].soc);
      units += ',' + fmt(a.fc_power) + ',' + fmt(a.el_power);
      fc += a.fc_power;
      el += a.el_power;
    }
    power += '\n';
    soc += '\n';
    units += ',' + fmt(fc) + ',' + fmt(el) + '\n';
    h2 += head + ',' + fmt(st.after.hydrogen) + '\n';
  }
  return {{"fig3_power.csv", power}, {"fig3_soc.csv", soc}, {"fig4_units.csv", units}, {"fig4_hydrogen.csv", h2}};
}

} // namespace hydroq
