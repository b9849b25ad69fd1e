#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydroq/error.hpp"
#include "hydroq/renewables.hpp"
#include "hydroq/rng.hpp"

namespace hydroq {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Simulation resolution: one slot is fifteen minutes.
inline constexpr std::int64_t kSlotSeconds = 900;
inline constexpr int kSlotsPerHour = 4;
inline constexpr int kSlotsPerDay = 96;

// ---------------------------------------------------------------------------
// Timestamps

/// Parses `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z`. A space is
/// accepted in place of `T`.
inline Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  char tail[4] = {0, 0, 0, 0};
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%3s", &y, &mo, &d, &sep, &h, &mi, &s, tail);
  if (n < 7 || (sep != 'T' && sep != ' ') || (n == 8 && std::string_view(tail) != "Z"))
    throw ParseError("bad timestamp '" + buf + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw ParseError("bad timestamp '" + buf + "'");
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days_since) * 86400 + h * 3600 + mi * 60 + s;
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  std::int64_t days_since = t / 86400;
  std::int64_t secs = t % 86400;
  if (secs < 0) {
    secs += 86400;
    --days_since;
  }
  const year_month_day ymd{sys_days{days{days_since}}};
  char out[32];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
  return out;
}

// ---------------------------------------------------------------------------
// Domain types

struct TimeSeries {
  Timestamp start = 0;
  std::int64_t step = kSlotSeconds; // seconds
  std::vector<double> values;

  Timestamp end() const noexcept { return start + step * static_cast<std::int64_t>(values.size()); }

  /// Value in effect at time `t` (sample-and-hold).
  double at(Timestamp t) const {
    if (t < start || t >= end())
      throw CoverageError("time series does not cover " + format_timestamp(t));
    return values[static_cast<std::size_t>((t - start) / step)];
  }

  bool operator==(const TimeSeries&) const = default;
};

struct DeviceParams {
  double p_fc_min = 0.5, p_fc_max = 2.0; // kW
  double p_el_min = 0.5, p_el_max = 2.0; // kW
  int t_on_min_fc = 2, t_off_min_fc = 2; // h
  int t_on_min_el = 2, t_off_min_el = 2; // h
  double batt_capacity = 10.0;           // kWh
  double eta_ch = 0.95, eta_dis = 0.95;
  double p_ch_max = 3.0, p_dis_max = 3.0; // kW
  double soc_min = 0.2, soc_max = 0.9, soc_init = 0.6, soc_target = 0.7;
  double eta_prod = 0.018; // kg H2 per kWh consumed by the electrolyzer
  double eta_cons = 0.060; // kg H2 per kWh delivered by the fuel cell
  double h_min = 0.0, h_max = 15.0, h_init = 1.0; // kg

  bool operator==(const DeviceParams&) const = default;
};

struct CostParams {
  double c_standby_fc = 0.05, c_standby_el = 0.05; // $/h in standby
  double c_hot_fc = 0.2, c_hot_el = 0.2;           // $/event, Off <-> Standby
  double c_trans_fc = 0.1, c_trans_el = 0.1;       // $/event, Standby <-> On
  double w_cost = 1.0, w_hydrogen = 1.0, w_soc = 1.0, w_fluct = 1.0;
  double w_slack_balance = 1000.0;

  bool operator==(const CostParams&) const = default;
};

struct Scenario {
  int n_households = 1;
  DeviceParams device;
  CostParams costs;
  double pv_rated = 3.0, wt_rated = 1.0, eta_pv_conv = 0.9;
  double v_cut_in = 3.0, v_rated = 8.0, v_cut_out = 22.0;
  TimeSeries ambient_temp, insolation, wind_speed;
  std::vector<TimeSeries> loads;
  int day_ahead_horizon = 24;  // hourly steps
  int short_term_horizon = 8;  // 15-minute steps
  int power_bits = 4;
  int slack_bits = 4;
  int battery_bits = 4;        // 0 removes battery decisions from the stage models
  double forecast_noise = 0.0; // sigma of multiplicative forecast noise
  std::uint64_t rng_seed = 7;

  PvParams pv() const { return {eta_pv_conv, pv_rated}; }
  WtParams wt() const { return {wt_rated, v_cut_in, v_rated, v_cut_out}; }
  /// Simulation origin: slot 0 starts here.
  Timestamp origin() const noexcept { return ambient_temp.start; }
  Timestamp slot_time(std::int64_t slot) const noexcept { return origin() + slot * kSlotSeconds; }

  bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {
inline void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}
inline void validate_series(const TimeSeries& s, const std::string& field) {
  if (s.step <= 0) throw ValidationError(field, "step must be positive");
  if (s.values.empty()) throw ValidationError(field, "series is empty");
  for (double v : s.values)
    if (!std::isfinite(v)) throw ValidationError(field, "non-finite value");
}
} // namespace detail

/// Checks every invariant; throws ValidationError naming the first bad field.
inline void validate(const Scenario& sc) {
  using detail::require;
  const auto& d = sc.device;
  require(d.p_fc_min >= 0 && d.p_fc_min < d.p_fc_max, "device.p_fc_min", "need 0 <= p_fc_min < p_fc_max");
  require(d.p_el_min >= 0 && d.p_el_min < d.p_el_max, "device.p_el_min", "need 0 <= p_el_min < p_el_max");
  require(d.t_on_min_fc >= 1, "device.t_on_min_fc", "must be >= 1");
  require(d.t_off_min_fc >= 1, "device.t_off_min_fc", "must be >= 1");
  require(d.t_on_min_el >= 1, "device.t_on_min_el", "must be >= 1");
  require(d.t_off_min_el >= 1, "device.t_off_min_el", "must be >= 1");
  require(d.batt_capacity > 0, "device.batt_capacity", "must be positive");
  require(d.eta_ch > 0 && d.eta_ch <= 1, "device.eta_ch", "must be in (0, 1]");
  require(d.eta_dis > 0 && d.eta_dis <= 1, "device.eta_dis", "must be in (0, 1]");
  require(d.p_ch_max > 0, "device.p_ch_max", "must be positive");
  require(d.p_dis_max > 0, "device.p_dis_max", "must be positive");
  require(d.soc_min >= 0 && d.soc_min < d.soc_max && d.soc_max <= 1, "device.soc_min",
          "soc bounds need 0 <= soc_min < soc_max <= 1");
  require(d.soc_target > d.soc_min && d.soc_target < d.soc_max, "device.soc_target",
          "need soc_min < soc_target < soc_max");
  require(d.soc_init >= d.soc_min && d.soc_init <= d.soc_max, "device.soc_init", "must lie in [soc_min, soc_max]");
  require(d.eta_prod > 0, "device.eta_prod", "must be positive");
  require(d.eta_cons > 0, "device.eta_cons", "must be positive");
  require(d.h_min >= 0 && d.h_min < d.h_max, "device.h_min", "need 0 <= h_min < h_max");
  require(d.h_init >= d.h_min && d.h_init <= d.h_max, "device.h_init", "must lie in [h_min, h_max]");

  const auto& c = sc.costs;
  const std::pair<const char*, double> costs[] = {
      {"costs.c_standby_fc", c.c_standby_fc}, {"costs.c_standby_el", c.c_standby_el},
      {"costs.c_hot_fc", c.c_hot_fc},         {"costs.c_hot_el", c.c_hot_el},
      {"costs.c_trans_fc", c.c_trans_fc},     {"costs.c_trans_el", c.c_trans_el},
      {"costs.w_cost", c.w_cost},             {"costs.w_hydrogen", c.w_hydrogen},
      {"costs.w_soc", c.w_soc},               {"costs.w_fluct", c.w_fluct},
      {"costs.w_slack_balance", c.w_slack_balance}};
  for (const auto& [name, v] : costs) require(v >= 0 && std::isfinite(v), name, "must be >= 0");

  require(sc.n_households >= 1, "n_households", "must be >= 1");
  require(static_cast<int>(sc.loads.size()) == sc.n_households, "loads",
          "expected " + std::to_string(sc.n_households) + " load series, got " + std::to_string(sc.loads.size()));
  require(sc.pv_rated > 0, "pv_rated", "must be positive");
  require(sc.wt_rated > 0, "wt_rated", "must be positive");
  require(sc.eta_pv_conv > 0 && sc.eta_pv_conv <= 1, "eta_pv_conv", "must be in (0, 1]");
  require(sc.v_cut_in >= 0 && sc.v_cut_in < sc.v_rated, "v_cut_in", "need 0 <= v_cut_in < v_rated");
  require(sc.v_rated <= sc.v_cut_out, "v_cut_out", "need v_rated <= v_cut_out");
  require(sc.day_ahead_horizon >= 1, "day_ahead_horizon", "must be >= 1");
  require(sc.short_term_horizon >= 1, "short_term_horizon", "must be >= 1");
  require(sc.power_bits >= 1 && sc.power_bits <= 16, "power_bits", "must be in [1, 16]");
  require(sc.slack_bits >= 1 && sc.slack_bits <= 16, "slack_bits", "must be in [1, 16]");
  require(sc.battery_bits >= 0 && sc.battery_bits <= 16, "battery_bits", "must be in [0, 16]");
  require(sc.forecast_noise >= 0, "forecast_noise", "must be >= 0");

  detail::validate_series(sc.ambient_temp, "ambient_temp");
  detail::validate_series(sc.insolation, "insolation");
  detail::validate_series(sc.wind_speed, "wind_speed");
  for (std::size_t i = 0; i < sc.loads.size(); ++i) detail::validate_series(sc.loads[i], "loads[" + std::to_string(i) + "]");
  for (double v : sc.insolation.values) require(v >= 0, "insolation", "values must be >= 0");
  for (double v : sc.wind_speed.values) require(v >= 0, "wind_speed", "values must be >= 0");
}

/// Number of whole 15-minute slots covered by every series, counted from the
/// simulation origin.
inline std::int64_t covered_slots(const Scenario& sc) {
  auto slots = [&](const TimeSeries& s) -> std::int64_t {
    if (s.start > sc.origin()) return 0;
    return (s.end() - sc.origin()) / kSlotSeconds;
  };
  std::int64_t n = std::min({slots(sc.ambient_temp), slots(sc.insolation), slots(sc.wind_speed)});
  for (const auto& l : sc.loads) n = std::min(n, slots(l));
  return n;
}

// ---------------------------------------------------------------------------
// Synthetic profiles

struct Profiles {
  TimeSeries ambient, insolation, wind;
  std::vector<TimeSeries> loads;
};

/// 2024-01-01T00:00:00Z, origin of generated profiles.
inline constexpr Timestamp kSyntheticStart = 1704067200;

/// Deterministic 15-minute weather and load profiles. Loads share a diurnal
/// base curve; each household adds its own randomly placed appliance events.
inline Profiles synth_profiles(std::uint64_t seed, int days, int n_households) {
  const std::size_t n = static_cast<std::size_t>(days) * kSlotsPerDay;
  Profiles p;
  for (TimeSeries* s : {&p.ambient, &p.insolation, &p.wind}) {
    s->start = kSyntheticStart;
    s->step = kSlotSeconds;
    s->values.resize(n);
  }

  Rng weather(derive_seed(seed, 0));
  double wind = 6.0;
  for (int d = 0; d < days; ++d) {
    const double clearness = 0.55 + 0.45 * weather.uniform();
    const double mean_temp = 18.0 + 6.0 * std::cos(2.0 * std::numbers::pi * d / 365.0) + weather.normal();
    for (int k = 0; k < kSlotsPerDay; ++k) {
      const std::size_t i = static_cast<std::size_t>(d) * kSlotsPerDay + k;
      const double hour = k * 0.25;
      p.ambient.values[i] = mean_temp + 5.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0) + 0.3 * weather.normal();
      const double jitter = 0.9 + 0.1 * weather.uniform();
      double sun = 0.0;
      if (hour > 6.0 && hour < 18.0) sun = std::sin(std::numbers::pi * (hour - 6.0) / 12.0) * clearness * jitter;
      p.insolation.values[i] = std::clamp(sun, 0.0, 1.0);
      wind = std::max(0.0, 0.92 * wind + 0.08 * 6.5 + 0.9 * weather.normal());
      p.wind.values[i] = wind;
    }
  }

  auto base_load = [](double hour) {
    const double morning = (hour - 7.5) / 1.5;
    const double evening = (hour - 19.0) / 2.5;
    return 0.3 + 0.25 * std::exp(-morning * morning) + 0.55 * std::exp(-evening * evening);
  };

  p.loads.resize(static_cast<std::size_t>(n_households));
  for (int h = 0; h < n_households; ++h) {
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(h)));
    TimeSeries& s = p.loads[static_cast<std::size_t>(h)];
    s.start = kSyntheticStart;
    s.step = kSlotSeconds;
    s.values.resize(n);
    const double scale = 0.85 + 0.3 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) s.values[i] = scale * base_load((i % kSlotsPerDay) * 0.25) + 0.03 * std::abs(rng.normal());
    for (int d = 0; d < days; ++d) {
      for (int e = 0; e < 3; ++e) {
        const std::size_t begin = static_cast<std::size_t>(d) * kSlotsPerDay + rng.below(kSlotsPerDay);
        const std::size_t len = 2 + rng.below(7);
        const double kw = rng.uniform(0.3, 1.2);
        for (std::size_t i = begin; i < std::min(n, begin + len); ++i) s.values[i] += kw;
      }
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// CSV series

/// Reads a `timestamp,value` CSV. Timestamps must be strictly increasing with
/// a constant step; gaps are rejected.
inline TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingSeries("cannot open series file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,value") throw ParseError(path.string() + ": expected header 'timestamp,value'");

  TimeSeries s;
  Timestamp prev = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path.string() + ":" + std::to_string(row) + ": missing comma");
    const Timestamp t = parse_timestamp(std::string_view(line).substr(0, comma));
    const std::string vtext = line.substr(comma + 1);
    char* end = nullptr;
    const double v = std::strtod(vtext.c_str(), &end);
    if (end == vtext.c_str() || *end != '\0' || !std::isfinite(v))
      throw ParseError(path.string() + ":" + std::to_string(row) + ": bad value '" + vtext + "'");
    if (s.values.empty()) {
      s.start = t;
    } else {
      const std::int64_t step = t - prev;
      if (step <= 0) throw ParseError(path.string() + ":" + std::to_string(row) + ": timestamps not increasing");
      if (s.values.size() == 1) s.step = step;
      else if (step != s.step) throw ParseError(path.string() + ":" + std::to_string(row) + ": gap or irregular step");
    }
    prev = t;
    s.values.push_back(v);
  }
  if (s.values.empty()) throw ParseError(path.string() + ": no data rows");
  return s;
}

inline std::string series_to_csv(const TimeSeries& s) {
  std::string out = "timestamp,value\n";
  char buf[64];
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g\n", s.values[i]);
    out += format_timestamp(s.start + s.step * static_cast<std::int64_t>(i));
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

template <class T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& prefix) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("field '" + prefix + key + "' has the wrong type");
  }
}

struct SeriesContext {
  std::filesystem::path root;
  const Profiles* synthetic = nullptr;
};

inline TimeSeries resolve_series(const nlohmann::json& spec, const SeriesContext& ctx, const TimeSeries& synthetic,
                                 const std::string& field) {
  if (spec.is_string()) {
    std::filesystem::path p = spec.get<std::string>();
    if (p.is_relative()) p = ctx.root / p;
    if (!std::filesystem::exists(p)) throw MissingSeries(field + ": series file " + p.string() + " not found");
    return read_series_csv(p);
  }
  if (spec.is_object() && spec.contains("synthetic")) return synthetic;
  if (spec.is_object() && spec.contains("values")) {
    TimeSeries s;
    try {
      s.start = parse_timestamp(spec.at("start").get<std::string>());
      s.step = spec.value("step", kSlotSeconds);
      s.values = spec.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(field + ": malformed inline series (" + e.what() + ")");
    }
    return s;
  }
  throw ParseError(field + ": expected a CSV path, inline series, or {\"synthetic\": ...}");
}

} // namespace detail

/// Builds a validated scenario from a parsed config. Relative CSV paths
/// resolve against `data_root`.
inline Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& data_root) {
  if (!j.is_object()) throw ParseError("config root must be an object");
  Scenario sc;
  using detail::read_field;
  read_field(j, "n_households", sc.n_households, "");
  read_field(j, "pv_rated", sc.pv_rated, "");
  read_field(j, "wt_rated", sc.wt_rated, "");
  read_field(j, "eta_pv_conv", sc.eta_pv_conv, "");
  read_field(j, "v_cut_in", sc.v_cut_in, "");
  read_field(j, "v_rated", sc.v_rated, "");
  read_field(j, "v_cut_out", sc.v_cut_out, "");
  read_field(j, "day_ahead_horizon", sc.day_ahead_horizon, "");
  read_field(j, "short_term_horizon", sc.short_term_horizon, "");
  read_field(j, "power_bits", sc.power_bits, "");
  read_field(j, "slack_bits", sc.slack_bits, "");
  sc.battery_bits = sc.power_bits;
  read_field(j, "battery_bits", sc.battery_bits, "");
  read_field(j, "forecast_noise", sc.forecast_noise, "");
  read_field(j, "rng_seed", sc.rng_seed, "");

  if (const auto it = j.find("device"); it != j.end()) {
    if (!it->is_object()) throw ParseError("'device' must be an object");
    auto& d = sc.device;
    const std::string p = "device.";
    read_field(*it, "p_fc_min", d.p_fc_min, p);
    read_field(*it, "p_fc_max", d.p_fc_max, p);
    read_field(*it, "p_el_min", d.p_el_min, p);
    read_field(*it, "p_el_max", d.p_el_max, p);
    read_field(*it, "t_on_min_fc", d.t_on_min_fc, p);
    read_field(*it, "t_off_min_fc", d.t_off_min_fc, p);
    read_field(*it, "t_on_min_el", d.t_on_min_el, p);
    read_field(*it, "t_off_min_el", d.t_off_min_el, p);
    read_field(*it, "batt_capacity", d.batt_capacity, p);
    read_field(*it, "eta_ch", d.eta_ch, p);
    read_field(*it, "eta_dis", d.eta_dis, p);
    read_field(*it, "p_ch_max", d.p_ch_max, p);
    read_field(*it, "p_dis_max", d.p_dis_max, p);
    read_field(*it, "soc_min", d.soc_min, p);
    read_field(*it, "soc_max", d.soc_max, p);
    read_field(*it, "soc_init", d.soc_init, p);
    read_field(*it, "soc_target", d.soc_target, p);
    read_field(*it, "eta_prod", d.eta_prod, p);
    read_field(*it, "eta_cons", d.eta_cons, p);
    read_field(*it, "h_min", d.h_min, p);
    read_field(*it, "h_max", d.h_max, p);
    read_field(*it, "h_init", d.h_init, p);
  }
  if (const auto it = j.find("costs"); it != j.end()) {
    if (!it->is_object()) throw ParseError("'costs' must be an object");
    auto& c = sc.costs;
    const std::string p = "costs.";
    read_field(*it, "c_standby_fc", c.c_standby_fc, p);
    read_field(*it, "c_standby_el", c.c_standby_el, p);
    read_field(*it, "c_hot_fc", c.c_hot_fc, p);
    read_field(*it, "c_hot_el", c.c_hot_el, p);
    read_field(*it, "c_trans_fc", c.c_trans_fc, p);
    read_field(*it, "c_trans_el", c.c_trans_el, p);
    read_field(*it, "w_cost", c.w_cost, p);
    read_field(*it, "w_hydrogen", c.w_hydrogen, p);
    read_field(*it, "w_soc", c.w_soc, p);
    read_field(*it, "w_fluct", c.w_fluct, p);
    read_field(*it, "w_slack_balance", c.w_slack_balance, p);
  }

  // Series: any series that is omitted, or declared {"synthetic": ...}, comes
  // from the generator configured under "synthetic".
  std::uint64_t synth_seed = sc.rng_seed;
  int synth_days = 7;
  if (const auto it = j.find("synthetic"); it != j.end()) {
    if (!it->is_object()) throw ParseError("'synthetic' must be an object");
    read_field(*it, "seed", synth_seed, "synthetic.");
    read_field(*it, "days", synth_days, "synthetic.");
    if (synth_days < 1) throw ValidationError("synthetic.days", "must be >= 1");
  }
  const int n_for_synth = std::max(sc.n_households, 1);
  const Profiles synth = synth_profiles(synth_seed, synth_days, n_for_synth);
  const detail::SeriesContext ctx{data_root, &synth};
  auto series = [&](const char* key, const TimeSeries& fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    return detail::resolve_series(*it, ctx, fallback, key);
  };
  sc.ambient_temp = series("ambient_temp", synth.ambient);
  sc.insolation = series("insolation", synth.insolation);
  sc.wind_speed = series("wind_speed", synth.wind);
  if (const auto it = j.find("loads"); it != j.end()) {
    if (it->is_array()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const TimeSeries& fb = synth.loads[std::min(i, synth.loads.size() - 1)];
        sc.loads.push_back(detail::resolve_series((*it)[i], ctx, fb, "loads[" + std::to_string(i) + "]"));
      }
    } else if (it->is_object() && it->contains("synthetic")) {
      sc.loads = synth.loads;
    } else {
      throw ParseError("'loads' must be an array or {\"synthetic\": ...}");
    }
  } else {
    sc.loads = synth.loads;
  }

  validate(sc);
  return sc;
}

inline nlohmann::json series_to_json(const TimeSeries& s) {
  return {{"start", format_timestamp(s.start)}, {"step", s.step}, {"values", s.values}};
}

/// Full serialization with inline series; `scenario_from_json` reads it back
/// to an equal value.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
  const auto& d = sc.device;
  const auto& c = sc.costs;
  nlohmann::json j;
  j["n_households"] = sc.n_households;
  j["device"] = {{"p_fc_min", d.p_fc_min},       {"p_fc_max", d.p_fc_max},       {"p_el_min", d.p_el_min},
                 {"p_el_max", d.p_el_max},       {"t_on_min_fc", d.t_on_min_fc}, {"t_off_min_fc", d.t_off_min_fc},
                 {"t_on_min_el", d.t_on_min_el}, {"t_off_min_el", d.t_off_min_el}, {"batt_capacity", d.batt_capacity},
                 {"eta_ch", d.eta_ch},           {"eta_dis", d.eta_dis},         {"p_ch_max", d.p_ch_max},
                 {"p_dis_max", d.p_dis_max},     {"soc_min", d.soc_min},         {"soc_max", d.soc_max},
                 {"soc_init", d.soc_init},       {"soc_target", d.soc_target},   {"eta_prod", d.eta_prod},
                 {"eta_cons", d.eta_cons},       {"h_min", d.h_min},             {"h_max", d.h_max},
                 {"h_init", d.h_init}};
  j["costs"] = {{"c_standby_fc", c.c_standby_fc}, {"c_standby_el", c.c_standby_el}, {"c_hot_fc", c.c_hot_fc},
                {"c_hot_el", c.c_hot_el},         {"c_trans_fc", c.c_trans_fc},     {"c_trans_el", c.c_trans_el},
                {"w_cost", c.w_cost},             {"w_hydrogen", c.w_hydrogen},     {"w_soc", c.w_soc},
                {"w_fluct", c.w_fluct},           {"w_slack_balance", c.w_slack_balance}};
  j["pv_rated"] = sc.pv_rated;
  j["wt_rated"] = sc.wt_rated;
  j["eta_pv_conv"] = sc.eta_pv_conv;
  j["v_cut_in"] = sc.v_cut_in;
  j["v_rated"] = sc.v_rated;
  j["v_cut_out"] = sc.v_cut_out;
  j["day_ahead_horizon"] = sc.day_ahead_horizon;
  j["short_term_horizon"] = sc.short_term_horizon;
  j["power_bits"] = sc.power_bits;
  j["slack_bits"] = sc.slack_bits;
  j["battery_bits"] = sc.battery_bits;
  j["forecast_noise"] = sc.forecast_noise;
  j["rng_seed"] = sc.rng_seed;
  j["ambient_temp"] = series_to_json(sc.ambient_temp);
  j["insolation"] = series_to_json(sc.insolation);
  j["wind_speed"] = series_to_json(sc.wind_speed);
  j["loads"] = nlohmann::json::array();
  for (const auto& l : sc.loads) j["loads"].push_back(series_to_json(l));
  return j;
}

/// CSV root: `HYDROQ_DATA_DIR` when set, else the config file's directory.
inline std::filesystem::path data_root_for(const std::filesystem::path& config_path) {
  if (const char* env = std::getenv("HYDROQ_DATA_DIR"); env && *env) return env;
  return config_path.parent_path();
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingSeries("scenario file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, data_root_for(path));
}

/// All-defaults scenario with synthetic profiles.
inline Scenario default_scenario(int n_households = 1, std::uint64_t seed = 7, int days = 7) {
  nlohmann::json j = {{"n_households", n_households}, {"rng_seed", seed}, {"synthetic", {{"seed", seed}, {"days", days}}}};
  return scenario_from_json(j, ".");
}

} // namespace hydroq
