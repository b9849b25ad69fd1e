#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hydroq/mpc.hpp"
#include "hydroq/trajectory_io.hpp"

namespace hydroq {

struct BenchRecord {
  int n_households = 0;
  int n_variables = 0;
  std::string solver;
  double build_time = 0, solve_time = 0; // seconds
  double best_energy = 0;
  bool feasible = false;
  std::optional<double> optimality_gap; // only when the oracle ran
  std::string note;
};

struct BenchOptions {
  std::vector<int> households{1, 2, 3, 4, 5, 6, 7, 8};
  int horizon = 1; // hourly day-ahead steps
  bool brute = true, anneal = true;
  int repeats = 3;  // timings keep the fastest repeat
  int threads = 1;
  AnnealParams anneal_params{};
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// One day-ahead model per household count from the scenario's device data
/// and a fresh synthetic series; brute force (within the cap) and annealing
/// are timed on the same compiled QUBO.
inline std::vector<BenchRecord> run_bench(const Scenario& base, const BenchOptions& opt) {
  std::vector<BenchRecord> out;
  for (int n : opt.households) {
    Scenario sc = default_scenario(n, base.rng_seed, 1);
    sc.device = base.device;
    sc.costs = base.costs;
    sc.power_bits = base.power_bits;
    sc.battery_bits = base.battery_bits;
    sc.slack_bits = base.slack_bits;
    sc.day_ahead_horizon = opt.horizon;

    double build = std::numeric_limits<double>::infinity();
    ConstrainedModel m;
    QuboModel q;
    for (int r = 0; r < std::max(opt.repeats, 1); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      m = build_day_ahead(sc, make_forecast(sc, 0, opt.horizon, kSlotsPerHour), initial_state(sc));
      q = compile(m, auto_penalty(m));
      build = std::min(build, detail::elapsed(t0));
    }
    const auto check = plant_validator(m, sc);
    BenchRecord proto;
    proto.n_households = n;
    proto.n_variables = q.n;
    proto.build_time = build;

    std::optional<double> optimum;
    if (opt.brute) {
      BenchRecord b = proto;
      b.solver = "brute";
      if (q.n > kBruteForceCap) {
        b.note = "oracle skipped: " + std::to_string(q.n) + " variables above cap " + std::to_string(kBruteForceCap);
        b.solve_time = std::numeric_limits<double>::quiet_NaN();
        b.best_energy = std::numeric_limits<double>::quiet_NaN();
      } else {
        double t = std::numeric_limits<double>::infinity();
        SampleSet s;
        for (int r = 0; r < std::max(opt.repeats, 1); ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          s = brute_force(q, opt.threads);
          t = std::min(t, detail::elapsed(t0));
        }
        b.solve_time = t;
        b.best_energy = s.best().energy;
        b.feasible = check(s.best().assignment).empty();
        b.optimality_gap = 0.0;
        optimum = b.best_energy;
      }
      out.push_back(std::move(b));
    }
    if (opt.anneal) {
      BenchRecord a = proto;
      a.solver = "anneal";
      AnnealParams p = opt.anneal_params;
      p.threads = opt.threads;
      p.seed = derive_seed(base.rng_seed, static_cast<std::uint64_t>(n));
      const IsingModel ising = to_ising(q);
      double t = std::numeric_limits<double>::infinity();
      SampleSet s;
      for (int r = 0; r < std::max(opt.repeats, 1); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        s = anneal(ising, p);
        t = std::min(t, detail::elapsed(t0));
      }
      for (auto& smp : s.samples) {
        smp.energy = energy(q, smp.assignment);
        smp.feasible = check(smp.assignment).empty();
      }
      s.select_best();
      a.solve_time = t;
      a.best_energy = s.best().energy;
      a.feasible = s.best().feasible;
      if (optimum) a.optimality_gap = (a.best_energy - *optimum) / std::max(1.0, std::abs(*optimum));
      out.push_back(std::move(a));
    }
  }
  return out;
}

inline std::string bench_csv(const std::vector<BenchRecord>& rows) {
  std::string out = "n_households,n_variables,solver,build_time,solve_time,best_energy,feasible,optimality_gap,note\n";
  for (const auto& r : rows)
    out += std::to_string(r.n_households) + ',' + std::to_string(r.n_variables) + ',' + r.solver + ',' + detail::fmt(r.build_time) + ',' +
           detail::fmt(r.solve_time) + ',' + detail::fmt(r.best_energy) + ',' + (r.feasible ? "1" : "0") + ',' +
           (r.optimality_gap ? detail::fmt(*r.optimality_gap) : std::string()) + ',' + r.note + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Scaling fits

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = static_cast<int>(x.size());
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

struct ScalingReport {
  LineFit brute_exp;   // ln t = a + b n    (growth factor e^b per variable)
  LineFit anneal_pow;  // ln t = a + k ln n (polynomial exponent k)
  std::optional<int> crossover; // fewest variables at which brute force is slower
};

/// Brute-force points below `min_brute_time` seconds are dominated by fixed
/// overhead and left out of the exponential fit.
inline ScalingReport fit_scaling(const std::vector<BenchRecord>& rows, double min_brute_time = 1e-4) {
  std::vector<double> bn, bt, an, at;
  for (const auto& r : rows) {
    if (!(r.solve_time > 0) || !std::isfinite(r.solve_time)) continue;
    if (r.solver == "brute" && r.solve_time >= min_brute_time) {
      bn.push_back(r.n_variables);
      bt.push_back(std::log(r.solve_time));
    } else if (r.solver == "anneal") {
      an.push_back(std::log(static_cast<double>(r.n_variables)));
      at.push_back(std::log(r.solve_time));
    }
  }
  ScalingReport rep;
  rep.brute_exp = least_squares(bn, bt);
  rep.anneal_pow = least_squares(an, at);
  for (const auto& b : rows) {
    if (b.solver != "brute" || !std::isfinite(b.solve_time)) continue;
    for (const auto& a : rows)
      if (a.solver == "anneal" && a.n_households == b.n_households && b.solve_time > a.solve_time &&
          (!rep.crossover || b.n_variables < *rep.crossover))
        rep.crossover = b.n_variables;
  }
  return rep;
}

inline std::string scaling_text(const ScalingReport& r) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "brute force: ln t = %.3f + %.4f n  (x%.3f per variable, r2 %.3f, %d points)\n"
                "anneal:      ln t = %.3f + %.3f ln n  (exponent %.3f, r2 %.3f, %d points)\n",
                r.brute_exp.intercept, r.brute_exp.slope, std::exp(r.brute_exp.slope), r.brute_exp.r2, r.brute_exp.points,
                r.anneal_pow.intercept, r.anneal_pow.slope, r.anneal_pow.slope, r.anneal_pow.r2, r.anneal_pow.points);
  std::string out = buf;
  out += r.crossover ? "crossover: brute force slower than anneal from " + std::to_string(*r.crossover) + " variables\n"
                     : std::string("crossover: not reached within the oracle cap\n");
  return out;
}

inline std::string bench_table(const std::vector<BenchRecord>& rows) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%4s %6s %-7s %11s %11s %14s %4s %10s\n", "N", "vars", "solver", "build[s]", "solve[s]", "energy", "feas", "gap");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%4d %6d %-7s %11.3e %11.3e %14.6g %4s %10s\n", r.n_households, r.n_variables, r.solver.c_str(), r.build_time,
                  r.solve_time, r.best_energy, r.feasible ? "yes" : "no", r.optimality_gap ? detail::fmt(*r.optimality_gap).substr(0, 10).c_str() : "-");
    out += buf;
  }
  return out;
}

} // namespace hydroq
