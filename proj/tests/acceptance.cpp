// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "hydroq/bench.hpp"
#include "hydroq/cli.hpp"
#include "support.hpp"

using namespace hydroq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string strf(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hydroq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

const std::filesystem::path kExample = std::filesystem::path(HYDROQ_SOURCE_DIR) / "examples/scenarios/one_household_week.json";

// 1 ---------------------------------------------------------------------------

Outcome renewables_points() {
  const double pv = pv_power({1.0, 1.0}, 25.0, 1.0);
  const WtParams wt{.p_rated = 1.0};
  const double speeds[] = {2.9, 5.5, 8.0, 22.0, 22.1};
  const double expect[] = {0.0, 0.125, 1.0, 1.0, 0.0};
  double worst = std::abs(pv - 1.0);
  for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(wt_power(wt, speeds[k]) - expect[k]));
  return {pv == 1.0 && worst <= 1e-12, strf("pv=%.17g, max |wt error|=%.3g", pv, worst)};
}

// 2 ---------------------------------------------------------------------------

Outcome qubo_ising_exactness() {
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst = 0;
  long checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    QuboModel q;
    q.n = 1 + static_cast<int>(g() % 12);
    q.offset = u(g);
    for (int i = 0; i < q.n; ++i)
      for (int j = i; j < q.n; ++j)
        if (g() % 2) q.add(i, j, u(g));
    const IsingModel m = to_ising(q);
    std::vector<std::uint8_t> x(static_cast<std::size_t>(q.n));
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << q.n); ++a) {
      for (int i = 0; i < q.n; ++i) x[static_cast<std::size_t>(i)] = (a >> i) & 1u;
      worst = std::max(worst, std::abs(energy(q, x) - ising_energy(m, to_spins(x))));
      ++checked;
    }
  }
  return {worst < 1e-12, strf("%ld assignments over 1000 models, max |dE|=%.3g", checked, worst)};
}

// 3 ---------------------------------------------------------------------------

struct TinyInstance {
  Scenario sc;
  ConstrainedModel model;
};

std::optional<TinyInstance> random_instance(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0, 1);
  Scenario sc = default_scenario(1, 7, 1);
  sc.day_ahead_horizon = 1 + static_cast<int>(g() % 3);
  sc.power_bits = 1 + static_cast<int>(g() % 2);
  sc.battery_bits = static_cast<int>(g() % 2);
  sc.slack_bits = 2;
  PlantState s0 = initial_state(sc);
  auto& hs = s0.households[0];
  hs.soc = 0.25 + 0.6 * u(g);
  s0.hydrogen = 3.0 * u(g);
  const Mode modes[] = {Mode::Off, Mode::Standby, Mode::On};
  hs.fc = modes[g() % 3];
  hs.el = modes[g() % 3];
  if (hs.fc == Mode::On) {
    hs.fc_ages = {kSettledAge, 0};
    hs.fc_power = sc.device.p_fc_min;
  }
  if (hs.el == Mode::On) {
    hs.el_ages = {kSettledAge, 0};
    hs.el_power = sc.device.p_el_min;
  }
  const auto f = fixtures::constant_forecast(0, sc.day_ahead_horizon, kSlotsPerHour, 2.0 * u(g), u(g), {2.5 * u(g)});
  try {
    TinyInstance inst{sc, build_day_ahead(sc, f, s0)};
    if (inst.model.size() == 0 || inst.model.size() > 20) return std::nullopt;
    return inst;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Outcome penalty_dominance() {
  std::mt19937_64 g(77);
  int accepted = 0, draws = 0, max_n = 0, failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  while (accepted < 50 && draws < 5000) {
    ++draws;
    auto inst = random_instance(g);
    if (!inst) continue;
    const auto& m = inst->model;
    const QuboModel q = compile(m, auto_penalty(m));
    const auto plant = plant_validator(m, inst->sc);
    double best_feasible = std::numeric_limits<double>::infinity(), best_infeasible = best_feasible;
    std::vector<std::uint8_t> x(m.size());
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << q.n); ++a) {
      for (int i = 0; i < q.n; ++i) x[static_cast<std::size_t>(i)] = (a >> i) & 1u;
      const double e = energy(q, x);
      const bool feasible = m.penalty_feasible(x) && plant(x).empty();
      (feasible ? best_feasible : best_infeasible) = std::min(feasible ? best_feasible : best_infeasible, e);
    }
    if (!std::isfinite(best_feasible)) continue; // no feasible point: property is vacuous
    ++accepted;
    max_n = std::max(max_n, q.n);
    const double oracle = brute_force(q).best().energy;
    if (std::abs(oracle - best_feasible) > 1e-9 || !(best_infeasible > best_feasible)) ++failures;
    if (std::isfinite(best_infeasible)) min_margin = std::min(min_margin, best_infeasible - best_feasible);
  }
  return {accepted == 50 && failures == 0,
          strf("%d instances (max %d vars), %d failures, min infeasible-minus-optimum margin %.4g", accepted, max_n, failures, min_margin)};
}

// 4 ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const Scenario sc = fixtures::tiny_scenario();
  const auto m = fixtures::tiny_day_ahead(sc);
  const QuboModel q = compile(m, auto_penalty(m));
  const double optimum = brute_force(q).best().energy;
  const IsingModel im = to_ising(q);
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const AnnealParams p{.n_sweeps = 1000, .n_restarts = 50, .seed = derive_seed(4, static_cast<std::uint64_t>(trial)), .auto_beta = true};
    const auto s = anneal(im, p);
    if (std::abs(energy(q, s.best().assignment) - optimum) <= 1e-9) ++hits;
  }
  return {hits >= 95, strf("%zu vars, optimum %.6g, hit in %d/100 trials", m.size(), optimum, hits)};
}

// 5 and 7 ----------------------------------------------------------------------

Outcome closed_loop_week(const std::filesystem::path& out) {
  const Scenario sc = load_scenario(kExample);
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_cli({"--scenario", kExample.string(), "--out-dir", out.string(), "run", "--days", "7"});
  const double elapsed = seconds_since(t0);
  if (rc != cli::kOk) return {false, strf("run exited %d", rc)};
  std::ifstream in(out / "trajectory.csv");
  const auto rows = read_trajectory_csv(in, sc.n_households);
  const auto& d = sc.device;
  int soc_bad = 0, h2_bad = 0, balance_bad = 0;
  double soc_lo = 1, soc_hi = 0, h_lo = 1e9, h_hi = -1e9;
  for (const auto& r : rows) {
    for (int i = 0; i < sc.n_households; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const auto& a = r.applied[k];
      const double soc = r.soc[k];
      soc_lo = std::min(soc_lo, soc);
      soc_hi = std::max(soc_hi, soc);
      soc_bad += soc < 0.2 - kBoundTol || soc > 0.9 + kBoundTol;
      const double surplus = r.realized.pv + r.realized.wt + a.fc_power - a.el_power + a.p_dis - a.p_ch - r.realized.load[k];
      balance_bad += std::abs(surplus - a.curtailment + a.unmet) > kBalanceTol;
    }
    h_lo = std::min(h_lo, r.hydrogen);
    h_hi = std::max(h_hi, r.hydrogen);
    h2_bad += r.hydrogen < d.h_min - kBoundTol || r.hydrogen > 15.0 + kBoundTol;
  }
  const bool ok = rows.size() == 7u * kSlotsPerDay && soc_bad + h2_bad + balance_bad == 0 && elapsed < 600;
  return {ok, strf("%zu steps in %.0f s, SOC [%.4f, %.4f], H2 [%.4f, %.4f] kg, unlogged imbalance steps %d", rows.size(), elapsed, soc_lo,
                   soc_hi, h_lo, h_hi, balance_bad)};
}

Outcome replay_consistency(const std::filesystem::path& week) {
  const auto dir = fixtures::scratch_dir("acc_replay");
  const int clean = run_cli({"--scenario", kExample.string(), "--out-dir", (dir / "clean").string(), "validate", (week / "trajectory.csv").string()});
  std::istringstream in(slurp(week / "trajectory.csv"));
  std::string header, line, text;
  std::getline(in, header);
  text = header + "\n";
  const auto cols = detail::split_csv(header);
  const auto soc_col = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), "soc_0") - cols.begin());
  for (int row = 0; std::getline(in, line); ++row) {
    auto cells = detail::split_csv(line);
    if (row == 300) cells[soc_col] = detail::fmt(std::stod(cells[soc_col]) + 0.05);
    for (std::size_t k = 0; k < cells.size(); ++k) text += (k ? "," : "") + cells[k];
    text += "\n";
  }
  std::ofstream(dir / "corrupt.csv") << text;
  const int bad = run_cli({"--scenario", kExample.string(), "--out-dir", (dir / "bad").string(), "validate", (dir / "corrupt.csv").string()});
  const std::string v = slurp(dir / "bad/violations.csv");
  const bool flagged = v.find("SocBounds") != std::string::npos || v.find("ReplayMismatch") != std::string::npos;
  return {clean == cli::kOk && bad == cli::kValidationFailure && flagged,
          strf("clean trajectory exit %d, corrupted SOC exit %d%s", clean, bad, flagged ? " (flagged)" : "")};
}

// 6 ---------------------------------------------------------------------------

Outcome scaling() {
  Scenario base = default_scenario(1, 7, 1);
  base.power_bits = 1;
  base.battery_bits = 0;
  base.slack_bits = 2;
  BenchOptions opt;
  opt.households = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_bench(base, opt);
  const auto rep = fit_scaling(rows);
  std::fputs(bench_table(rows).c_str(), stdout);
  std::fputs(scaling_text(rep).c_str(), stdout);
  const bool brute_exponential = rep.brute_exp.points >= 3 && rep.brute_exp.slope > 0.3 && rep.brute_exp.r2 > 0.9;
  const bool anneal_quadratic = rep.anneal_pow.points >= 3 && rep.anneal_pow.slope <= 2.0;
  return {brute_exponential && anneal_quadratic && rep.crossover.has_value() && seconds_since(t0) < 900,
          strf("brute x%.3f per variable (r2 %.3f), anneal exponent %.2f, crossover %s", std::exp(rep.brute_exp.slope), rep.brute_exp.r2,
               rep.anneal_pow.slope, rep.crossover ? (std::to_string(*rep.crossover) + " vars").c_str() : "none")};
}

// 8 ---------------------------------------------------------------------------

Outcome determinism() {
  const auto dir = fixtures::scratch_dir("acc_det");
  auto args = [&](const char* name, int threads) {
    return std::vector<std::string>{"--scenario", kExample.string(), "--out-dir", (dir / name).string(), "--seed", "11", "run",
                                    "--days", "1", "--threads", std::to_string(threads)};
  };
  const int a = run_cli(args("a", 1)), b = run_cli(args("b", 1)), c = run_cli(args("c", 4));
  const std::string ta = slurp(dir / "a/trajectory.csv");
  const bool same_runs = !ta.empty() && ta == slurp(dir / "b/trajectory.csv");
  const bool same_threads = ta == slurp(dir / "c/trajectory.csv");
  return {a == 0 && b == 0 && c == 0 && same_runs && same_threads,
          strf("two runs %s, 1 vs 4 threads %s", same_runs ? "identical" : "differ", same_threads ? "identical" : "differ")};
}

} // namespace

int main() {
  const auto week = fixtures::scratch_dir("acc_week");
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"renewable point values", renewables_points},
      {"QUBO/Ising exactness", qubo_ising_exactness},
      {"penalty dominance", penalty_dominance},
      {"anneal matches brute force on tiny instance", oracle_equivalence},
      {"7-day closed loop within limits", [&] { return closed_loop_week(week); }},
      {"scaling bench", scaling},
      {"replay consistency", [&] { return replay_consistency(week); }},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s  %s  [%s] (%.1f s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
