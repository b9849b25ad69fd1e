#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hydroq/bench.hpp"
#include "hydroq/mpc.hpp"
#include "hydroq/remote.hpp"
#include "hydroq/trajectory_io.hpp"

namespace hydroq::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kValidationFailure = 2, kSolverFailure = 3 };

struct SolverArgs {
  std::string solver = "anneal";
  int sweeps = 1000;
  int restarts = 50;
  int threads = 1;
  std::string sampler_url; // empty: HYDROQ_SAMPLER_URL
  double timeout = 30.0;
};

struct RunArgs {
  std::filesystem::path scenario;
  std::filesystem::path out_dir = "out";
  int days = 1;
  std::uint64_t seed = 7;
  SolverArgs solver;
};

struct ValidateArgs {
  std::filesystem::path scenario;
  std::filesystem::path trajectory;
  std::filesystem::path out_dir = "out";
};

struct BenchArgs {
  std::optional<std::filesystem::path> scenario;
  std::filesystem::path out_dir = "out";
  std::string households = "1..8";
  std::string solvers = "brute,anneal";
  int horizon = 1;
  int repeats = 3;
  int power_bits = 1, battery_bits = 0, slack_bits = 2;
  std::uint64_t seed = 7;
  SolverArgs solver;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  int sweeps = 1000;
  int restarts = 50;
};

namespace detail {

inline int fail(int code, const std::string& msg, std::ostream& err) {
  err << "error: " << msg << '\n';
  return code;
}

inline std::vector<int> parse_range(const std::string& s) {
  std::vector<int> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
    if (a < 1 || b < a) throw ParseError("bad household range '" + s + "'");
    for (int n = a; n <= b; ++n) out.push_back(n);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int n = std::stoi(tok);
    if (n < 1) throw ParseError("household counts must be >= 1");
    out.push_back(n);
  }
  if (out.empty()) throw ParseError("empty household list");
  return out;
}

inline SolverKind parse_solver(const std::string& s) {
  if (s == "brute") return SolverKind::BruteForce;
  if (s == "anneal") return SolverKind::Anneal;
  if (s == "remote") return SolverKind::Remote;
  throw ParseError("unknown solver '" + s + "'");
}

inline std::string sampler_endpoint(const SolverArgs& a) {
  if (!a.sampler_url.empty()) return a.sampler_url;
  if (const char* env = std::getenv("HYDROQ_SAMPLER_URL"); env && *env) return env;
  return {};
}

inline SolverConfig solver_config(const SolverArgs& a, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.kind = parse_solver(a.solver);
  cfg.anneal.n_sweeps = a.sweeps;
  cfg.anneal.n_restarts = a.restarts;
  cfg.anneal.seed = seed;
  cfg.threads = a.threads;
  cfg.anneal.threads = a.threads;
  cfg.anneal.validate();
  if (cfg.kind == SolverKind::Remote) {
    const std::string url = sampler_endpoint(a);
    if (url.empty()) throw ParseError("remote solver needs --sampler-url or HYDROQ_SAMPLER_URL");
    cfg.remote = make_remote_sampler(url, a.timeout);
  }
  return cfg;
}

} // namespace detail

inline int cmd_run(const RunArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Scenario sc;
  SolverConfig cfg;
  try {
    sc = load_scenario(a.scenario);
    cfg = detail::solver_config(a.solver, a.seed);
    if (a.days < 1) throw ValidationError("days", "must be >= 1");
    const std::int64_t need = static_cast<std::int64_t>(a.days) * kSlotsPerDay;
    if (covered_slots(sc) < need)
      throw CoverageError("series cover " + std::to_string(covered_slots(sc)) + " slots, " + std::to_string(a.days) + " days need " +
                          std::to_string(need));
  } catch (const Error& e) {
    return detail::fail(kInputError, e.what(), err);
  }

  if (cfg.kind == SolverKind::Remote) {
    try {
      QuboModel probe;
      probe.n = 1;
      probe.add(0, 0, 1.0);
      AnnealParams p = cfg.anneal;
      p.n_restarts = 1;
      p.n_sweeps = 1;
      cfg.remote(probe, p);
    } catch (const Error& e) {
      return detail::fail(kSolverFailure, std::string("sampler probe failed: ") + e.what(), err);
    }
  }

  TrajectoryLog log;
  try {
    log = run_closed_loop(sc, a.days, cfg);
  } catch (const Error& e) {
    return detail::fail(kSolverFailure, e.what(), err);
  }

  const auto summary = log.summary(sc);
  const std::string traj = trajectory_csv(sc, log);
  try {
    write_file_atomic(a.out_dir / "trajectory.csv", traj);
    write_file_atomic(a.out_dir / "summary.json", summary_json(summary).dump(2) + "\n");
    write_file_atomic(a.out_dir / "stages.csv", stages_csv(log));
    write_file_atomic(a.out_dir / "commitments.csv", commitments_csv(log));
    for (const auto& [name, body] : plot_tables(sc, log)) write_file_atomic(a.out_dir / name, body);
  } catch (const std::exception& e) {
    return detail::fail(kInputError, e.what(), err);
  }

  char line[256];
  std::snprintf(line, sizeof line,
                "%d day(s), %lld steps: unmet %.4g kWh, curtailed %.4g kWh, unit cost %.4g, SOC [%.4f, %.4f], H2 [%.4f, %.4f] kg\n",
                summary.days, static_cast<long long>(summary.steps), summary.unmet_kwh, summary.curtailed_kwh, summary.unit_cost,
                summary.soc_min, summary.soc_max, summary.hydrogen_min, summary.hydrogen_max);
  out << line;
  std::snprintf(line, sizeof line, "fallbacks: day-ahead %d/%d, short-term %d/%d\n", summary.day_ahead_fallbacks, summary.day_ahead_runs,
                summary.short_term_fallbacks, summary.short_term_runs);
  out << line;

  std::istringstream is(traj);
  const auto violations = replay_trajectory(sc, read_trajectory_csv(is, sc.n_households));
  if (!violations.empty()) {
    write_file_atomic(a.out_dir / "violations.csv", violations_csv(violations));
    return detail::fail(kValidationFailure, std::to_string(violations.size()) + " violation(s) in the executed trajectory", err);
  }
  return kOk;
}

inline int cmd_validate(const ValidateArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<Violation> v;
  try {
    const Scenario sc = load_scenario(a.scenario);
    std::ifstream in(a.trajectory);
    if (!in) throw MissingSeries("trajectory file not found: " + a.trajectory.string());
    v = replay_trajectory(sc, read_trajectory_csv(in, sc.n_households));
  } catch (const Error& e) {
    return detail::fail(kInputError, e.what(), err);
  }
  if (v.empty()) {
    out << "trajectory valid\n";
    return kOk;
  }
  const auto path = a.out_dir / "violations.csv";
  write_file_atomic(path, violations_csv(v));
  return detail::fail(kValidationFailure, std::to_string(v.size()) + " violation(s), see " + path.string(), err);
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Scenario base;
  BenchOptions opt;
  try {
    base = a.scenario ? load_scenario(*a.scenario) : default_scenario(1, a.seed, 1);
    base.rng_seed = a.seed;
    base.power_bits = a.power_bits;
    base.battery_bits = a.battery_bits;
    base.slack_bits = a.slack_bits;
    opt.households = detail::parse_range(a.households);
    opt.horizon = a.horizon;
    opt.repeats = a.repeats;
    opt.threads = a.solver.threads;
    opt.brute = a.solvers.find("brute") != std::string::npos;
    opt.anneal = a.solvers.find("anneal") != std::string::npos;
    opt.anneal_params.n_sweeps = a.solver.sweeps;
    opt.anneal_params.n_restarts = a.solver.restarts;
    opt.anneal_params.auto_beta = true;
    opt.anneal_params.validate();
    if (a.horizon < 1) throw ValidationError("horizon", "must be >= 1");
  } catch (const std::exception& e) {
    return detail::fail(kInputError, e.what(), err);
  }

  std::vector<BenchRecord> rows;
  try {
    rows = run_bench(base, opt);
  } catch (const Error& e) {
    return detail::fail(kSolverFailure, e.what(), err);
  }
  for (const auto& r : rows)
    if (!r.note.empty()) err << "note: N=" << r.n_households << ": " << r.note << '\n';
  const auto rep = fit_scaling(rows);
  out << bench_table(rows) << scaling_text(rep);
  try {
    write_file_atomic(a.out_dir / "bench.csv", bench_csv(rows));
    write_file_atomic(a.out_dir / "scaling.txt", scaling_text(rep));
  } catch (const std::exception& e) {
    return detail::fail(kInputError, e.what(), err);
  }
  return kOk;
}

inline int cmd_serve(const ServeArgs& a, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  AnnealParams p;
  p.n_sweeps = a.sweeps;
  p.n_restarts = a.restarts;
  p.auto_beta = true;
  try {
    SamplerServer server(p);
    out << "serving on " << a.host << ':' << a.port << '\n' << std::flush;
    server.run(a.host, a.port);
  } catch (const Error& e) {
    return detail::fail(kInputError, e.what(), err);
  }
  return kOk;
}

inline void add_solver_options(CLI::App* c, SolverArgs& s) {
  c->add_option("--solver", s.solver, "brute | anneal | remote")->check(CLI::IsMember({"brute", "anneal", "remote"}));
  c->add_option("--sweeps", s.sweeps, "anneal sweeps per restart");
  c->add_option("--restarts", s.restarts, "anneal restarts");
  c->add_option("--threads", s.threads, "solver threads");
  c->add_option("--sampler-url", s.sampler_url, "remote sampler base URL (default: HYDROQ_SAMPLER_URL)");
  c->add_option("--timeout", s.timeout, "remote timeout, seconds");
}

inline int main(int argc, char** argv) {
  CLI::App app{"hydroq: two-stage hydrogen/battery scheduling on QUBO samplers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string scenario;
  std::string out_dir = "out";
  std::uint64_t seed = 7;
  app.add_option("--scenario", scenario, "scenario JSON");
  app.add_option("--seed", seed, "solver seed");
  app.add_option("--out-dir", out_dir, "output directory");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "closed-loop simulation");
  run_cmd->add_option("--days", run.days, "days to simulate");
  add_solver_options(run_cmd, run.solver);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "solver scaling over household counts");
  bench_cmd->add_option("--households", bench.households, "range a..b or list a,b,c");
  bench_cmd->add_option("--horizon", bench.horizon, "day-ahead hours");
  bench_cmd->add_option("--solvers", bench.solvers, "comma list of brute, anneal");
  bench_cmd->add_option("--repeats", bench.repeats, "timing repeats (fastest kept)");
  bench_cmd->add_option("--power-bits", bench.power_bits);
  bench_cmd->add_option("--battery-bits", bench.battery_bits);
  bench_cmd->add_option("--slack-bits", bench.slack_bits);
  add_solver_options(bench_cmd, bench.solver);

  ValidateArgs val;
  std::string trajectory;
  auto* val_cmd = app.add_subcommand("validate", "replay a trajectory CSV against the plant");
  val_cmd->add_option("trajectory", trajectory, "trajectory CSV")->required();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP sampler backed by the local annealer");
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--sweeps", serve.sweeps);
  serve_cmd->add_option("--restarts", serve.restarts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  auto need_scenario = [&](const char* cmd) {
    if (scenario.empty()) std::cerr << "error: " << cmd << " needs --scenario\n";
    return !scenario.empty();
  };
  if (*run_cmd) {
    if (!need_scenario("run")) return kInputError;
    run.scenario = scenario;
    run.out_dir = out_dir;
    run.seed = seed;
    return cmd_run(run);
  }
  if (*bench_cmd) {
    if (!scenario.empty()) bench.scenario = scenario;
    bench.out_dir = out_dir;
    bench.seed = seed;
    return cmd_bench(bench);
  }
  if (*val_cmd) {
    if (!need_scenario("validate")) return kInputError;
    val.scenario = scenario;
    val.trajectory = trajectory;
    val.out_dir = out_dir;
    return cmd_validate(val);
  }
  return cmd_serve(serve);
}

} // namespace hydroq::cli
