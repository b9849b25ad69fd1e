#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hydroq/error.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/rng.hpp"
#include "hydroq/stage_models.hpp"

namespace hydroq {

enum class Schedule : std::uint8_t { Geometric, Linear };

struct AnnealParams {
  int n_sweeps = 1000;
  int n_restarts = 50;
  double beta_initial = 0.1;
  double beta_final = 10.0;
  Schedule schedule = Schedule::Geometric;
  std::uint64_t seed = 0;
  /// Derive the beta range from the model's coefficient scale instead of
  /// the fields above: beta_initial = ln 2 / dE_max, beta_final = ln 100 / dE_min.
  bool auto_beta = false;
  int threads = 1;
  bool record_trace = false;

  void validate() const {
    if (n_sweeps < 1) throw ValidationError("n_sweeps", "must be >= 1");
    if (n_restarts < 1) throw ValidationError("n_restarts", "must be >= 1");
    if (!auto_beta && !(beta_initial > 0 && beta_initial < beta_final))
      throw ValidationError("beta_initial", "need 0 < beta_initial < beta_final");
  }
};

struct Sample {
  std::vector<std::uint8_t> assignment;
  double energy = 0;
  bool feasible = true;
  std::vector<ConstraintId> violations;
};

struct SampleSet {
  std::vector<Sample> samples;
  std::string solver_name;
  std::chrono::duration<double> wall_time{0};
  int best_index = -1;
  /// Best-so-far energy after each sweep, one row per restart (anneal with
  /// record_trace only).
  std::vector<std::vector<double>> traces;

  /// Minimum-energy feasible sample if any, else minimum-energy overall.
  void select_best() {
    best_index = -1;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (best_index < 0) {
        best_index = static_cast<int>(k);
        continue;
      }
      const auto& a = samples[k];
      const auto& b = samples[static_cast<std::size_t>(best_index)];
      if (a.feasible != b.feasible ? a.feasible : a.energy < b.energy) best_index = static_cast<int>(k);
    }
  }

  const Sample& best() const { return samples.at(static_cast<std::size_t>(best_index)); }
};

inline constexpr int kBruteForceCap = 26;

namespace detail {

struct Adjacency {
  std::vector<double> diag;
  std::vector<std::vector<std::pair<int, double>>> nbr;
};

inline Adjacency qubo_adjacency(const QuboModel& q) {
  Adjacency a;
  a.diag.assign(static_cast<std::size_t>(q.n), 0.0);
  a.nbr.resize(static_cast<std::size_t>(q.n));
  for (const auto& [ij, v] : q.coefficients) {
    if (ij.first == ij.second) {
      a.diag[static_cast<std::size_t>(ij.first)] += v;
    } else {
      a.nbr[static_cast<std::size_t>(ij.first)].emplace_back(ij.second, v);
      a.nbr[static_cast<std::size_t>(ij.second)].emplace_back(ij.first, v);
    }
  }
  return a;
}

struct BruteChunk {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> ties; // assignment codes in enumeration order
};

inline constexpr double kTieTol = 1e-9;
inline constexpr std::size_t kMaxTies = 1024;

inline void brute_block_range(const QuboModel& q, const Adjacency& adj, int low_bits, std::uint64_t p_begin, std::uint64_t p_end,
                              BruteChunk& out) {
  const std::size_t n = static_cast<std::size_t>(q.n);
  std::vector<std::uint8_t> x(n);
  std::vector<double> field(n);
  auto record = [&](double e, std::uint64_t code) {
    if (e < out.best - kTieTol) {
      out.best = e;
      out.ties.assign(1, code);
    } else if (e <= out.best + kTieTol) {
      if (e < out.best) out.best = e;
      if (out.ties.size() < kMaxTies) out.ties.push_back(code);
    }
  };
  for (std::uint64_t p = p_begin; p < p_end; ++p) {
    // Exact state at the block start: low bits zero, high bits = p.
    std::uint64_t code = p << low_bits;
    for (std::size_t i = 0; i < n; ++i) x[i] = (code >> i) & 1u;
    double e = energy(q, x);
    for (std::size_t i = 0; i < n; ++i) {
      double f = adj.diag[i];
      for (const auto& [j, v] : adj.nbr[i]) f += x[static_cast<std::size_t>(j)] ? v : 0.0;
      field[i] = f;
    }
    record(e, code);
    const std::uint64_t count = std::uint64_t{1} << low_bits;
    for (std::uint64_t k = 1; k < count; ++k) {
      const int i = std::countr_zero(k); // Gray code: flip bit i
      const auto iu = static_cast<std::size_t>(i);
      const double sign = x[iu] ? -1.0 : 1.0;
      e += sign * field[iu];
      x[iu] ^= 1u;
      code ^= std::uint64_t{1} << i;
      for (const auto& [j, v] : adj.nbr[iu]) field[static_cast<std::size_t>(j)] += sign * v;
      record(e, code);
    }
  }
}

inline std::vector<std::uint8_t> decode_code(std::uint64_t code, int n) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (code >> i) & 1u;
  return x;
}

} // namespace detail

/// Exhaustive minimum of a QUBO with up to 26 variables. Returns every
/// assignment within 1e-9 of the minimum (at most 1024, in enumeration
/// order). `threads` splits the enumeration by its high bits.
inline SampleSet brute_force(const QuboModel& q, int threads = 1) {
  if (q.n > kBruteForceCap) throw TooLarge(std::to_string(q.n) + " variables exceed the exhaustive cap of " + std::to_string(kBruteForceCap));
  const auto t0 = std::chrono::steady_clock::now();
  const auto adj = detail::qubo_adjacency(q);
  const int low = std::min(q.n, 16);
  const std::uint64_t blocks = std::uint64_t{1} << (q.n - low);
  const auto workers = static_cast<std::uint64_t>(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(threads, 1)), 1, blocks));
  std::vector<detail::BruteChunk> chunks(workers);
  auto run = [&](std::uint64_t w) {
    detail::brute_block_range(q, adj, low, blocks * w / workers, blocks * (w + 1) / workers, chunks[w]);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  SampleSet out;
  out.solver_name = "brute_force";
  std::vector<std::pair<double, std::uint64_t>> cands;
  for (const auto& c : chunks)
    for (auto code : c.ties) cands.emplace_back(energy(q, detail::decode_code(code, q.n)), code);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::min(best, c.first);
  for (const auto& [e, code] : cands) {
    if (e > best + detail::kTieTol || out.samples.size() >= detail::kMaxTies) continue;
    out.samples.push_back({detail::decode_code(code, q.n), e, true, {}});
  }
  out.select_best();
  out.wall_time = std::chrono::steady_clock::now() - t0;
  return out;
}

namespace detail {

struct IsingAdjacency {
  std::vector<std::vector<std::pair<int, double>>> nbr;
};

inline IsingAdjacency ising_adjacency(const IsingModel& m) {
  IsingAdjacency a;
  a.nbr.resize(m.size());
  for (const auto& [ij, v] : m.J) {
    if (v == 0.0) continue;
    a.nbr[static_cast<std::size_t>(ij.first)].emplace_back(ij.second, v);
    a.nbr[static_cast<std::size_t>(ij.second)].emplace_back(ij.first, v);
  }
  return a;
}

inline std::pair<double, double> auto_beta_range(const IsingModel& m, const IsingAdjacency& adj) {
  double max_de = 0, min_de = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double span = std::abs(m.h[i]);
    if (m.h[i] != 0.0) min_de = std::min(min_de, 2 * std::abs(m.h[i]));
    for (const auto& [j, v] : adj.nbr[i]) {
      span += std::abs(v);
      min_de = std::min(min_de, 2 * std::abs(v));
    }
    max_de = std::max(max_de, 2 * span);
  }
  if (max_de == 0.0) return {0.1, 10.0};
  const double hot = std::numbers::ln2 / max_de;
  const double cold = std::log(100.0) / min_de;
  return {hot, std::max(cold, hot * 10)};
}

inline double beta_at(const AnnealParams& p, double b0, double b1, int sweep) {
  if (p.n_sweeps == 1) return b1;
  const double f = static_cast<double>(sweep) / (p.n_sweeps - 1);
  return p.schedule == Schedule::Geometric ? b0 * std::pow(b1 / b0, f) : b0 + (b1 - b0) * f;
}

} // namespace detail

/// Single-spin-flip Metropolis annealing. Each restart starts from random
/// spins drawn from its own seed and returns its best state seen.
inline SampleSet anneal(const IsingModel& m, const AnnealParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = m.size();
  const auto adj = detail::ising_adjacency(m);
  auto [b0, b1] = params.auto_beta ? detail::auto_beta_range(m, adj) : std::pair{params.beta_initial, params.beta_final};

  SampleSet out;
  out.solver_name = "anneal";
  out.samples.resize(static_cast<std::size_t>(params.n_restarts));
  if (params.record_trace) out.traces.resize(static_cast<std::size_t>(params.n_restarts));

  auto chain = [&](int r) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(r)));
    std::vector<std::int8_t> s(n);
    for (auto& v : s) v = (rng() >> 63) ? 1 : -1;
    std::vector<double> field(m.h);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [j, v] : adj.nbr[i]) field[i] += v * s[static_cast<std::size_t>(j)];
    double e = ising_energy(m, s);
    double best_e = e;
    std::vector<std::int8_t> best = s;
    std::vector<double>* trace = params.record_trace ? &out.traces[static_cast<std::size_t>(r)] : nullptr;
    for (int k = 0; k < params.n_sweeps; ++k) {
      const double beta = detail::beta_at(params, b0, b1, k);
      for (std::size_t i = 0; i < n; ++i) {
        const double de = -2.0 * s[i] * field[i];
        if (de > 0 && rng.uniform() >= std::exp(-beta * de)) continue;
        const double ds = -2.0 * s[i];
        s[i] = static_cast<std::int8_t>(-s[i]);
        e += de;
        for (const auto& [j, v] : adj.nbr[i]) field[static_cast<std::size_t>(j)] += v * ds;
        if (e < best_e - 1e-12) {
          best_e = e;
          best = s;
        }
      }
      if (trace) trace->push_back(best_e);
    }
    auto& smp = out.samples[static_cast<std::size_t>(r)];
    smp.assignment = to_bits(best);
    smp.energy = ising_energy(m, best);
  };

  const int workers = std::clamp(params.threads, 1, params.n_restarts);
  if (workers == 1) {
    for (int r = 0; r < params.n_restarts; ++r) chain(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < params.n_restarts; r += workers) chain(r);
      });
    for (auto& t : pool) t.join();
  }
  out.select_best();
  out.wall_time = std::chrono::steady_clock::now() - t0;
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive-penalty solve loop

enum class SolverKind : std::uint8_t { BruteForce, Anneal, Remote };

inline std::string_view to_string(SolverKind k) noexcept {
  switch (k) {
  case SolverKind::BruteForce: return "brute";
  case SolverKind::Anneal: return "anneal";
  case SolverKind::Remote: return "remote";
  }
  return "?";
}

using RemoteSampler = std::function<SampleSet(const QuboModel&, const AnnealParams&)>;

struct SolverConfig {
  SolverKind kind = SolverKind::Anneal;
  AnnealParams anneal{.auto_beta = true};
  int threads = 1;
  int max_rounds = 5;
  AutoPenaltyOptions penalty;
  RemoteSampler remote;
};

/// Solve failure carrying the least-violating sample and its breaches.
class NoFeasibleSample : public Error {
public:
  NoFeasibleSample(std::string what, std::vector<std::uint8_t> assignment, std::vector<Violation> diagnostics, int rounds)
      : Error(std::move(what)), assignment_(std::move(assignment)), diagnostics_(std::move(diagnostics)), rounds_(rounds) {}
  const std::vector<std::uint8_t>& assignment() const noexcept { return assignment_; }
  const std::vector<Violation>& diagnostics() const noexcept { return diagnostics_; }
  int rounds() const noexcept { return rounds_; }

private:
  std::vector<std::uint8_t> assignment_;
  std::vector<Violation> diagnostics_;
  int rounds_;
};

struct SolveResult {
  std::vector<std::uint8_t> assignment;
  SampleSet samples;
  int rounds = 0;
  PenaltyWeights penalties;
};

inline SampleSet sample_qubo(const QuboModel& q, const SolverConfig& cfg) {
  switch (cfg.kind) {
  case SolverKind::BruteForce: return brute_force(q, cfg.threads);
  case SolverKind::Anneal: {
    AnnealParams p = cfg.anneal;
    p.threads = cfg.threads;
    SampleSet s = anneal(to_ising(q), p);
    for (auto& smp : s.samples) smp.energy = energy(q, smp.assignment);
    s.select_best();
    return s;
  }
  case SolverKind::Remote:
    if (!cfg.remote) throw RemoteUnavailable("no remote sampler configured");
    return cfg.remote(q, cfg.anneal);
  }
  throw Error("unknown solver");
}

/// Compiles with automatic penalties, samples, and validates each sample's
/// decoded plan. When nothing is feasible the penalties of the families
/// violated by the lowest-energy sample are doubled and the model is
/// recompiled, up to `max_rounds` rounds.
inline SolveResult solve(const ConstrainedModel& model, const SolverConfig& cfg, const PlanValidator& validator = {}) {
  const PlanValidator check = validator ? validator : model_validator(model);
  SolveResult res;
  res.penalties = auto_penalty(model, cfg.penalty);
  std::vector<std::uint8_t> least;
  std::vector<Violation> least_diag;
  double least_score = std::numeric_limits<double>::infinity();

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    res.rounds = round;
    const QuboModel q = compile(model, res.penalties);
    SampleSet ss = sample_qubo(q, cfg);
    std::vector<std::vector<Violation>> diag(ss.samples.size());
    for (std::size_t k = 0; k < ss.samples.size(); ++k) {
      auto& smp = ss.samples[k];
      diag[k] = check(smp.assignment);
      smp.feasible = diag[k].empty();
      smp.violations.clear();
      for (const auto& v : diag[k])
        if (std::find(smp.violations.begin(), smp.violations.end(), v.constraint_id) == smp.violations.end())
          smp.violations.push_back(v.constraint_id);
      double score = 0;
      for (const auto& v : diag[k]) score += 1.0 + v.magnitude;
      if (score < least_score) {
        least_score = score;
        least = smp.assignment;
        least_diag = diag[k];
      }
    }
    ss.select_best();
    if (ss.best_index >= 0 && ss.best().feasible) {
      res.assignment = ss.best().assignment;
      res.samples = std::move(ss);
      return res;
    }
    if (ss.best_index < 0) break;
    std::set<ConstraintId> violated(ss.best().violations.begin(), ss.best().violations.end());
    bool unmatched = false;
    for (auto id : violated) {
      auto it = res.penalties.find(id);
      if (it != res.penalties.end()) it->second *= 2;
      else unmatched = true;
    }
    if (unmatched && violated.size() == 1) // plant-level breach with no model family
      for (auto& [fam, w] : res.penalties) w *= 2;
  }
  std::string what = "no feasible sample after " + std::to_string(res.rounds) + " rounds; violated:";
  std::set<ConstraintId> fams;
  for (const auto& v : least_diag) fams.insert(v.constraint_id);
  for (auto id : fams) what += std::string(" ") + std::string(to_string(id));
  throw NoFeasibleSample(what, least, least_diag, res.rounds);
}

} // namespace hydroq
