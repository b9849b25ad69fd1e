#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hydroq/error.hpp"
#include "hydroq/expr.hpp"
#include "hydroq/stage_models.hpp"

namespace hydroq {

using PenaltyWeights = std::map<ConstraintId, double>;

/// Upper-triangular QUBO: E(x) = sum_{i<=j} Q_ij x_i x_j + offset.
struct QuboModel {
  int n = 0;
  std::map<std::pair<int, int>, double> coefficients;
  double offset = 0;
  std::vector<VariableId> registry;
  PenaltyWeights penalty_weights;

  void add(int i, int j, double v) {
    if (v == 0.0) return;
    if (i > j) std::swap(i, j);
    coefficients[{i, j}] += v;
  }

  bool operator==(const QuboModel&) const = default;
};

/// E(s) = sum h_i s_i + sum_{i<j} J_ij s_i s_j + offset, s in {-1, +1}.
struct IsingModel {
  std::vector<double> h;
  std::map<std::pair<int, int>, double> J;
  double offset = 0;

  std::size_t size() const noexcept { return h.size(); }
};

inline constexpr double kMaxCoefficient = 1e12;

inline double energy(const QuboModel& q, std::span<const std::uint8_t> x) {
  if (x.size() != static_cast<std::size_t>(q.n))
    throw LengthMismatch("assignment length " + std::to_string(x.size()) + " != " + std::to_string(q.n));
  double e = q.offset;
  for (const auto& [ij, v] : q.coefficients)
    if (x[static_cast<std::size_t>(ij.first)] && x[static_cast<std::size_t>(ij.second)]) e += v;
  return e;
}

inline double ising_energy(const IsingModel& m, std::span<const std::int8_t> s) {
  if (s.size() != m.h.size()) throw LengthMismatch("spin vector length " + std::to_string(s.size()) + " != " + std::to_string(m.h.size()));
  double e = m.offset;
  for (std::size_t i = 0; i < s.size(); ++i) e += m.h[i] * s[i];
  for (const auto& [ij, v] : m.J) e += v * s[static_cast<std::size_t>(ij.first)] * s[static_cast<std::size_t>(ij.second)];
  return e;
}

inline std::vector<std::int8_t> to_spins(std::span<const std::uint8_t> x) {
  std::vector<std::int8_t> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? 1 : -1;
  return s;
}

inline std::vector<std::uint8_t> to_bits(std::span<const std::int8_t> s) {
  std::vector<std::uint8_t> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s[i] > 0;
  return x;
}

/// Substitutes x = (1 + s) / 2.
inline IsingModel to_ising(const QuboModel& q) {
  IsingModel m;
  m.h.assign(static_cast<std::size_t>(q.n), 0.0);
  m.offset = q.offset;
  for (const auto& [ij, v] : q.coefficients) {
    const auto [i, j] = ij;
    if (i == j) {
      m.h[static_cast<std::size_t>(i)] += v / 2;
      m.offset += v / 2;
    } else {
      m.J[{i, j}] += v / 4;
      m.h[static_cast<std::size_t>(i)] += v / 4;
      m.h[static_cast<std::size_t>(j)] += v / 4;
      m.offset += v / 4;
    }
  }
  return m;
}

/// Substitutes s = 2x - 1; inverse of to_ising.
inline QuboModel from_ising(const IsingModel& m) {
  QuboModel q;
  q.n = static_cast<int>(m.h.size());
  q.offset = m.offset;
  for (std::size_t i = 0; i < m.h.size(); ++i) {
    q.add(static_cast<int>(i), static_cast<int>(i), 2 * m.h[i]);
    q.offset -= m.h[i];
  }
  for (const auto& [ij, v] : m.J) {
    q.add(ij.first, ij.second, 4 * v);
    q.add(ij.first, ij.first, -2 * v);
    q.add(ij.second, ij.second, -2 * v);
    q.offset += v;
  }
  return q;
}

namespace detail {

inline LinExpr literal_expr(const Literal& l) { return l.value ? LinExpr::var(l.var) : LinExpr(1.0) - LinExpr::var(l.var); }

inline QuboModel from_quad(const QuadExpr& e, int n) {
  QuboModel q;
  q.n = n;
  q.offset = e.constant;
  for (const auto& [i, c] : e.linear) q.add(i, i, c);
  for (const auto& [ij, c] : e.quad) q.add(ij.first, ij.second, c);
  std::erase_if(q.coefficients, [](const auto& kv) { return kv.second == 0.0; });
  return q;
}

} // namespace detail

/// Objective plus sum over constraints of weight * residual^2 (linear) or
/// weight * triggered conflicts (conflict groups).
inline QuboModel compile(const ConstrainedModel& model, const PenaltyWeights& penalties) {
  QuadExpr e = model.objective;
  for (const auto& c : model.constraints) {
    const auto it = penalties.find(c.id);
    if (it == penalties.end()) throw MissingPenalty(std::string("no penalty weight for ") + std::string(to_string(c.id)));
    const double w = it->second;
    if (!(w > 0)) throw MissingPenalty(std::string("non-positive penalty weight for ") + std::string(to_string(c.id)));
    if (c.kind == Constraint::Kind::Linear) {
      LinExpr r = c.residual;
      r.normalize();
      e.add_square(r, w);
      continue;
    }
    for (const auto& conj : c.conflicts) {
      if (conj.size() == 1) e.add(detail::literal_expr(conj[0]), w);
      else e.add_product(detail::literal_expr(conj[0]), detail::literal_expr(conj[1]), w);
    }
  }
  QuboModel q = detail::from_quad(e, static_cast<int>(model.size()));
  q.registry = model.variables;
  q.penalty_weights = penalties;
  for (const auto& [ij, v] : q.coefficients)
    if (std::abs(v) > kMaxCoefficient)
      throw Overflow("QUBO coefficient " + std::to_string(v) + " at (" + std::to_string(ij.first) + "," + std::to_string(ij.second) + ")");
  return q;
}

struct AutoPenaltyOptions {
  double kappa = 2.0;
  double floor = 1.0;
  std::size_t exact_support = 20; // enumerate violations up to this many variables
  double min_residual = 1e-3;
};

namespace detail {

/// Smallest nonzero violation a constraint's decision variables can produce
/// (slack excluded). Infeasible decisions pay at least this residual.
inline double min_violation(const Constraint& c, const AutoPenaltyOptions& opt) {
  if (c.kind == Constraint::Kind::Conflicts) return 1.0;
  LinExpr e = c.expr;
  e.normalize();
  bool integral = is_integral(e.constant) && (std::isinf(c.lo) || is_integral(c.lo)) && (std::isinf(c.hi) || is_integral(c.hi));
  for (const auto& t : e.terms) integral = integral && is_integral(t.second);
  if (integral) return 1.0;
  if (e.terms.size() > opt.exact_support) return opt.min_residual;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t k = e.terms.size();
  for (std::uint32_t a = 0; a < (1u << k); ++a) {
    double v = e.constant;
    for (std::size_t j = 0; j < k; ++j)
      if ((a >> j) & 1u) v += e.terms[j].second;
    const double d = v < c.lo ? c.lo - v : v > c.hi ? v - c.hi : 0.0;
    if (d > 1e-9) best = std::min(best, d);
  }
  return std::max(best, opt.min_residual);
}

} // namespace detail

/// Per-family weight max(floor, kappa * W / r_min^2), where W bounds the
/// objective's range over the box and r_min is the smallest violation the
/// family's decisions can produce (capped at one).
inline PenaltyWeights auto_penalty(const ConstrainedModel& model, const AutoPenaltyOptions& opt = {}) {
  const double W = model.objective.range_bound();
  PenaltyWeights w;
  for (const auto& c : model.constraints) {
    const double r = std::min(1.0, detail::min_violation(c, opt));
    const double v = std::max(opt.floor, opt.kappa * W / (r * r));
    auto [it, inserted] = w.emplace(c.id, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Text format: "n offset" then one "i j value" line per coefficient.

inline void write_qubo_text(std::ostream& os, const QuboModel& q) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d %.17g\n", q.n, q.offset);
  os << buf;
  for (const auto& [ij, v] : q.coefficients) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", ij.first, ij.second, v);
    os << buf;
  }
}

inline std::string qubo_to_text(const QuboModel& q) {
  std::ostringstream os;
  write_qubo_text(os, q);
  return os.str();
}

inline QuboModel read_qubo_text(std::istream& is) {
  QuboModel q;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (!header) {
      if (!(ls >> q.n >> q.offset) || q.n < 0) throw ParseError("line " + std::to_string(lineno) + ": expected 'n offset'");
      header = true;
      continue;
    }
    int i, j;
    double v;
    if (!(ls >> i >> j >> v)) throw ParseError("line " + std::to_string(lineno) + ": expected 'i j value'");
    if (i < 0 || j < 0 || i >= q.n || j >= q.n) throw ParseError("line " + std::to_string(lineno) + ": index out of range");
    q.add(i, j, v);
  }
  if (!header) throw ParseError("empty QUBO text");
  return q;
}

inline QuboModel qubo_from_text(const std::string& s) {
  std::istringstream is(s);
  return read_qubo_text(is);
}

} // namespace hydroq
