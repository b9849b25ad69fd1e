#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace hydroq {

/// Affine expression over binary variables: constant + sum(coef * x_var).
struct LinExpr {
  double constant = 0;
  std::vector<std::pair<int, double>> terms;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}

  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coef);
    return e;
  }

  LinExpr& add(int index, double coef) {
    terms.emplace_back(index, coef);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& o) {
    constant += o.constant;
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
  LinExpr& operator*=(double s) {
    constant *= s;
    for (auto& t : terms) t.second *= s;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a += b * -1.0; }

  /// Sorts by variable, merges duplicates and drops exact zeros.
  LinExpr& normalize() {
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> merged;
    for (const auto& t : terms) {
      if (!merged.empty() && merged.back().first == t.first) merged.back().second += t.second;
      else merged.push_back(t);
    }
    std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
    terms = std::move(merged);
    return *this;
  }

  double eval(std::span<const std::uint8_t> x) const {
    double v = constant;
    for (const auto& [i, c] : terms) v += x[static_cast<std::size_t>(i)] ? c : 0.0;
    return v;
  }

  double min_over_box() const {
    double v = constant;
    for (const auto& t : terms) v += std::min(t.second, 0.0);
    return v;
  }
  double max_over_box() const {
    double v = constant;
    for (const auto& t : terms) v += std::max(t.second, 0.0);
    return v;
  }
};

/// Quadratic pseudo-boolean polynomial. x_i^2 = x_i is folded into the
/// linear part, so `quad` only holds pairs i < j.
struct QuadExpr {
  double constant = 0;
  std::map<int, double> linear;
  std::map<std::pair<int, int>, double> quad;

  void add_linear(int i, double c) {
    if (c != 0.0) linear[i] += c;
  }
  void add_pair(int i, int j, double c) {
    if (c == 0.0) return;
    if (i == j) return add_linear(i, c);
    if (i > j) std::swap(i, j);
    quad[{i, j}] += c;
  }
  void add(const LinExpr& e, double w = 1.0) {
    constant += w * e.constant;
    for (const auto& [i, c] : e.terms) add_linear(i, w * c);
  }
  /// w * a * b
  void add_product(const LinExpr& a, const LinExpr& b, double w = 1.0) {
    constant += w * a.constant * b.constant;
    for (const auto& [i, c] : a.terms) add_linear(i, w * c * b.constant);
    for (const auto& [j, c] : b.terms) add_linear(j, w * c * a.constant);
    for (const auto& [i, ci] : a.terms)
      for (const auto& [j, cj] : b.terms) add_pair(i, j, w * ci * cj);
  }
  /// w * e^2, with `e` assumed normalized (distinct variables).
  void add_square(const LinExpr& e, double w = 1.0) {
    constant += w * e.constant * e.constant;
    for (std::size_t a = 0; a < e.terms.size(); ++a) {
      const auto [i, ci] = e.terms[a];
      add_linear(i, w * (ci * ci + 2.0 * e.constant * ci));
      for (std::size_t b = a + 1; b < e.terms.size(); ++b) add_pair(i, e.terms[b].first, 2.0 * w * ci * e.terms[b].second);
    }
  }
  QuadExpr& operator+=(const QuadExpr& o) {
    constant += o.constant;
    for (const auto& [i, c] : o.linear) add_linear(i, c);
    for (const auto& [ij, c] : o.quad) add_pair(ij.first, ij.second, c);
    return *this;
  }

  double eval(std::span<const std::uint8_t> x) const {
    double v = constant;
    for (const auto& [i, c] : linear)
      if (x[static_cast<std::size_t>(i)]) v += c;
    for (const auto& [ij, c] : quad)
      if (x[static_cast<std::size_t>(ij.first)] && x[static_cast<std::size_t>(ij.second)]) v += c;
    return v;
  }

  /// Width of the value range over the unit box, bounded by the sum of
  /// absolute non-constant coefficients.
  double range_bound() const {
    double r = 0;
    for (const auto& [i, c] : linear) r += std::abs(c);
    for (const auto& [ij, c] : quad) r += std::abs(c);
    return r;
  }
};

} // namespace hydroq
