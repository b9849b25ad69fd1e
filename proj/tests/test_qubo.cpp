#include <gtest/gtest.h>

#include <random>

#include "hydroq/qubo.hpp"
#include "support.hpp"

using namespace hydroq;

namespace {

QuboModel random_qubo(std::mt19937_64& g, int n) {
  std::uniform_real_distribution<double> u(-5, 5);
  QuboModel q;
  q.n = n;
  q.offset = u(g);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (g() % 3) q.add(i, j, u(g));
  return q;
}

std::vector<std::uint8_t> bits_of(std::uint64_t a, int n) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (a >> i) & 1u;
  return x;
}

} // namespace

TEST(Energy, HandEvaluation) {
  QuboModel q;
  q.n = 2;
  q.add(0, 0, 1);
  q.add(0, 1, 2);
  q.add(1, 1, 3);
  EXPECT_EQ(energy(q, std::vector<std::uint8_t>{1, 1}), 6.0);
  EXPECT_EQ(energy(q, std::vector<std::uint8_t>{0, 0}), 0.0);
}

TEST(Energy, ZeroVectorGivesOffset) {
  std::mt19937_64 g(1);
  const auto q = random_qubo(g, 6);
  EXPECT_EQ(energy(q, std::vector<std::uint8_t>(6, 0)), q.offset);
}

TEST(Energy, LengthMismatch) {
  QuboModel q;
  q.n = 3;
  EXPECT_THROW(energy(q, std::vector<std::uint8_t>{1}), LengthMismatch);
  EXPECT_THROW(ising_energy(to_ising(q), std::vector<std::int8_t>{1}), LengthMismatch);
}

TEST(Energy, InsertionOrderIrrelevant) {
  QuboModel a, b;
  a.n = b.n = 3;
  a.add(0, 1, 1.5);
  a.add(2, 2, -1);
  a.add(1, 2, 0.25);
  b.add(2, 1, 0.25);
  b.add(2, 2, -1);
  b.add(1, 0, 1.5);
  EXPECT_EQ(a, b);
}

TEST(ToIsing, SingleVariable) {
  QuboModel q;
  q.n = 1;
  q.add(0, 0, 3);
  const auto m = to_ising(q);
  EXPECT_DOUBLE_EQ(m.h[0], 1.5);
  EXPECT_DOUBLE_EQ(m.offset, 1.5);
  EXPECT_DOUBLE_EQ(ising_energy(m, std::vector<std::int8_t>{-1}), 0.0);
  EXPECT_DOUBLE_EQ(ising_energy(m, std::vector<std::int8_t>{1}), 3.0);
}

TEST(ToIsing, ZeroModel) {
  QuboModel q;
  q.n = 4;
  const auto m = to_ising(q);
  EXPECT_TRUE(m.J.empty());
  EXPECT_EQ(m.offset, 0.0);
  for (double h : m.h) EXPECT_EQ(h, 0.0);
}

TEST(ToIsing, ExhaustiveEquivalence) {
  std::mt19937_64 g(10);
  const auto q = random_qubo(g, 10);
  const auto m = to_ising(q);
  double worst = 0;
  for (std::uint64_t a = 0; a < 1024; ++a) {
    const auto x = bits_of(a, 10);
    worst = std::max(worst, std::abs(energy(q, x) - ising_energy(m, to_spins(x))));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(ToIsing, RoundTripRecoversCoefficients) {
  QuboModel q;
  q.n = 3;
  q.offset = 0.5;
  q.add(0, 0, 2);
  q.add(0, 2, -4);
  q.add(1, 2, 8);
  q.add(1, 1, -1);
  const auto back = from_ising(to_ising(q));
  EXPECT_EQ(back.offset, q.offset);
  for (const auto& [ij, v] : q.coefficients) EXPECT_EQ(back.coefficients.at(ij), v);
}

TEST(Spins, Conversion) {
  const std::vector<std::uint8_t> x{0, 1, 1, 0};
  EXPECT_EQ(to_spins(x), (std::vector<std::int8_t>{-1, 1, 1, -1}));
  EXPECT_EQ(to_bits(to_spins(x)), x);
}

namespace {

/// Model with one one-hot triple and an optional linear objective.
ConstrainedModel one_hot_model(double objective_scale = 0.0) {
  ConstrainedModel m;
  for (int k = 0; k < 3; ++k) {
    VariableId id{Stage::DayAhead, 0, 0, static_cast<Role>(k), 0};
    m.index[id] = k;
    m.variables.push_back(id);
  }
  Constraint c;
  c.id = ConstraintId::OneHot;
  c.household = 0;
  c.expr = LinExpr::var(0) + LinExpr::var(1) + LinExpr::var(2);
  c.lo = c.hi = 1;
  c.residual = c.expr - LinExpr(1.0);
  m.constraints.push_back(c);
  if (objective_scale != 0.0) {
    m.objective.add(LinExpr::var(0, 4.0 * objective_scale));
    m.objective.add(LinExpr::var(1, 6.0 * objective_scale));
  }
  return m;
}

} // namespace

TEST(Compile, OneHotExpansion) {
  const auto q = compile(one_hot_model(), {{ConstraintId::OneHot, 2.0}});
  EXPECT_DOUBLE_EQ(q.offset, 2.0);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(q.coefficients.at({i, i}), -2.0);
  EXPECT_DOUBLE_EQ(q.coefficients.at({0, 1}), 4.0);
  EXPECT_DOUBLE_EQ(q.coefficients.at({0, 2}), 4.0);
  EXPECT_DOUBLE_EQ(q.coefficients.at({1, 2}), 4.0);
  for (std::uint64_t a = 0; a < 8; ++a) {
    const auto x = bits_of(a, 3);
    const int ones = x[0] + x[1] + x[2];
    EXPECT_DOUBLE_EQ(energy(q, x), 2.0 * (ones - 1) * (ones - 1));
  }
}

TEST(Compile, EmptyConstraintSetIsBareObjective) {
  ConstrainedModel m = one_hot_model(1.0);
  m.constraints.clear();
  const auto q = compile(m, {});
  for (std::uint64_t a = 0; a < 8; ++a) {
    const auto x = bits_of(a, 3);
    EXPECT_DOUBLE_EQ(energy(q, x), m.objective_value(x));
  }
}

TEST(Compile, MissingPenalty) { EXPECT_THROW(compile(one_hot_model(), {}), MissingPenalty); }

TEST(Compile, OverflowOnHugeWeights) { EXPECT_THROW(compile(one_hot_model(), {{ConstraintId::OneHot, 1e13}}), Overflow); }

TEST(Compile, Deterministic) {
  const auto sc = fixtures::tiny_scenario();
  const auto m = fixtures::tiny_day_ahead(sc);
  const auto w = auto_penalty(m);
  EXPECT_EQ(compile(m, w), compile(m, w));
}

TEST(Compile, FeasibleEncodingCostsObjectiveOnly) {
  const auto sc = fixtures::tiny_scenario();
  const auto m = fixtures::tiny_day_ahead(sc);
  const auto q = compile(m, auto_penalty(m));
  const auto sched = detail::hold_schedule(initial_state(sc), 3);
  DispatchPlan plan;
  plan.slots_per_step = kSlotsPerHour;
  plan.steps.assign(3, std::vector<HouseholdDispatch>(1));
  for (auto& row : plan.steps) settle_balance(row[0], m.layout.forecast.steps[0], 0);
  const auto x = encode_day_ahead(sched, plan, m);
  ASSERT_TRUE(m.penalty_feasible(x));
  EXPECT_NEAR(energy(q, x), m.objective_value(x), 1e-9 * std::max(1.0, std::abs(m.objective_value(x))));
}

TEST(AutoPenalty, DominatesObjectiveRange) {
  // objective 4 x0 + 6 x1 ranges over [0, 10]
  const auto w = auto_penalty(one_hot_model(1.0));
  EXPECT_GE(w.at(ConstraintId::OneHot), 20.0);
}

TEST(AutoPenalty, FloorOnZeroObjective) { EXPECT_EQ(auto_penalty(one_hot_model()).at(ConstraintId::OneHot), 1.0); }

TEST(AutoPenalty, Homogeneous) {
  const auto a = auto_penalty(one_hot_model(1.0)).at(ConstraintId::OneHot);
  const auto b = auto_penalty(one_hot_model(2.0)).at(ConstraintId::OneHot);
  EXPECT_DOUBLE_EQ(b, 2 * a);
}

TEST(AutoPenalty, CoversEveryFamily) {
  const auto sc = fixtures::tiny_scenario();
  const auto m = fixtures::tiny_day_ahead(sc);
  const auto w = auto_penalty(m);
  for (const auto& c : m.constraints) EXPECT_TRUE(w.contains(c.id)) << to_string(c.id);
}

TEST(TextFormat, RoundTripIsExact) {
  std::mt19937_64 g(3);
  auto q = random_qubo(g, 7);
  const auto back = qubo_from_text(qubo_to_text(q));
  EXPECT_EQ(back.n, q.n);
  EXPECT_EQ(back.offset, q.offset);
  EXPECT_EQ(back.coefficients, q.coefficients);
}

TEST(TextFormat, Errors) {
  EXPECT_THROW(qubo_from_text(""), ParseError);
  EXPECT_THROW(qubo_from_text("2 0\n0 5 1\n"), ParseError);
  EXPECT_THROW(qubo_from_text("2 0\n0 x\n"), ParseError);
}
