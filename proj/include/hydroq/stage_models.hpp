#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hydroq/error.hpp"
#include "hydroq/expr.hpp"
#include "hydroq/plant.hpp"
#include "hydroq/scenario.hpp"

namespace hydroq {

enum class Stage : std::uint8_t { DayAhead, ShortTerm };

inline constexpr std::string_view to_string(Stage s) noexcept { return s == Stage::DayAhead ? "day_ahead" : "short_term"; }

enum class Role : std::uint8_t {
  FcOn,
  FcStandby,
  FcOff,
  ElOn,
  ElStandby,
  ElOff,
  FcPowerBit,
  ElPowerBit,
  BattChargeBit,
  BattDischargeBit,
  FcDevUpBit,
  FcDevDownBit,
  ElDevUpBit,
  ElDevDownBit,
  SlackBit,
};

inline constexpr std::string_view to_string(Role r) noexcept {
  switch (r) {
  case Role::FcOn: return "fc_on";
  case Role::FcStandby: return "fc_standby";
  case Role::FcOff: return "fc_off";
  case Role::ElOn: return "el_on";
  case Role::ElStandby: return "el_standby";
  case Role::ElOff: return "el_off";
  case Role::FcPowerBit: return "fc_power";
  case Role::ElPowerBit: return "el_power";
  case Role::BattChargeBit: return "batt_charge";
  case Role::BattDischargeBit: return "batt_discharge";
  case Role::FcDevUpBit: return "fc_dev_up";
  case Role::FcDevDownBit: return "fc_dev_down";
  case Role::ElDevUpBit: return "el_dev_up";
  case Role::ElDevDownBit: return "el_dev_down";
  case Role::SlackBit: return "slack";
  }
  return "?";
}

/// Identity of one binary decision. Slack bits additionally carry the family
/// and ordinal of the constraint they belong to.
struct VariableId {
  Stage stage = Stage::DayAhead;
  int household = 0;
  int time_index = 0; // step within the model horizon
  Role role = Role::FcOn;
  int bit = 0;
  ConstraintId slack_for = ConstraintId::OneHot;
  int slack_index = -1;

  auto operator<=>(const VariableId&) const = default;
};

inline std::string to_string(const VariableId& v) {
  std::ostringstream os;
  os << to_string(v.role);
  if (v.role == Role::SlackBit) {
    os << '[' << to_string(v.slack_for) << '#' << v.slack_index << ",b" << v.bit << ']';
    return os.str();
  }
  os << "[h" << v.household << ",t" << v.time_index;
  if (v.role >= Role::FcPowerBit) os << ",b" << v.bit;
  os << ']';
  return os.str();
}

struct Literal {
  int var;
  bool value;
};

/// One constraint of a stage model.
///
/// Linear constraints hold `lo <= expr <= hi` (lo == hi for equalities);
/// `residual` is the expression the penalty squares: expr minus its anchor
/// bound, with binary-expanded slack bits absorbing the admissible range.
/// Expressions may be rescaled so their smallest coefficient is one; `unit`
/// converts violations back to physical units.
///
/// Conflict constraints list conjunctions of one or two literals that must
/// never hold together; their penalty is the number of triggered conflicts.
struct Constraint {
  enum class Kind : std::uint8_t { Linear, Conflicts };

  ConstraintId id = ConstraintId::OneHot;
  int household = kShared;
  std::int64_t time_index = 0; // absolute slot
  Kind kind = Kind::Linear;
  LinExpr expr;
  double lo = 0, hi = 0, unit = 1;
  LinExpr residual;
  std::vector<int> slack_vars;
  std::vector<std::vector<Literal>> conflicts;

  static bool holds(const std::vector<Literal>& c, std::span<const std::uint8_t> x) {
    for (const auto& l : c)
      if ((x[static_cast<std::size_t>(l.var)] != 0) != l.value) return false;
    return true;
  }

  /// Distance outside [lo, hi] in physical units, or the conflict count.
  double violation(std::span<const std::uint8_t> x) const {
    if (kind == Kind::Conflicts) {
      double n = 0;
      for (const auto& c : conflicts) n += holds(c, x) ? 1.0 : 0.0;
      return n;
    }
    const double v = expr.eval(x);
    constexpr double tol = 1e-9;
    if (v < lo - tol) return (lo - v) * unit;
    if (v > hi + tol) return (v - hi) * unit;
    return 0.0;
  }

  /// Value whose square (linear) or value (conflicts) the penalty charges.
  double penalty_residual(std::span<const std::uint8_t> x) const {
    return kind == Kind::Conflicts ? violation(x) : residual.eval(x);
  }
};

/// Static description of a stage model needed to decode assignments.
struct ModelLayout {
  Stage stage = Stage::DayAhead;
  int n_households = 1;
  int n_steps = 0;
  std::int64_t first_slot = 0;
  int slots_per_step = 1;
  int power_bits = 1;
  int battery_bits = 0;
  DeviceParams device;
  PlantState initial;
  Forecast forecast;
  CommitmentSchedule commitments; // short-term stage only
  std::vector<double> hydrogen_floor; // short-term: tank reserve after each step

  double fc_step() const { return (device.p_fc_max - device.p_fc_min) / ((1 << power_bits) - 1); }
  double el_step() const { return (device.p_el_max - device.p_el_min) / ((1 << power_bits) - 1); }
  double battery_levels() const { return static_cast<double>((1 << battery_bits) - 1); }
  /// Charge and discharge power per level. The discharge grid is the charge
  /// grid scaled by eta_ch * eta_dis, so one level of either moves the SOC by
  /// the same amount and SOC bounds stay integral in level units.
  double charge_step() const {
    return std::min(device.p_ch_max, device.p_dis_max / (device.eta_ch * device.eta_dis)) / battery_levels();
  }
  double discharge_step() const { return charge_step() * device.eta_ch * device.eta_dis; }
  /// SOC change per battery level over one step.
  double soc_quantum() const { return device.eta_ch * charge_step() * slots_per_step * 0.25 / device.batt_capacity; }
};

/// Solver-independent model over binary variables.
struct ConstrainedModel {
  ModelLayout layout;
  std::vector<VariableId> variables;
  std::map<VariableId, int> index;
  std::map<VariableId, bool> fixed; // decisions settled by the initial state
  QuadExpr objective;
  std::vector<Constraint> constraints;

  std::size_t size() const noexcept { return variables.size(); }

  int find(const VariableId& id) const {
    const auto it = index.find(id);
    return it == index.end() ? -1 : it->second;
  }

  /// Value of a decision: free, fixed, or absent (false).
  bool value(const VariableId& id, std::span<const std::uint8_t> x) const {
    if (const int i = find(id); i >= 0) return x[static_cast<std::size_t>(i)] != 0;
    const auto it = fixed.find(id);
    return it != fixed.end() && it->second;
  }

  double objective_value(std::span<const std::uint8_t> x) const { return objective.eval(x); }

  /// Constraint breaches of the decision variables (slack values ignored).
  std::vector<Violation> violations(std::span<const std::uint8_t> x) const {
    if (x.size() != size()) throw LengthMismatch("assignment length " + std::to_string(x.size()) + " != " + std::to_string(size()));
    std::vector<Violation> out;
    for (const auto& c : constraints)
      if (const double v = c.violation(x); v > 0) out.push_back({c.id, c.household, c.time_index, v});
    sort_violations(out);
    return out;
  }

  /// True iff every penalty term vanishes, i.e. the QUBO energy equals the
  /// objective.
  bool penalty_feasible(std::span<const std::uint8_t> x, double tol = 1e-9) const {
    for (const auto& c : constraints)
      if (std::abs(c.penalty_residual(x)) > tol) return false;
    return true;
  }
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-12; }

/// Integral constraints get an exact slack register of up to this many bits.
inline constexpr int kMaxExactSlackBits = 12;

class ModelBuilder {
public:
  ModelBuilder(ConstrainedModel& m, int slack_bits) : m_(m), slack_bits_(slack_bits) {}

  LinExpr var(const VariableId& id) {
    const auto [it, inserted] = m_.index.emplace(id, static_cast<int>(m_.variables.size()));
    if (inserted) m_.variables.push_back(id);
    return LinExpr::var(it->second);
  }

  LinExpr fixed(const VariableId& id, bool v) {
    m_.fixed[id] = v;
    return LinExpr(v ? 1.0 : 0.0);
  }

  /// lo <= e <= hi. Drops constraints that hold over the whole box, turns
  /// constraints on at most two free variables into conflicts, and gives the
  /// rest slack bits.
  void linear(ConstraintId id, int household, int step, std::int64_t slot, LinExpr e, double lo, double hi) {
    constexpr double tol = 1e-9;
    e.normalize();
    if (e.terms.empty()) {
      if (e.constant < lo - tol || e.constant > hi + tol)
        throw InfeasibleInitialState(std::string(to_string(id)) + " cannot hold at slot " + std::to_string(slot));
      return;
    }
    if (e.min_over_box() >= lo - tol && e.max_over_box() <= hi + tol) return;

    Constraint c;
    c.id = id;
    c.household = household;
    c.time_index = slot;
    c.kind = Constraint::Kind::Linear;

    if (e.terms.size() <= 2 && lo != hi) {
      c.kind = Constraint::Kind::Conflicts;
      const std::size_t k = e.terms.size();
      std::vector<std::uint8_t> probe(m_.variables.size(), 0);
      for (unsigned a = 0; a < (1u << k); ++a) {
        for (std::size_t j = 0; j < k; ++j) probe[static_cast<std::size_t>(e.terms[j].first)] = (a >> j) & 1u;
        const double v = e.eval(probe);
        if (v < lo - tol || v > hi + tol) {
          std::vector<Literal> lits;
          for (std::size_t j = 0; j < k; ++j) lits.push_back({e.terms[j].first, ((a >> j) & 1u) != 0});
          c.conflicts.push_back(std::move(lits));
        }
      }
      m_.constraints.push_back(std::move(c));
      return;
    }

    bool integral = is_integral(e.constant);
    double min_coef = kInf;
    for (const auto& t : e.terms) {
      integral = integral && is_integral(t.second);
      min_coef = std::min(min_coef, std::abs(t.second));
    }
    integral = integral && (std::isinf(lo) || is_integral(lo)) && (std::isinf(hi) || is_integral(hi));
    if (!integral) {
      const double s = 1.0 / min_coef;
      e *= s;
      lo *= s;
      hi *= s;
      c.unit = min_coef;
    }
    c.expr = e;
    c.lo = lo;
    c.hi = hi;

    if (lo == hi) {
      c.residual = e - LinExpr(lo);
      m_.constraints.push_back(std::move(c));
      return;
    }

    // Slack spans the feasible interval [max(lo, emin), min(hi, emax)],
    // anchored at the binding upper bound if there is one.
    const double emin = e.min_over_box(), emax = e.max_over_box();
    const bool upper = hi < emax - tol;
    const double anchor = upper ? hi : lo, sign = upper ? 1.0 : -1.0;
    const double range = std::min(hi, emax) - std::max(lo, emin);
    c.residual = e - LinExpr(anchor);
    if (range > tol) {
      std::vector<double> weights;
      if (integral && range < static_cast<double>(1u << kMaxExactSlackBits)) {
        // Exact: bits 1, 2, 4, ... with the top weight trimmed so the sum is
        // exactly `range`; every integer in [0, range] is representable.
        const auto r = static_cast<std::uint64_t>(std::llround(range));
        int nb = 1;
        while ((std::uint64_t{1} << nb) - 1 < r) ++nb;
        for (int k = 0; k + 1 < nb; ++k) weights.push_back(static_cast<double>(std::uint64_t{1} << k));
        weights.push_back(static_cast<double>(r - ((std::uint64_t{1} << (nb - 1)) - 1)));
      } else {
        const double levels = static_cast<double>((1u << slack_bits_) - 1);
        double unit_step = range / levels;
        if (integral) unit_step = std::ceil(unit_step);
        for (int k = 0; k < slack_bits_; ++k) weights.push_back(unit_step * static_cast<double>(1u << k));
      }
      const int ordinal = static_cast<int>(m_.constraints.size());
      for (std::size_t k = 0; k < weights.size(); ++k) {
        const VariableId sid{m_.layout.stage, household < 0 ? 0 : household, step, Role::SlackBit, static_cast<int>(k), id, ordinal};
        const int v = var(sid).terms.front().first;
        c.slack_vars.push_back(v);
        c.residual.add(v, sign * weights[k]);
      }
    }
    m_.constraints.push_back(std::move(c));
  }

  /// Forbids the conjunction of the given literals. Each literal is a fixed
  /// constant or a single free variable.
  void conflict(ConstraintId id, int household, std::int64_t slot, std::initializer_list<std::pair<LinExpr, bool>> lits) {
    std::vector<Literal> free;
    for (const auto& [e, want] : lits) {
      if (e.terms.empty()) {
        if ((e.constant != 0.0) != want) return; // literal false: conflict can never trigger
        continue;
      }
      free.push_back({e.terms.front().first, want});
    }
    if (free.empty()) throw InfeasibleInitialState(std::string(to_string(id)) + " violated by fixed decisions at slot " + std::to_string(slot));
    const auto key = std::make_tuple(id, household, slot);
    auto it = conflict_groups_.find(key);
    if (it == conflict_groups_.end()) {
      Constraint c;
      c.id = id;
      c.household = household;
      c.time_index = slot;
      c.kind = Constraint::Kind::Conflicts;
      m_.constraints.push_back(std::move(c));
      it = conflict_groups_.emplace(key, m_.constraints.size() - 1).first;
    }
    m_.constraints[it->second].conflicts.push_back(std::move(free));
  }


private:

  ConstrainedModel& m_;
  int slack_bits_;
  std::map<std::tuple<ConstraintId, int, std::int64_t>, std::size_t> conflict_groups_;
};

/// Binary-expanded level sum(2^b * bit_b) as an expression.
inline LinExpr level_expr(const std::vector<LinExpr>& bits) {
  LinExpr e;
  for (std::size_t b = 0; b < bits.size(); ++b) e += bits[b] * static_cast<double>(1u << b);
  return e;
}

struct UnitRoles {
  Role on, standby, off, power;
};
inline constexpr UnitRoles kFcRoles{Role::FcOn, Role::FcStandby, Role::FcOff, Role::FcPowerBit};
inline constexpr UnitRoles kElRoles{Role::ElOn, Role::ElStandby, Role::ElOff, Role::ElPowerBit};

struct UnitVars {
  std::vector<LinExpr> on, standby, off, power;
};

/// Commitment and power decisions of one unit over an hourly horizon, with
/// its one-hot, transition, minimum-duration and power-gating constraints and
/// its cost terms.
inline UnitVars build_unit_day_ahead(ModelBuilder& b, ConstrainedModel& m, int household, const UnitRoles& roles, Mode mode0,
                                     UnitAges ages0, MinDurations min, double p_min, double p_max, int power_bits,
                                     double c_standby, double c_hot, double c_trans, double w_cost) {
  const int T = m.layout.n_steps;
  const std::int64_t slot0 = m.layout.first_slot;
  auto slot_of = [&](int t) { return slot0 + static_cast<std::int64_t>(t) * kSlotsPerHour; };

  // -1: free, 0/1: settled by the initial state.
  std::vector<int> forced(static_cast<std::size_t>(T), -1);
  if (mode0 == Mode::Off && T > 0) forced[0] = 0;
  if (mode0 == Mode::On && ages0.on_age < min.on)
    for (int k = 0; k < std::min(T, min.on - ages0.on_age); ++k) forced[static_cast<std::size_t>(k)] = 1;
  if (mode0 != Mode::On && ages0.off_age < min.off)
    for (int k = 0; k < std::min(T, min.off - ages0.off_age); ++k) forced[static_cast<std::size_t>(k)] = 0;

  UnitVars u;
  const double step = (p_max - p_min) / ((1 << power_bits) - 1);
  for (int t = 0; t < T; ++t) {
    const int f = forced[static_cast<std::size_t>(t)];
    auto id = [&](Role r, int bit = 0) { return VariableId{Stage::DayAhead, household, t, r, bit}; };
    if (f == 1) {
      u.on.push_back(b.fixed(id(roles.on), true));
      u.standby.push_back(b.fixed(id(roles.standby), false));
      u.off.push_back(b.fixed(id(roles.off), false));
    } else {
      u.on.push_back(f == 0 ? b.fixed(id(roles.on), false) : b.var(id(roles.on)));
      u.standby.push_back(b.var(id(roles.standby)));
      u.off.push_back(b.var(id(roles.off)));
    }
    std::vector<LinExpr> bits;
    for (int k = 0; k < power_bits; ++k) bits.push_back(f == 0 ? b.fixed(id(roles.power, k), false) : b.var(id(roles.power, k)));
    u.power.push_back(u.on.back() * p_min + level_expr(bits) * step);

    const auto slot = slot_of(t);
    b.linear(ConstraintId::OneHot, household, t, slot, u.on.back() + u.standby.back() + u.off.back(), 1.0, 1.0);
    for (const auto& bit : bits) b.conflict(ConstraintId::PowerWhenNotOn, household, slot, {{bit, true}, {u.on.back(), false}});
  }

  const LinExpr on_init(mode0 == Mode::On ? 1.0 : 0.0);
  const LinExpr off_init(mode0 == Mode::Off ? 1.0 : 0.0);
  auto on_at = [&](int t) { return t < 0 ? on_init : u.on[static_cast<std::size_t>(t)]; };
  auto off_at = [&](int t) { return t < 0 ? off_init : u.off[static_cast<std::size_t>(t)]; };

  for (int t = 0; t < T; ++t) {
    const auto slot = slot_of(t);
    b.conflict(ConstraintId::Transition, household, slot, {{on_at(t - 1), true}, {off_at(t), true}});
    b.conflict(ConstraintId::Transition, household, slot, {{off_at(t - 1), true}, {on_at(t), true}});
    for (int k = 1; k < min.on && t + k < T; ++k)
      b.linear(ConstraintId::MinOnDuration, household, t, slot, on_at(t) - on_at(t - 1) - on_at(t + k), -kInf, 0.0);
    for (int k = 1; k < min.off && t + k < T; ++k)
      b.linear(ConstraintId::MinOffDuration, household, t, slot, on_at(t - 1) - on_at(t) + on_at(t + k), -kInf, 1.0);

    // c_s [Standby] + c_h [Off status changed] + c_l [On status changed]
    m.objective.add(u.standby[static_cast<std::size_t>(t)], w_cost * c_standby);
    m.objective.add(off_at(t) + off_at(t - 1), w_cost * c_hot);
    m.objective.add_product(off_at(t), off_at(t - 1), -2.0 * w_cost * c_hot);
    m.objective.add(on_at(t) + on_at(t - 1), w_cost * c_trans);
    m.objective.add_product(on_at(t), on_at(t - 1), -2.0 * w_cost * c_trans);
  }
  return u;
}

struct BatteryVars {
  std::vector<LinExpr> charge, discharge; // kW per step
  std::vector<LinExpr> net_level;         // charge level minus discharge level
};

inline BatteryVars build_battery(ModelBuilder& b, const ConstrainedModel& m, Stage stage, int household) {
  const auto& L = m.layout;
  BatteryVars v;
  for (int t = 0; t < L.n_steps; ++t) {
    std::vector<LinExpr> ch, dis;
    for (int k = 0; k < L.battery_bits; ++k) {
      ch.push_back(b.var({stage, household, t, Role::BattChargeBit, k}));
      dis.push_back(b.var({stage, household, t, Role::BattDischargeBit, k}));
    }
    const auto slot = L.first_slot + static_cast<std::int64_t>(t) * L.slots_per_step;
    for (const auto& c : ch)
      for (const auto& d : dis) b.conflict(ConstraintId::ChargeDischargeExclusive, household, slot, {{c, true}, {d, true}});
    if (L.battery_bits > 0) {
      v.charge.push_back(level_expr(ch) * L.charge_step());
      v.discharge.push_back(level_expr(dis) * L.discharge_step());
      v.net_level.push_back(level_expr(ch) - level_expr(dis));
    } else {
      v.charge.emplace_back(0.0);
      v.discharge.emplace_back(0.0);
      v.net_level.emplace_back(0.0);
    }
  }
  return v;
}

/// SOC bounds, SOC tracking term and soft power balance for one household;
/// returns nothing, accumulates into the model.
inline void add_household_storage_terms(ModelBuilder& b, ConstrainedModel& m, const Scenario& sc, int household,
                                        const BatteryVars& batt, const std::vector<LinExpr>& fc_power,
                                        const std::vector<LinExpr>& el_power) {
  const auto& L = m.layout;
  const auto& d = sc.device;
  const auto& w = sc.costs;
  const double dt = L.forecast.dt_hours();
  const double soc0 = L.initial.households[static_cast<std::size_t>(household)].soc;
  LinExpr soc(soc0), levels;
  // soc = soc0 + u * levels, so the bounds become integer bounds on levels.
  const double u = L.battery_bits > 0 ? L.soc_quantum() : 1.0;
  const double lo = std::ceil((d.soc_min - soc0) / u - 1e-9), hi = std::floor((d.soc_max - soc0) / u + 1e-9);
  for (int t = 0; t < L.n_steps; ++t) {
    const auto slot = L.first_slot + static_cast<std::int64_t>(t) * L.slots_per_step;
    const auto ts = static_cast<std::size_t>(t);
    soc += batt.charge[ts] * (d.eta_ch * dt / d.batt_capacity);
    soc += batt.discharge[ts] * (-dt / (d.eta_dis * d.batt_capacity));
    soc.normalize();
    levels += batt.net_level[ts];
    levels.normalize();
    b.linear(ConstraintId::SocBounds, household, t, slot, levels, lo, hi);
    m.objective.add_square(soc - LinExpr(d.soc_target), w.w_soc);

    const auto& ex = L.forecast.steps[ts];
    LinExpr r(ex.pv + ex.wt - ex.load[static_cast<std::size_t>(household)]);
    r += fc_power[ts];
    r += el_power[ts] * -1.0;
    r += batt.discharge[ts];
    r += batt.charge[ts] * -1.0;
    r.normalize();
    m.objective.add_square(r, w.w_slack_balance * dt);
  }
}

/// Integer under-approximation of `lo <= e <= hi` in units of `q`: each
/// bound becomes an integral constraint whose solutions all satisfy the
/// original one.
inline void conservative_bounds(ModelBuilder& b, ConstraintId id, int household, int step, std::int64_t slot, const LinExpr& e,
                                double lo, double hi, double q) {
  LinExpr lower(0.0), upper(0.0);
  for (const auto& [v, c] : e.terms) {
    lower.add(v, std::floor(c / q + 1e-9));
    upper.add(v, std::ceil(c / q - 1e-9));
  }
  if (!std::isinf(lo)) b.linear(id, household, step, slot, lower, std::ceil((lo - e.constant) / q - 1e-9), kInf);
  if (!std::isinf(hi)) b.linear(id, household, step, slot, upper, -kInf, std::floor((hi - e.constant) / q + 1e-9));
}

/// Shared tank bounds and the stored-hydrogen reward. Tank bounds use a
/// conservative integer form with quantum half the smallest per-bit
/// hydrogen change.
inline void add_hydrogen_terms(ModelBuilder& b, ConstrainedModel& m, const Scenario& sc,
                               const std::vector<std::vector<LinExpr>>& fc_power,
                               const std::vector<std::vector<LinExpr>>& el_power, const std::vector<double>& floor = {}) {
  const auto& L = m.layout;
  const auto& d = sc.device;
  const double dt = L.forecast.dt_hours();
  LinExpr h(L.initial.hydrogen);
  std::vector<LinExpr> levels;
  double q = kInf;
  for (int t = 0; t < L.n_steps; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (std::size_t i = 0; i < fc_power.size(); ++i) {
      h += el_power[i][ts] * (d.eta_prod * dt);
      h += fc_power[i][ts] * (-d.eta_cons * dt);
    }
    h.normalize();
    for (const auto& tm : h.terms) q = std::min(q, std::abs(tm.second) / 2);
    levels.push_back(h);
    m.objective.add(h, -sc.costs.w_hydrogen / d.h_max);
  }
  for (int t = 0; t < L.n_steps; ++t) {
    const auto& e = levels[static_cast<std::size_t>(t)];
    const auto slot = L.first_slot + static_cast<std::int64_t>(t) * L.slots_per_step;
    const double lo = floor.empty() ? d.h_min : std::min(floor[static_cast<std::size_t>(t)], e.max_over_box());
    if (!floor.empty()) m.layout.hydrogen_floor.push_back(lo);
    if (e.terms.empty()) b.linear(ConstraintId::HydrogenBounds, kShared, t, slot, e, std::min(lo, e.constant), d.h_max);
    else conservative_bounds(b, ConstraintId::HydrogenBounds, kShared, t, slot, e, lo, d.h_max, q);
  }
}

inline void check_initial(const Scenario& sc, const PlantState& init) {
  if (static_cast<int>(init.households.size()) != sc.n_households)
    throw InfeasibleInitialState("initial state has " + std::to_string(init.households.size()) + " households");
  const auto& d = sc.device;
  for (const auto& h : init.households)
    if (h.soc < d.soc_min - kBoundTol || h.soc > d.soc_max + kBoundTol)
      throw InfeasibleInitialState("initial SOC " + std::to_string(h.soc) + " outside bounds");
  if (init.hydrogen < d.h_min - kBoundTol || init.hydrogen > d.h_max + kBoundTol)
    throw InfeasibleInitialState("initial hydrogen " + std::to_string(init.hydrogen) + " kg outside bounds");
}

} // namespace detail

/// Day-ahead commitment model over `sc.day_ahead_horizon` hourly steps.
///
/// Per household and hour: an On/Standby/Off one-hot triple for each unit,
/// `power_bits` bits per unit power on [P_min, P_max] (gated by the On bit),
/// and `battery_bits` bits each for charge and discharge power. Constraints
/// that need more than two free variables receive `slack_bits` slack bits.
/// The power balance enters the objective as w_slack_balance * dt * r^2.
inline ConstrainedModel build_day_ahead(const Scenario& sc, const Forecast& forecast, const PlantState& initial) {
  if (forecast.slots_per_step != kSlotsPerHour || static_cast<int>(forecast.steps.size()) != sc.day_ahead_horizon)
    throw HorizonMismatch("day-ahead forecast must cover " + std::to_string(sc.day_ahead_horizon) + " hourly steps");
  if (forecast.first_slot != initial.slot || initial.slot % kSlotsPerHour != 0)
    throw HorizonMismatch("day-ahead stage must start on an hour boundary at the state's clock");
  detail::check_initial(sc, initial);

  ConstrainedModel m;
  auto& L = m.layout;
  L.stage = Stage::DayAhead;
  L.n_households = sc.n_households;
  L.n_steps = sc.day_ahead_horizon;
  L.first_slot = initial.slot;
  L.slots_per_step = kSlotsPerHour;
  L.power_bits = sc.power_bits;
  L.battery_bits = sc.battery_bits;
  L.device = sc.device;
  L.initial = initial;
  L.forecast = forecast;

  detail::ModelBuilder b(m, sc.slack_bits);
  const auto& d = sc.device;
  const auto& c = sc.costs;
  std::vector<std::vector<LinExpr>> fc_power, el_power;
  for (int i = 0; i < sc.n_households; ++i) {
    const auto& hs = initial.households[static_cast<std::size_t>(i)];
    auto fc = detail::build_unit_day_ahead(b, m, i, detail::kFcRoles, hs.fc, hs.fc_ages, fc_durations(d), d.p_fc_min, d.p_fc_max,
                                           sc.power_bits, c.c_standby_fc, c.c_hot_fc, c.c_trans_fc, c.w_cost);
    auto el = detail::build_unit_day_ahead(b, m, i, detail::kElRoles, hs.el, hs.el_ages, el_durations(d), d.p_el_min, d.p_el_max,
                                           sc.power_bits, c.c_standby_el, c.c_hot_el, c.c_trans_el, c.w_cost);
    const auto batt = detail::build_battery(b, m, Stage::DayAhead, i);
    detail::add_household_storage_terms(b, m, sc, i, batt, fc.power, el.power);
    fc_power.push_back(std::move(fc.power));
    el_power.push_back(std::move(el.power));
  }
  detail::add_hydrogen_terms(b, m, sc, fc_power, el_power);
  return m;
}

/// Short-term dispatch model over `sc.short_term_horizon` 15-minute steps.
/// Unit modes are fixed by `commitments` (each hour's mode holds for its four
/// slots). |dP| terms use a pair of binary-expanded deviation levels per unit
/// and step unless the change has a fixed sign over the box, in which case
/// it is linear.
inline ConstrainedModel build_short_term(const Scenario& sc, const CommitmentSchedule& commitments, const Forecast& forecast,
                                         const PlantState& state) {
  if (forecast.slots_per_step != 1 || static_cast<int>(forecast.steps.size()) != sc.short_term_horizon ||
      forecast.first_slot != state.slot)
    throw HorizonMismatch("short-term forecast must cover " + std::to_string(sc.short_term_horizon) + " slots from the state's clock");
  detail::check_initial(sc, state);

  ConstrainedModel m;
  auto& L = m.layout;
  L.stage = Stage::ShortTerm;
  L.n_households = sc.n_households;
  L.n_steps = sc.short_term_horizon;
  L.first_slot = state.slot;
  L.slots_per_step = 1;
  L.power_bits = sc.power_bits;
  L.battery_bits = sc.battery_bits;
  L.device = sc.device;
  L.initial = state;
  L.forecast = forecast;

  const std::int64_t h0 = state.slot / kSlotsPerHour;
  const std::int64_t h1 = (state.slot + sc.short_term_horizon - 1) / kSlotsPerHour;
  L.commitments.first_hour = h0;
  for (std::int64_t h = h0; h <= h1; ++h) {
    std::vector<UnitCommit> row;
    for (int i = 0; i < sc.n_households; ++i) row.push_back(commitments.at(h, i));
    L.commitments.hours.push_back(std::move(row));
  }

  detail::ModelBuilder b(m, sc.slack_bits);
  const auto& d = sc.device;
  const double w_fluct = sc.costs.w_fluct;
  std::vector<std::vector<LinExpr>> fc_power(static_cast<std::size_t>(sc.n_households)),
      el_power(static_cast<std::size_t>(sc.n_households));

  struct UnitSpec {
    Mode UnitCommit::*mode;
    Role bit_role, up_role, down_role;
    double p_min, step;
    double live;
  };

  for (int i = 0; i < sc.n_households; ++i) {
    const auto& hs = state.households[static_cast<std::size_t>(i)];
    const UnitSpec units[2] = {
        {&UnitCommit::fc, Role::FcPowerBit, Role::FcDevUpBit, Role::FcDevDownBit, d.p_fc_min, L.fc_step(), hs.fc_power},
        {&UnitCommit::el, Role::ElPowerBit, Role::ElDevUpBit, Role::ElDevDownBit, d.p_el_min, L.el_step(), hs.el_power}};
    for (int u = 0; u < 2; ++u) {
      const UnitSpec& spec = units[u];
      auto& power = u == 0 ? fc_power[static_cast<std::size_t>(i)] : el_power[static_cast<std::size_t>(i)];
      for (int t = 0; t < L.n_steps; ++t) {
            const std::int64_t slot = state.slot + t;
        const bool on = commitments.at(slot / kSlotsPerHour, i).*(spec.mode) == Mode::On;
        if (!on) {
          power.emplace_back(0.0);
        } else {
          std::vector<LinExpr> bits;
          for (int k = 0; k < sc.power_bits; ++k) bits.push_back(b.var({Stage::ShortTerm, i, t, spec.bit_role, k}));
          power.push_back(LinExpr(spec.p_min) + detail::level_expr(bits) * spec.step);
        }

        // |P_t - P_{t-1}|, first step against the live setpoint.
        LinExpr delta = power.back() - (t == 0 ? LinExpr(spec.live) : power[static_cast<std::size_t>(t - 1)]);
        delta.normalize();
        if (delta.terms.empty()) {
          m.objective.constant += w_fluct * std::abs(delta.constant);
        } else if (delta.min_over_box() >= -1e-12) {
          m.objective.add(delta, w_fluct);
        } else if (delta.max_over_box() <= 1e-12) {
          m.objective.add(delta, -w_fluct);
        } else {
          // Deviation pair in grid levels: delta / step = up - down.
          LinExpr levels = delta * (1.0 / spec.step);
          levels.constant = std::round(levels.constant);
          const double reach = std::max(-levels.min_over_box(), levels.max_over_box());
          int nbits = 1;
          while (static_cast<double>((1u << nbits) - 1) < reach) ++nbits;
          std::vector<LinExpr> up, down;
          for (int k = 0; k < nbits; ++k) {
            up.push_back(b.var({Stage::ShortTerm, i, t, spec.up_role, k}));
            down.push_back(b.var({Stage::ShortTerm, i, t, spec.down_role, k}));
          }
          const LinExpr up_level = detail::level_expr(up), down_level = detail::level_expr(down);
          b.linear(ConstraintId::Fluctuation, i, t, slot, levels - up_level + down_level, 0.0, 0.0);
          m.objective.add(up_level + down_level, w_fluct * spec.step);
        }
      }
    }
    const auto batt = detail::build_battery(b, m, Stage::ShortTerm, i);
    detail::add_household_storage_terms(b, m, sc, i, batt, fc_power[static_cast<std::size_t>(i)],
                                        el_power[static_cast<std::size_t>(i)]);
  }
  // Keep the rest of the commitment runnable after the window.
  std::vector<double> floor;
  for (int t = 0; t < L.n_steps; ++t) floor.push_back(std::max(d.h_min, hydrogen_reserve(commitments, sc, state.slot + t + 1)));
  detail::add_hydrogen_terms(b, m, sc, fc_power, el_power, floor);
  return m;
}

// ---------------------------------------------------------------------------
// Decoding

namespace detail {

inline void check_length(const ConstrainedModel& m, std::span<const std::uint8_t> x) {
  if (x.size() != m.size()) throw LengthMismatch("assignment length " + std::to_string(x.size()) + " != " + std::to_string(m.size()));
}

inline int level_of(const ConstrainedModel& m, Stage s, int hh, int t, Role r, int bits, std::span<const std::uint8_t> x) {
  int level = 0;
  for (int k = 0; k < bits; ++k)
    if (m.value({s, hh, t, r, k}, x)) level |= 1 << k;
  return level;
}

inline Mode mode_of(const ConstrainedModel& m, int hh, int t, const UnitRoles& r, std::span<const std::uint8_t> x) {
  const bool on = m.value({Stage::DayAhead, hh, t, r.on}, x);
  const bool sb = m.value({Stage::DayAhead, hh, t, r.standby}, x);
  const bool off = m.value({Stage::DayAhead, hh, t, r.off}, x);
  if (on + sb + off != 1)
    throw InvalidOneHot("household " + std::to_string(hh) + " step " + std::to_string(t) + ": state indicators sum to " +
                        std::to_string(on + sb + off));
  return on ? Mode::On : sb ? Mode::Standby : Mode::Off;
}

inline void decode_battery(const ConstrainedModel& m, Stage s, int hh, int t, std::span<const std::uint8_t> x, HouseholdDispatch& out) {
  const auto& L = m.layout;
  if (L.battery_bits == 0) return;
  out.p_ch = L.charge_step() * level_of(m, s, hh, t, Role::BattChargeBit, L.battery_bits, x);
  out.p_dis = L.discharge_step() * level_of(m, s, hh, t, Role::BattDischargeBit, L.battery_bits, x);
}

} // namespace detail

inline CommitmentSchedule decode_day_ahead(std::span<const std::uint8_t> x, const ConstrainedModel& m) {
  detail::check_length(m, x);
  const auto& L = m.layout;
  CommitmentSchedule s;
  s.first_hour = L.first_slot / kSlotsPerHour;
  s.hours.assign(static_cast<std::size_t>(L.n_steps), std::vector<UnitCommit>(static_cast<std::size_t>(L.n_households)));
  for (int i = 0; i < L.n_households; ++i) {
    Mode fc_prev = L.initial.households[static_cast<std::size_t>(i)].fc;
    Mode el_prev = L.initial.households[static_cast<std::size_t>(i)].el;
    for (int t = 0; t < L.n_steps; ++t) {
      auto& c = s.hours[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      c.fc = detail::mode_of(m, i, t, detail::kFcRoles, x);
      c.el = detail::mode_of(m, i, t, detail::kElRoles, x);
      auto edge = [](Mode a, Mode b) {
        try {
          return edge_between(a, b);
        } catch (const InvalidEdge&) {
          return Event::None;
        }
      };
      c.fc_event = edge(fc_prev, c.fc);
      c.el_event = edge(el_prev, c.el);
      fc_prev = c.fc;
      el_prev = c.el;
    }
  }
  return s;
}

/// Hourly setpoints of a day-ahead assignment, with curtailment / unmet load
/// settled against the model's forecast.
inline DispatchPlan decode_day_ahead_dispatch(std::span<const std::uint8_t> x, const ConstrainedModel& m) {
  const CommitmentSchedule sched = decode_day_ahead(x, m);
  const auto& L = m.layout;
  DispatchPlan p;
  p.first_slot = L.first_slot;
  p.slots_per_step = L.slots_per_step;
  p.steps.assign(static_cast<std::size_t>(L.n_steps), std::vector<HouseholdDispatch>(static_cast<std::size_t>(L.n_households)));
  for (int t = 0; t < L.n_steps; ++t)
    for (int i = 0; i < L.n_households; ++i) {
      auto& out = p.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const auto& c = sched.hours[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      if (c.fc == Mode::On)
        out.fc_power = L.device.p_fc_min + L.fc_step() * detail::level_of(m, Stage::DayAhead, i, t, Role::FcPowerBit, L.power_bits, x);
      if (c.el == Mode::On)
        out.el_power = L.device.p_el_min + L.el_step() * detail::level_of(m, Stage::DayAhead, i, t, Role::ElPowerBit, L.power_bits, x);
      detail::decode_battery(m, Stage::DayAhead, i, t, x, out);
      settle_balance(out, L.forecast.steps[static_cast<std::size_t>(t)], static_cast<std::size_t>(i));
    }
  return p;
}

inline DispatchPlan decode_short_term(std::span<const std::uint8_t> x, const ConstrainedModel& m) {
  detail::check_length(m, x);
  const auto& L = m.layout;
  DispatchPlan p;
  p.first_slot = L.first_slot;
  p.slots_per_step = 1;
  p.steps.assign(static_cast<std::size_t>(L.n_steps), std::vector<HouseholdDispatch>(static_cast<std::size_t>(L.n_households)));
  for (int t = 0; t < L.n_steps; ++t)
    for (int i = 0; i < L.n_households; ++i) {
      auto& out = p.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const auto& c = L.commitments.at((L.first_slot + t) / kSlotsPerHour, i);
      if (c.fc == Mode::On)
        out.fc_power = L.device.p_fc_min + L.fc_step() * detail::level_of(m, Stage::ShortTerm, i, t, Role::FcPowerBit, L.power_bits, x);
      if (c.el == Mode::On)
        out.el_power = L.device.p_el_min + L.el_step() * detail::level_of(m, Stage::ShortTerm, i, t, Role::ElPowerBit, L.power_bits, x);
      detail::decode_battery(m, Stage::ShortTerm, i, t, x, out);
      settle_balance(out, L.forecast.steps[static_cast<std::size_t>(t)], static_cast<std::size_t>(i));
    }
  return p;
}

// ---------------------------------------------------------------------------
// Encoding (inverse of decoding for plans on the discrete grid)

namespace detail {

inline void set_level(const ConstrainedModel& m, std::vector<std::uint8_t>& x, Stage s, int hh, int t, Role r, int bits, long level) {
  for (int k = 0; k < bits; ++k)
    if (const int idx = m.find({s, hh, t, r, k}); idx >= 0) x[static_cast<std::size_t>(idx)] = (level >> k) & 1;
}

inline long grid_level(double value, double base, double step) { return std::lround((value - base) / step); }

/// Sets auxiliary bits (deviation pairs, then slacks) so every penalty
/// residual is as small as the grid allows.
inline void fill_auxiliary(const ConstrainedModel& m, std::vector<std::uint8_t>& x) {
  for (const auto& c : m.constraints) {
    if (c.kind != Constraint::Kind::Linear) continue;
    if (c.id == ConstraintId::Fluctuation) {
      // levels - up + down = 0: read the level change with up = down = 0.
      std::vector<int> aux;
      for (const auto& [v, coef] : c.expr.terms) {
        const Role r = m.variables[static_cast<std::size_t>(v)].role;
        if (r == Role::FcDevUpBit || r == Role::FcDevDownBit || r == Role::ElDevUpBit || r == Role::ElDevDownBit) aux.push_back(v);
      }
      for (int v : aux) x[static_cast<std::size_t>(v)] = 0;
      const double change = c.expr.eval(x);
      const long lv = std::lround(change);
      for (const auto& [v, coef] : c.expr.terms) {
        const auto& id = m.variables[static_cast<std::size_t>(v)];
        const bool is_up = id.role == Role::FcDevUpBit || id.role == Role::ElDevUpBit;
        const bool is_down = id.role == Role::FcDevDownBit || id.role == Role::ElDevDownBit;
        if (is_up && lv > 0) x[static_cast<std::size_t>(v)] = (lv >> id.bit) & 1;
        if (is_down && lv < 0) x[static_cast<std::size_t>(v)] = ((-lv) >> id.bit) & 1;
      }
    }
  }
  for (const auto& c : m.constraints) {
    if (c.kind != Constraint::Kind::Linear || c.slack_vars.empty()) continue;
    const std::size_t nb = c.slack_vars.size();
    double best = std::numeric_limits<double>::infinity();
    unsigned best_a = 0;
    for (unsigned a = 0; a < (1u << nb); ++a) {
      for (std::size_t b = 0; b < nb; ++b) x[static_cast<std::size_t>(c.slack_vars[b])] = (a >> b) & 1u;
      const double r = std::abs(c.residual.eval(x));
      if (r < best - 1e-12) {
        best = r;
        best_a = a;
      }
    }
    for (std::size_t b = 0; b < nb; ++b) x[static_cast<std::size_t>(c.slack_vars[b])] = (best_a >> b) & 1u;
  }
}

inline void encode_battery(const ConstrainedModel& m, std::vector<std::uint8_t>& x, Stage s, int hh, int t, const HouseholdDispatch& d) {
  const auto& L = m.layout;
  if (L.battery_bits == 0) return;
  set_level(m, x, s, hh, t, Role::BattChargeBit, L.battery_bits, grid_level(d.p_ch, 0.0, L.charge_step()));
  set_level(m, x, s, hh, t, Role::BattDischargeBit, L.battery_bits, grid_level(d.p_dis, 0.0, L.discharge_step()));
}

} // namespace detail

inline std::vector<std::uint8_t> encode_day_ahead(const CommitmentSchedule& sched, const DispatchPlan& plan, const ConstrainedModel& m) {
  const auto& L = m.layout;
  std::vector<std::uint8_t> x(m.size(), 0);
  auto set = [&](const VariableId& id, bool v) {
    if (const int idx = m.find(id); idx >= 0) x[static_cast<std::size_t>(idx)] = v;
  };
  for (int t = 0; t < L.n_steps; ++t)
    for (int i = 0; i < L.n_households; ++i) {
      const auto& c = sched.hours[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const auto& d = plan.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      for (const auto& [roles, mode] : {std::pair{detail::kFcRoles, c.fc}, std::pair{detail::kElRoles, c.el}}) {
        set({Stage::DayAhead, i, t, roles.on}, mode == Mode::On);
        set({Stage::DayAhead, i, t, roles.standby}, mode == Mode::Standby);
        set({Stage::DayAhead, i, t, roles.off}, mode == Mode::Off);
      }
      if (c.fc == Mode::On)
        detail::set_level(m, x, Stage::DayAhead, i, t, Role::FcPowerBit, L.power_bits, detail::grid_level(d.fc_power, L.device.p_fc_min, L.fc_step()));
      if (c.el == Mode::On)
        detail::set_level(m, x, Stage::DayAhead, i, t, Role::ElPowerBit, L.power_bits, detail::grid_level(d.el_power, L.device.p_el_min, L.el_step()));
      detail::encode_battery(m, x, Stage::DayAhead, i, t, d);
    }
  detail::fill_auxiliary(m, x);
  return x;
}

inline std::vector<std::uint8_t> encode_short_term(const DispatchPlan& plan, const ConstrainedModel& m) {
  const auto& L = m.layout;
  std::vector<std::uint8_t> x(m.size(), 0);
  for (int t = 0; t < L.n_steps; ++t)
    for (int i = 0; i < L.n_households; ++i) {
      const auto& d = plan.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const auto& c = L.commitments.at((L.first_slot + t) / kSlotsPerHour, i);
      if (c.fc == Mode::On)
        detail::set_level(m, x, Stage::ShortTerm, i, t, Role::FcPowerBit, L.power_bits, detail::grid_level(d.fc_power, L.device.p_fc_min, L.fc_step()));
      if (c.el == Mode::On)
        detail::set_level(m, x, Stage::ShortTerm, i, t, Role::ElPowerBit, L.power_bits, detail::grid_level(d.el_power, L.device.p_el_min, L.el_step()));
      detail::encode_battery(m, x, Stage::ShortTerm, i, t, d);
    }
  detail::fill_auxiliary(m, x);
  return x;
}

// ---------------------------------------------------------------------------
// Validation and debugging

using PlanValidator = std::function<std::vector<Violation>(std::span<const std::uint8_t>)>;

/// Decodes an assignment and audits the plan with the plant rules. Invalid
/// one-hot groups are reported as OneHot violations.
inline PlanValidator plant_validator(const ConstrainedModel& m, const Scenario& sc) {
  return [&m, &sc](std::span<const std::uint8_t> x) -> std::vector<Violation> {
    const auto& L = m.layout;
    try {
      if (L.stage == Stage::DayAhead) {
        const auto sched = decode_day_ahead(x, m);
        return check_feasibility(sched, decode_day_ahead_dispatch(x, m), sc, L.initial, L.forecast);
      }
      const DispatchPlan plan = decode_short_term(x, m);
      auto out = check_feasibility(L.commitments, plan, sc, L.initial, L.forecast);
      double h2 = L.initial.hydrogen;
      for (std::size_t t = 0; t < plan.steps.size() && t < L.hydrogen_floor.size(); ++t) {
        for (const auto& hd : plan.steps[t]) h2 += (sc.device.eta_prod * hd.el_power - sc.device.eta_cons * hd.fc_power) * plan.dt_hours();
        if (h2 < L.hydrogen_floor[t] - kBoundTol) out.push_back({ConstraintId::HydrogenBounds, kShared, plan.slot_of(t), L.hydrogen_floor[t] - h2});
      }
      return out;
    } catch (const InvalidOneHot&) {
      return {{ConstraintId::OneHot, kShared, L.first_slot, 0}};
    }
  };
}

/// Model-level validator: constraint breaches of the decision variables.
inline PlanValidator model_validator(const ConstrainedModel& m) {
  return [&m](std::span<const std::uint8_t> x) { return m.violations(x); };
}

/// LP-style text dump, one objective term or constraint per line.
inline std::string dump_model(const ConstrainedModel& m) {
  std::ostringstream os;
  os.precision(10);
  auto name = [&](int v) { return to_string(m.variables[static_cast<std::size_t>(v)]); };
  auto write_lin = [&](const LinExpr& e) {
    bool first = true;
    for (const auto& [v, c] : e.terms) {
      os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ")) << std::abs(c) << ' ' << name(v);
      first = false;
    }
    if (e.constant != 0.0 || first) os << (e.constant < 0 ? " - " : " + ") << std::abs(e.constant);
  };
  os << "\\ " << (m.layout.stage == Stage::DayAhead ? "day-ahead" : "short-term") << " model: " << m.size() << " variables, "
     << m.constraints.size() << " constraints\n";
  os << "minimize\n  obj: " << m.objective.constant;
  for (const auto& [v, c] : m.objective.linear) os << (c < 0 ? " - " : " + ") << std::abs(c) << ' ' << name(v);
  for (const auto& [ij, c] : m.objective.quad)
    os << (c < 0 ? " - " : " + ") << std::abs(c) << ' ' << name(ij.first) << " * " << name(ij.second);
  os << "\nsubject to\n";
  for (std::size_t k = 0; k < m.constraints.size(); ++k) {
    const auto& c = m.constraints[k];
    os << "  c" << k << '_' << to_string(c.id) << "_h" << c.household << "_s" << c.time_index << ": ";
    if (c.kind == Constraint::Kind::Conflicts) {
      os << "not any of {";
      for (std::size_t j = 0; j < c.conflicts.size(); ++j) {
        os << (j ? "; " : "");
        for (std::size_t l = 0; l < c.conflicts[j].size(); ++l)
          os << (l ? " & " : "") << name(c.conflicts[j][l].var) << '=' << c.conflicts[j][l].value;
      }
      os << "}\n";
      continue;
    }
    if (c.lo == c.hi) {
      write_lin(c.expr);
      os << " = " << c.lo << '\n';
      continue;
    }
    if (!std::isinf(c.lo)) os << c.lo << " <= ";
    write_lin(c.expr);
    if (!std::isinf(c.hi)) os << " <= " << c.hi;
    os << "  [slack bits " << c.slack_vars.size() << "]\n";
  }
  os << "binary\n";
  for (std::size_t v = 0; v < m.size(); ++v) os << "  " << name(static_cast<int>(v)) << '\n';
  os << "end\n";
  return os.str();
}

} // namespace hydroq
