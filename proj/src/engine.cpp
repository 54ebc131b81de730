#include "vdg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vdg {

namespace {

constexpr double kValueTolerance = 1e-9;

struct QueryView {
  bool is_reward = false;
  const RewardExpr* expr = nullptr;
};

QueryView view_query(const Query& q) {
  QueryView v;
  if (const auto* ro = std::get_if<RewardOptimum>(&q)) {
    v.is_reward = true;
    v.expr = &ro->expr;
  }
  return v;
}

void check_linexpr_arity(const LinExpr& e, int n) {
  if (static_cast<int>(e.coeffs.size()) != n)
    throw std::invalid_argument("property references " + std::to_string(e.coeffs.size()) +
                                " players, model has " + std::to_string(n));
}

void check_pred_arity(const StatePredicate& p, int n) {
  if (p->kind == PredNode::Kind::compare) {
    check_linexpr_arity(p->cmp.lhs, n);
    check_linexpr_arity(p->cmp.rhs, n);
    return;
  }
  for (const auto& ch : p->children) check_pred_arity(ch, n);
}

/// The property must have been parsed against the same player count.
void check_compatible(const TransitionModel& model, const PropertyAst& prop) {
  const int n = model.params().n;
  for (const auto& block : prop.coalition.blocks)
    for (int p : block)
      if (p < 1 || p > n)
        throw std::invalid_argument("property coalition names player p" + std::to_string(p) +
                                    ", model has n=" + std::to_string(n));
  if (!prop.path.pred) throw std::invalid_argument("property has no path predicate");
  check_pred_arity(prop.path.pred, n);
  if (const auto* ro = std::get_if<RewardOptimum>(&prop.query))
    if (static_cast<int>(ro->expr.coeffs.size()) != n)
      throw std::invalid_argument("reward expression references " +
                                  std::to_string(ro->expr.coeffs.size()) +
                                  " players, model has n=" + std::to_string(n));
}

double target_value(const QueryView& qv, const GameState& st, int r_init) {
  return qv.is_reward ? qv.expr->evaluate(st, r_init) : 1.0;
}

struct LevelSolver {
  const TransitionModel& model;
  const QueryView qv;
  const CoalitionSplit split;
  const ActionSplit actions;
  const OptDir dir;

  LevelSolver(const TransitionModel& m, const PropertyAst& prop, OptDir d)
      : model(m),
        qv(view_query(prop.query)),
        split(split_coalition(prop.coalition, m.params().n)),
        actions(make_action_split(split, m.params().n, m.params().fractions.size())),
        dir(d) {}

  double continuation(StateId id, const std::vector<double>& next) const {
    if (split.cooperative()) {
      double best = next[model.successor(id, 0)];
      for (std::size_t a = 1; a < model.action_count(); ++a) {
        const double v = next[model.successor(id, a)];
        if (dir == OptDir::maximize ? v > best : v < best) best = v;
      }
      return best;
    }
    return solve_state_game(state_game(model, id, actions, next), dir).value;
  }
};

}  // namespace

CoalitionSplit split_coalition(const Coalition& coalition, int n) {
  if (coalition.blocks.empty() || coalition.blocks.size() > 2)
    throw std::invalid_argument("coalition must have one or two blocks");
  CoalitionSplit out;
  std::vector<bool> listed(static_cast<std::size_t>(n) + 1, false);
  for (int p : coalition.blocks[0]) {
    if (p < 1 || p > n) throw std::invalid_argument("coalition player outside 1..n");
    listed[static_cast<std::size_t>(p)] = true;
    out.proponents.push_back(p - 1);
  }
  if (coalition.blocks.size() == 2) {
    for (int p : coalition.blocks[1]) {
      if (p < 1 || p > n) throw std::invalid_argument("coalition player outside 1..n");
      if (listed[static_cast<std::size_t>(p)])
        throw std::invalid_argument("coalition lists a player twice");
      listed[static_cast<std::size_t>(p)] = true;
      out.opponents.push_back(p - 1);
    }
  }
  for (int p = 1; p <= n; ++p)
    if (!listed[static_cast<std::size_t>(p)]) out.opponents.push_back(p - 1);
  std::sort(out.proponents.begin(), out.proponents.end());
  std::sort(out.opponents.begin(), out.opponents.end());
  return out;
}

OptDir query_direction(const Query& query) {
  if (const auto* pb = std::get_if<ProbBound>(&query))
    return pb->rel == CmpOp::le || pb->rel == CmpOp::lt ? OptDir::minimize : OptDir::maximize;
  if (const auto* po = std::get_if<ProbOptimum>(&query)) return po->dir;
  return std::get<RewardOptimum>(query).dir;
}

ActionSplit make_action_split(const CoalitionSplit& split, int n, std::size_t fraction_count) {
  std::vector<std::size_t> weight(static_cast<std::size_t>(n), 1);
  for (int i = n - 2; i >= 0; --i)
    weight[static_cast<std::size_t>(i)] = weight[static_cast<std::size_t>(i) + 1] * fraction_count;

  auto offsets = [&](const std::vector<int>& players) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < players.size(); ++i) count *= fraction_count;
    std::vector<std::size_t> out(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = players.size(); i-- > 0;) {
        out[idx] += (rest % fraction_count) * weight[static_cast<std::size_t>(players[i])];
        rest /= fraction_count;
      }
    }
    return out;
  };

  ActionSplit out;
  out.row_offset = offsets(split.proponents);
  out.col_offset = offsets(split.opponents);
  out.row_count = out.row_offset.size();
  out.col_count = out.col_offset.size();
  return out;
}

MatrixGame state_game(const TransitionModel& model, StateId id, const ActionSplit& split,
                      const std::vector<double>& next_values) {
  MatrixGame g;
  g.rows = split.row_count;
  g.cols = split.col_count;
  g.payoff.resize(g.rows * g.cols);
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      g.at(r, c) = next_values[model.successor(id, split.joint(r, c))];
  return g;
}

StateGameSolution solve_state_game(const MatrixGame& game, OptDir dir) {
  if (dir == OptDir::maximize) {
    MatrixGameSolution sol = solve_matrix_game(game);
    return {sol.value, std::move(sol.row_strategy)};
  }
  MatrixGame flipped = game;
  for (double& v : flipped.payoff) v = -v;
  MatrixGameSolution sol = solve_matrix_game(flipped);
  return {-sol.value, std::move(sol.row_strategy)};
}

ValuationTable compute_valuation(const TransitionModel& model, const PropertyAst& prop,
                                 OptDir dir) {
  check_compatible(model, prop);
  if (prop.path.bound && *prop.path.bound < model.params().k_max) {
    auto family = compute_bounded_family(model, prop, dir, *prop.path.bound);
    return std::move(family.back());
  }

  const LevelSolver solver(model, prop, dir);
  ValuationTable table;
  table.kind = solver.qv.is_reward ? ValuationKind::reward : ValuationKind::probability;
  table.values.assign(model.state_count(), 0.0);

  for (StateId id = static_cast<StateId>(model.state_count()); id-- > 0;) {
    const GameState st = model.state(id);
    if (evaluate_predicate(prop.path.pred, st))
      table.values[id] = target_value(solver.qv, st, model.params().r_init);
    else if (!model.is_terminal(id))
      table.values[id] = solver.continuation(id, table.values);
  }
  return table;
}

std::vector<ValuationTable> compute_bounded_family(const TransitionModel& model,
                                                   const PropertyAst& prop, OptDir dir,
                                                   long long budget) {
  check_compatible(model, prop);
  if (budget < 0) throw std::invalid_argument("step budget must be non-negative");

  const LevelSolver solver(model, prop, dir);
  const ValuationKind kind =
      solver.qv.is_reward ? ValuationKind::reward : ValuationKind::probability;

  std::vector<bool> target(model.state_count());
  std::vector<double> absorbed(model.state_count(), 0.0);
  for (StateId id = 0; id < model.state_count(); ++id) {
    const GameState st = model.state(id);
    target[id] = evaluate_predicate(prop.path.pred, st);
    if (target[id]) absorbed[id] = target_value(solver.qv, st, model.params().r_init);
  }

  std::vector<ValuationTable> family;
  family.reserve(static_cast<std::size_t>(budget) + 1);
  family.push_back({kind, absorbed});

  for (long long j = 1; j <= budget; ++j) {
    ValuationTable next{kind, std::vector<double>(model.state_count(), 0.0)};
    const std::vector<double>& prev = family.back().values;
    for (StateId id = 0; id < model.state_count(); ++id) {
      if (target[id]) next.values[id] = absorbed[id];
      else if (!model.is_terminal(id)) next.values[id] = solver.continuation(id, prev);
    }
    family.push_back(std::move(next));
  }
  return family;
}

CheckResult check(const TransitionModel& model, const PropertyAst& prop) {
  check_compatible(model, prop);

  CheckResult result;
  PropertyAst effective = prop;
  const long long horizon = model.params().k_max + 1;
  if (prop.path.bound && *prop.path.bound > horizon) {
    result.warnings.push_back("step bound " + std::to_string(*prop.path.bound) +
                              " exceeds the horizon; clamped to " + std::to_string(horizon));
    effective.path.bound = horizon;
  }

  const OptDir dir = query_direction(effective.query);
  result.valuation = compute_valuation(model, effective, dir);
  result.value = result.valuation.values[0];

  if (const auto* pb = std::get_if<ProbBound>(&effective.query)) {
    const double theta = pb->threshold;
    const double v = result.value;
    const bool near = std::abs(v - theta) <= kValueTolerance;
    switch (pb->rel) {
      case CmpOp::lt: result.verdict = !near && v < theta; break;
      case CmpOp::le: result.verdict = near || v < theta; break;
      case CmpOp::ge: result.verdict = near || v > theta; break;
      case CmpOp::gt: result.verdict = !near && v > theta; break;
      case CmpOp::eq: {
        // achievability: theta must lie between the two one-sided optima
        ValuationTable low = compute_valuation(model, effective, OptDir::minimize);
        const double lo = low.values[0];
        result.verdict = (v > theta - kValueTolerance) && (lo < theta + kValueTolerance);
        break;
      }
    }
  }
  return result;
}

double QualClassification::ratio() const {
  const std::size_t decided = yes.size() + no.size();
  if (decided == 0) return 0.0;
  return static_cast<double>(yes.size()) / static_cast<double>(decided);
}

QualClassification classify_states(const TransitionModel& model, const PropertyAst& prop) {
  if (std::holds_alternative<RewardOptimum>(prop.query))
    throw std::invalid_argument("classification is defined for probability queries only");

  CheckResult res = check(model, prop);
  QualClassification out;
  for (StateId id = 0; id < model.state_count(); ++id) {
    const double v = res.valuation.values[id];
    if (std::abs(v - 1.0) <= kValueTolerance) out.yes.push_back(id);
    else if (std::abs(v) <= kValueTolerance) out.no.push_back(id);
    else out.maybe.push_back(id);
  }
  return out;
}

}  // namespace vdg
