#include "vdg/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <ostream>

#include "vdg/numio.hpp"

namespace vdg {

namespace {

constexpr double kSupportEps = 1e-9;

std::string action_name(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%g", fraction * 100.0);
  return buf;
}

std::string name_list(const std::vector<int>& choice, const std::vector<double>& fractions) {
  std::string out = "(";
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (i) out += ',';
    out += action_name(fractions[static_cast<std::size_t>(choice[i])]);
  }
  out += ')';
  return out;
}

struct PendingEdge {
  std::size_t action = 0;
  StateId dst = 0;
  double probability = 1.0;
  double reward = 0.0;
};

struct PendingNode {
  std::vector<int> donations;
  std::string mix;
  std::vector<PendingEdge> edges;
};

}  // namespace

StrategyGraph synthesize(const TransitionModel& model, const PropertyAst& prop,
                         const ValuationTable& valuation) {
  const bool want_reward = std::holds_alternative<RewardOptimum>(prop.query);
  if ((valuation.kind == ValuationKind::reward) != want_reward)
    throw std::invalid_argument("valuation kind does not match the query");
  if (valuation.values.size() != model.state_count())
    throw std::invalid_argument("valuation covers " + std::to_string(valuation.values.size()) +
                                " states, model has " + std::to_string(model.state_count()));

  const GameParams& params = model.params();
  const OptDir dir = query_direction(prop.query);

  PropertyAst effective = prop;
  const long long horizon = params.k_max + 1;
  if (effective.path.bound && *effective.path.bound > horizon) effective.path.bound = horizon;
  const bool bounded = effective.path.bound && *effective.path.bound < params.k_max;

  // The valuation must be the one this engine computes for the
  // property; everything downstream assumes consistency.
  std::vector<ValuationTable> family;
  const std::vector<double>* reference = nullptr;
  ValuationTable recomputed;
  if (bounded) {
    family = compute_bounded_family(model, effective, dir, *effective.path.bound);
    reference = &family.back().values;
  } else {
    recomputed = compute_valuation(model, effective, dir);
    reference = &recomputed.values;
  }
  if (*reference != valuation.values)
    throw std::invalid_argument("valuation does not match this model and property");

  const CoalitionSplit split = split_coalition(effective.coalition, params.n);
  const ActionSplit actions = make_action_split(split, params.n, params.fractions.size());

  std::map<StateId, PendingNode> nodes;
  std::deque<StateId> frontier{0};

  while (!frontier.empty()) {
    const StateId id = frontier.front();
    frontier.pop_front();
    if (nodes.count(id)) continue;
    PendingNode& node = nodes[id];

    const GameState st = model.state(id);
    const long long budget = bounded ? *effective.path.bound - (st.k - 1) : -1;
    const bool is_target = evaluate_predicate(effective.path.pred, st);
    if (is_target || model.is_terminal(id) || (bounded && budget <= 0)) continue;

    const std::vector<double>& next =
        bounded ? family[static_cast<std::size_t>(budget) - 1].values : *reference;

    if (split.cooperative()) {
      std::size_t chosen = 0;
      double best = next[model.successor(id, 0)];
      for (std::size_t a = 1; a < model.action_count(); ++a) {
        const double v = next[model.successor(id, a)];
        if (dir == OptDir::maximize ? v > best : v < best) {
          best = v;
          chosen = a;
        }
      }
      RoundOutcome out = model.outcome(id, chosen);
      node.donations = out.donations;
      node.edges.push_back({chosen, model.successor(id, chosen), 1.0, out.per_agent_reward});
      frontier.push_back(model.successor(id, chosen));
      continue;
    }

    const MatrixGame game = state_game(model, id, actions, next);
    const StateGameSolution sol = solve_state_game(game, dir);

    std::vector<std::size_t> support;
    for (std::size_t r = 0; r < game.rows; ++r)
      if (sol.row_mix[r] > kSupportEps) support.push_back(r);

    // Opponents pick any column that is a best response to the mix.
    std::vector<double> response(game.cols, 0.0);
    for (std::size_t c = 0; c < game.cols; ++c)
      for (std::size_t r = 0; r < game.rows; ++r)
        response[c] += sol.row_mix[r] * game.at(r, c);
    double opt = response[0];
    for (double v : response)
      opt = dir == OptDir::maximize ? std::min(opt, v) : std::max(opt, v);
    std::vector<std::size_t> best_cols;
    for (std::size_t c = 0; c < game.cols; ++c)
      if (std::abs(response[c] - opt) <= kSupportEps) best_cols.push_back(c);

    std::string mix;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i) mix += '+';
      const auto choice =
          decode_action(support[i], static_cast<int>(split.proponents.size()),
                        params.fractions.size());
      mix += format_double(sol.row_mix[support[i]]) + "*" + name_list(choice, params.fractions);
    }
    node.mix = std::move(mix);

    for (std::size_t r : support) {
      for (std::size_t c : best_cols) {
        const std::size_t joint = actions.joint(r, c);
        RoundOutcome out = model.outcome(id, joint);
        node.edges.push_back(
            {joint, model.successor(id, joint), sol.row_mix[r], out.per_agent_reward});
        frontier.push_back(model.successor(id, joint));
      }
    }
    std::sort(node.edges.begin(), node.edges.end(),
              [](const PendingEdge& a, const PendingEdge& b) { return a.action < b.action; });
  }

  StrategyGraph graph;
  graph.kind = valuation.kind;
  graph.achieved_value = valuation.values[0];

  std::map<StateId, std::size_t> index;
  for (const auto& [id, pending] : nodes) {
    index[id] = graph.nodes.size();
    StrategyGraph::Node n;
    n.state = id;
    n.k = model.round_of(id);
    auto res = model.resources(id);
    n.resources.assign(res.begin(), res.end());
    n.donations = pending.donations;
    n.mix = pending.mix;
    graph.nodes.push_back(std::move(n));
  }
  for (const auto& [id, pending] : nodes) {
    for (const PendingEdge& e : pending.edges) {
      StrategyGraph::Edge edge;
      edge.src = index.at(id);
      edge.dst = index.at(e.dst);
      edge.action = e.action;
      edge.action_names =
          name_list(decode_action(e.action, params.n, params.fractions.size()), params.fractions);
      edge.per_agent_reward = e.reward;
      edge.probability = e.probability;
      graph.edges.push_back(std::move(edge));
    }
  }
  return graph;
}

void export_dot(const StrategyGraph& graph, std::ostream& out) {
  out << "digraph strategy {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box];\n";
  for (const auto& node : graph.nodes) {
    out << "  s" << node.state << " [label=\"[" << node.k;
    for (std::size_t i = 0; i < node.resources.size(); ++i) {
      out << ", " << node.resources[i] << ", ";
      if (!node.donations.empty()) out << node.donations[i];
    }
    out << "]";
    if (!node.mix.empty()) out << "\\n" << node.mix;
    out << "\"];\n";
  }
  for (const auto& edge : graph.edges) {
    out << "  s" << graph.nodes[edge.src].state << " -> s" << graph.nodes[edge.dst].state
        << " [label=\"" << edge.action_names << " r=" << format_double(edge.per_agent_reward);
    if (edge.probability != 1.0) out << " p=" << format_double(edge.probability);
    out << "\"];\n";
  }
  out << "}\n";
}

double replay_value(const StrategyGraph& graph, const TransitionModel& model,
                    const PropertyAst& prop) {
  if (graph.nodes.empty()) throw std::invalid_argument("replay: empty strategy graph");
  if (graph.nodes[0].state != 0)
    throw std::invalid_argument("replay: strategy does not start at the initial state");

  const bool want_reward = std::holds_alternative<RewardOptimum>(prop.query);
  const RewardExpr* expr =
      want_reward ? &std::get<RewardOptimum>(prop.query).expr : nullptr;

  std::size_t cur = 0;
  while (true) {
    const auto& node = graph.nodes[cur];
    if (!node.mix.empty())
      throw std::invalid_argument("replay: strategy is mixed; only pure chains replay");

    const GameState st = model.state(node.state);
    if (!std::equal(st.c.begin(), st.c.end(), node.resources.begin(), node.resources.end()))
      throw std::invalid_argument("replay: node resources disagree with the model");

    if (evaluate_predicate(prop.path.pred, st))
      return want_reward ? expr->evaluate(st, model.params().r_init) : 1.0;

    std::size_t out_edge = graph.edges.size();
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      if (graph.edges[e].src != cur) continue;
      if (out_edge != graph.edges.size())
        throw std::invalid_argument("replay: strategy is not a single chain");
      out_edge = e;
    }
    if (out_edge == graph.edges.size()) return 0.0;  // ran out of steps or terminal

    const auto& edge = graph.edges[out_edge];
    JointAction act{decode_action(edge.action, model.params().n, model.params().fractions.size())};
    RoundOutcome out = apply_round(st, act, model.params());
    const auto& dst = graph.nodes[edge.dst];
    if (!std::equal(out.next_resources.begin(), out.next_resources.end(),
                    dst.resources.begin(), dst.resources.end()))
      throw std::invalid_argument("replay: transition disagrees with the dynamics");
    if (out.per_agent_reward != edge.per_agent_reward)
      throw std::invalid_argument("replay: edge reward disagrees with the dynamics");
    cur = edge.dst;
  }
}

}  // namespace vdg
