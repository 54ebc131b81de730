#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vdg/engine.hpp"

namespace vdg {

/// Witness strategy, closed under the opponents' best responses and
/// ready for rendering: nodes carry the display fields directly.
struct StrategyGraph {
  struct Node {
    StateId state = 0;
    int k = 1;
    std::vector<int> resources;
    /// Donations of the chosen joint action; empty on stop nodes and
    /// wherever play is mixed, which renders as blanks.
    std::vector<int> donations;
    /// Proponent mix annotation for two-coalition nodes, empty otherwise.
    std::string mix;
  };
  struct Edge {
    std::size_t src = 0;  // node indices
    std::size_t dst = 0;
    std::size_t action = 0;  // joint action index
    std::string action_names;
    double per_agent_reward = 0.0;
    /// Probability the proponents place on their part of the action;
    /// 1 for pure play.
    double probability = 1.0;
  };

  std::vector<Node> nodes;  // ascending state id; initial state first
  std::vector<Edge> edges;  // sorted by (source node, action index)
  double achieved_value = 0.0;
  ValuationKind kind = ValuationKind::probability;
};

/// Extracts an optimal strategy for the property from a valuation
/// produced by check() on the same model. Cooperative queries yield a
/// pure chain (ties break to the lowest action index); two-coalition
/// queries yield the proponents' mix with one branch per opponent best
/// response. Throws std::invalid_argument when the valuation does not
/// belong to the property and model.
StrategyGraph synthesize(const TransitionModel& model, const PropertyAst& prop,
                         const ValuationTable& valuation);

/// Graphviz rendering; byte-stable for a given graph.
void export_dot(const StrategyGraph& graph, std::ostream& out);

/// Re-simulates a pure cooperative strategy through the dynamics and
/// returns the value it actually attains; bitwise equal to the
/// engine's optimum. Throws on mixed strategies and on graphs that
/// disagree with the dynamics.
double replay_value(const StrategyGraph& graph, const TransitionModel& model,
                    const PropertyAst& prop);

}  // namespace vdg
