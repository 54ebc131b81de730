#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vdg/matrix_game.hpp"
#include "vdg/model.hpp"
#include "vdg/proplang.hpp"

namespace vdg {

enum class ValuationKind { probability, reward };

/// One value per state id.
struct ValuationTable {
  ValuationKind kind = ValuationKind::probability;
  std::vector<double> values;
};

struct CheckResult {
  std::optional<bool> verdict;  // set for P<rel><threshold> queries
  double value = 0.0;           // optimum at the initial state
  ValuationTable valuation;
  std::vector<std::string> warnings;
};

/// 0-based player indices on each side. An empty opponent side means
/// everyone optimizes together and per-state play is a plain argmax.
struct CoalitionSplit {
  std::vector<int> proponents;
  std::vector<int> opponents;
  bool cooperative() const { return opponents.empty(); }
};

/// Unlisted players join the opponent side.
CoalitionSplit split_coalition(const Coalition& coalition, int n);

/// Direction the proponents optimize: lower bounds and equality push
/// up, upper bounds push down; optimum queries carry their own.
OptDir query_direction(const Query& query);

/// Factorization of the joint action space into proponent rows and
/// opponent columns; joint(r, c) recovers the full action index.
struct ActionSplit {
  std::size_t row_count = 1;
  std::size_t col_count = 1;
  std::vector<std::size_t> row_offset;
  std::vector<std::size_t> col_offset;
  std::size_t joint(std::size_t r, std::size_t c) const {
    return row_offset[r] + col_offset[c];
  }
};

ActionSplit make_action_split(const CoalitionSplit& split, int n, std::size_t fraction_count);

/// The matrix game played at one non-terminal state when the values a
/// level down are already known.
MatrixGame state_game(const TransitionModel& model, StateId id, const ActionSplit& split,
                      const std::vector<double>& next_values);

struct StateGameSolution {
  double value = 0.0;
  std::vector<double> row_mix;  // one entry per proponent action
};

/// LP value and proponent mix at one state; dir flips the matrix sign
/// so minimizing coalitions reuse the same solver.
StateGameSolution solve_state_game(const MatrixGame& game, OptDir dir);

/// Backward induction over the whole level DAG. Target states absorb
/// with value 1 (or the query's reward expression); non-target
/// terminals are 0. A step bound of at least k_max is the same as no
/// bound; smaller bounds run a budget-indexed sweep.
ValuationTable compute_valuation(const TransitionModel& model, const PropertyAst& prop,
                                 OptDir dir);

/// tables[j] = value with j steps of budget left, j = 0..budget.
std::vector<ValuationTable> compute_bounded_family(const TransitionModel& model,
                                                   const PropertyAst& prop, OptDir dir,
                                                   long long budget);

CheckResult check(const TransitionModel& model, const PropertyAst& prop);

struct QualClassification {
  std::vector<StateId> yes, no, maybe;
  double ratio() const;  // |yes| / (|yes| + |no|)
};

/// Buckets every state by its optimal probability: 1 within 1e-9 is
/// yes, 0 within 1e-9 is no, the rest maybe. Probability queries only.
QualClassification classify_states(const TransitionModel& model, const PropertyAst& prop);

}  // namespace vdg
