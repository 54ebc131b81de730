#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdg/dynamics.hpp"

namespace vdg {

using StateId = std::uint32_t;

/// Build refused or aborted because the state count would pass the cap.
struct BuildLimitError : std::runtime_error {
  std::size_t projected;
  std::size_t cap;
  BuildLimitError(std::size_t projected_, std::size_t cap_);
};

/// Model file rejected; line is 1-based.
struct ModelFormatError : std::runtime_error {
  std::size_t line;
  ModelFormatError(std::size_t line_, const std::string& what_);
};

/// Explicit game graph over all rounds. States are deduplicated on
/// (k, resources); ids are breadth-first, each level sorted by resource
/// vector, so identical parameters always produce identical ids.
///
/// Levels run k = 1..k_max+1; the last level is terminal and has no
/// outgoing transitions. Every other state has exactly one successor
/// per joint action.
class TransitionModel {
 public:
  static constexpr std::size_t kDefaultStateCap = 5'000'000;

  /// Enumerates the reachable graph from (1, [r_init,...]).
  /// Refuses up front when the no-merging projection
  /// sum_{j=0..k_max} |A|^j exceeds the cap, and aborts if the actual
  /// deduplicated count does.
  static TransitionModel build(const GameParams& params,
                               std::size_t state_cap = kDefaultStateCap);

  const GameParams& params() const { return params_; }
  std::size_t state_count() const { return resources_.size() / n_; }
  std::size_t transition_count() const { return successors_.size(); }
  std::size_t action_count() const { return actions_; }
  int levels() const { return levels_; }

  int round_of(StateId id) const;
  std::span<const int> resources(StateId id) const;
  GameState state(StateId id) const;
  bool is_terminal(StateId id) const { return id >= first_terminal_; }
  StateId first_terminal() const { return first_terminal_; }

  StateId successor(StateId id, std::size_t action_index) const;
  /// Recomputes the round played from `id` under the given joint action.
  RoundOutcome outcome(StateId id, std::size_t action_index) const;

  /// Half-open id range of level k (1-based).
  std::pair<StateId, StateId> level_range(int k) const;
  std::size_t level_size(int k) const;

  /// Binary search within the state's level; nullopt when absent.
  std::optional<StateId> find(const GameState& s) const;

 private:
  friend TransitionModel import_model(std::istream& in);
  TransitionModel() = default;

  GameParams params_;
  int n_ = 0;
  int levels_ = 0;
  std::size_t actions_ = 0;
  StateId first_terminal_ = 0;
  std::vector<std::size_t> level_offsets_;  // levels_+1 entries, offsets into ids
  std::vector<int> resources_;              // n_ ints per state
  std::vector<StateId> successors_;         // actions_ entries per non-terminal state
};

struct LevelStats {
  std::vector<std::size_t> per_level;  // index 0 is level k=1
  std::size_t cumulative = 0;
  /// Least-squares fit ln(count) ~ intercept + slope*k over all levels;
  /// unset when fewer than two levels exist.
  std::optional<double> fitted_slope;
  std::optional<double> fitted_intercept;
};

LevelStats level_stats(const TransitionModel& model);

/// Plain-text serialization. Reals use shortest round-trip formatting;
/// output is byte-stable for a given model.
void export_model(const TransitionModel& model, std::ostream& out);

/// Parses and fully validates: header, id order, level structure,
/// transition completeness and sortedness, and every transition is
/// re-derived from the dynamics and compared. Throws ModelFormatError.
TransitionModel import_model(std::istream& in);

}  // namespace vdg
