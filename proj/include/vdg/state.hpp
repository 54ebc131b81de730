#pragma once

#include <compare>
#include <vector>

namespace vdg {

/// A point in the game: round counter plus per-player resources.
/// k runs from 1 (initial) to k_max+1 (the terminal level reached
/// after the last round is played).
struct GameState {
  int k = 1;
  std::vector<int> c;

  friend auto operator<=>(const GameState&, const GameState&) = default;
  friend bool operator==(const GameState&, const GameState&) = default;
};

/// One fraction index per player.
struct JointAction {
  std::vector<int> choice;

  friend auto operator<=>(const JointAction&, const JointAction&) = default;
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

/// Everything produced by playing a single round.
struct RoundOutcome {
  std::vector<int> donations;      // floor(fraction * c_i) per player
  long long total_donated = 0;
  bool won = false;                // total_donated >= r_needed
  double per_agent_reward = 0.0;   // r_i of the round, equal for all players
  std::vector<int> next_resources;
};

}  // namespace vdg
