#pragma once

#include <cstddef>
#include <vector>

namespace vdg {

/// Tunable constants of the iterated volunteer's dilemma.
///
/// Defaults reproduce the 3-player, 4-round reference scenario.
struct GameParams {
  int n = 3;            // number of players
  int k_max = 4;        // number of rounds
  int r_init = 100;     // starting resources per player
  int r_needed = 200;   // joint donation needed to win a round
  int r_max = 1000;     // per-player resource cap
  double f = 2.0;       // reward factor at the threshold
  double decay_slope = -0.014;  // reward slope past the threshold
  std::vector<double> fractions = {0.0, 0.5, 1.0};  // donation levels offered to every player

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// |fractions|^n, saturated so oversized action spaces fail the
  /// state-cap projection instead of overflowing.
  std::size_t action_count() const;
};

}  // namespace vdg
