#pragma once

#include <cstddef>
#include <vector>

#include "vdg/params.hpp"
#include "vdg/state.hpp"

namespace vdg {

/// floor(fraction * resources); fraction must lie in [0, 1].
int donation_amount(int resources, double fraction);

/// Per-agent reward of a round with the given pot.
/// Zero below the threshold, r_needed*f/n at it, then a line with
/// slope decay_slope/n above it.
double round_reward(long long total_donated, const GameParams& params);

/// Reward summed over the group; round_reward already divides by n.
double aggregate_reward(double per_agent_reward, int n);

/// Plays one round. Resources update as
///   c_i' = clamp(floor(c_i - s_i + R/n), 0, r_max)
/// where R/n is exactly the per-agent reward.
/// Throws std::invalid_argument on malformed input (wrong action arity,
/// fraction index out of range, resources outside [0, r_max], k out of
/// range for the horizon).
RoundOutcome apply_round(const GameState& state, const JointAction& action,
                         const GameParams& params);

/// Joint actions are numbered with player 1 as the most significant
/// digit in base |fractions|.
std::size_t encode_action(const std::vector<int>& choice, std::size_t fraction_count);
std::vector<int> decode_action(std::size_t index, int n, std::size_t fraction_count);

}  // namespace vdg
