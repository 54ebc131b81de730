#include "vdg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vdg {

void GameParams::validate() const {
  if (n < 1) throw std::invalid_argument("params: n must be >= 1");
  if (k_max < 1) throw std::invalid_argument("params: k_max must be >= 1");
  if (r_init < 0) throw std::invalid_argument("params: r_init must be >= 0");
  if (r_needed < 1) throw std::invalid_argument("params: r_needed must be >= 1");
  if (r_max < r_init) throw std::invalid_argument("params: r_max must be >= r_init");
  if (!(f > 0.0)) throw std::invalid_argument("params: f must be > 0");
  if (!(decay_slope <= 0.0) || !std::isfinite(decay_slope))
    throw std::invalid_argument("params: decay_slope must be <= 0");
  if (fractions.empty()) throw std::invalid_argument("params: fractions must be non-empty");
  for (double q : fractions)
    if (!(q >= 0.0) || !(q <= 1.0))
      throw std::invalid_argument("params: fractions must lie in [0, 1]");
}

std::size_t GameParams::action_count() const {
  const std::size_t limit = std::numeric_limits<std::size_t>::max();
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) {
    if (count > limit / fractions.size()) return limit;
    count *= fractions.size();
  }
  return count;
}

int donation_amount(int resources, double fraction) {
  if (resources < 0) throw std::invalid_argument("donation_amount: negative resources");
  if (!(fraction >= 0.0) || !(fraction <= 1.0))
    throw std::invalid_argument("donation_amount: fraction outside [0, 1]");
  return static_cast<int>(std::floor(fraction * resources));
}

double round_reward(long long total_donated, const GameParams& params) {
  if (total_donated < 0) throw std::invalid_argument("round_reward: negative pot");
  if (total_donated < params.r_needed) return 0.0;
  const double over = static_cast<double>(total_donated - params.r_needed);
  return (params.decay_slope * over + params.r_needed * params.f) / params.n;
}

double aggregate_reward(double per_agent_reward, int n) {
  return per_agent_reward * n;
}

RoundOutcome apply_round(const GameState& state, const JointAction& action,
                         const GameParams& params) {
  if (static_cast<int>(state.c.size()) != params.n)
    throw std::invalid_argument("apply_round: state has " + std::to_string(state.c.size()) +
                                " resource entries, expected " + std::to_string(params.n));
  if (static_cast<int>(action.choice.size()) != params.n)
    throw std::invalid_argument("apply_round: action has " + std::to_string(action.choice.size()) +
                                " choices, expected " + std::to_string(params.n));
  if (state.k < 1 || state.k > params.k_max)
    throw std::invalid_argument("apply_round: round " + std::to_string(state.k) +
                                " outside 1.." + std::to_string(params.k_max));

  RoundOutcome out;
  out.donations.resize(params.n);
  for (int i = 0; i < params.n; ++i) {
    const int ci = state.c[i];
    if (ci < 0 || ci > params.r_max)
      throw std::invalid_argument("apply_round: resources outside [0, r_max]");
    const int qi = action.choice[i];
    if (qi < 0 || qi >= static_cast<int>(params.fractions.size()))
      throw std::invalid_argument("apply_round: fraction index out of range");
    out.donations[i] = donation_amount(ci, params.fractions[qi]);
    out.total_donated += out.donations[i];
  }

  out.won = out.total_donated >= params.r_needed;
  out.per_agent_reward = round_reward(out.total_donated, params);

  out.next_resources.resize(params.n);
  for (int i = 0; i < params.n; ++i) {
    const double raw = std::floor(state.c[i] - out.donations[i] + out.per_agent_reward);
    const int next = static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(params.r_max)));
    out.next_resources[i] = next;
  }
  return out;
}

std::size_t encode_action(const std::vector<int>& choice, std::size_t fraction_count) {
  std::size_t index = 0;
  for (int q : choice) {
    if (q < 0 || static_cast<std::size_t>(q) >= fraction_count)
      throw std::invalid_argument("encode_action: fraction index out of range");
    index = index * fraction_count + static_cast<std::size_t>(q);
  }
  return index;
}

std::vector<int> decode_action(std::size_t index, int n, std::size_t fraction_count) {
  std::vector<int> choice(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    choice[static_cast<std::size_t>(i)] = static_cast<int>(index % fraction_count);
    index /= fraction_count;
  }
  if (index != 0) throw std::invalid_argument("decode_action: index out of range");
  return choice;
}

}  // namespace vdg
