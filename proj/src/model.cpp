#include "vdg/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "vdg/numio.hpp"

namespace vdg {

BuildLimitError::BuildLimitError(std::size_t projected_, std::size_t cap_)
    : std::runtime_error("state cap exceeded: projected " + std::to_string(projected_) +
                         " states, cap " + std::to_string(cap_)),
      projected(projected_),
      cap(cap_) {}

ModelFormatError::ModelFormatError(std::size_t line_, const std::string& what_)
    : std::runtime_error("model file line " + std::to_string(line_) + ": " + what_),
      line(line_) {}

namespace {

// Lexicographic compare of two resource vectors stored flat.
bool cvec_less(const int* a, const int* b, int n) {
  return std::lexicographical_compare(a, a + n, b, b + n);
}

bool cvec_eq(const int* a, const int* b, int n) { return std::equal(a, a + n, b); }

}  // namespace

TransitionModel TransitionModel::build(const GameParams& params, std::size_t state_cap) {
  params.validate();

  TransitionModel m;
  m.params_ = params;
  m.n_ = params.n;
  m.levels_ = params.k_max + 1;
  m.actions_ = params.action_count();

  // Worst case: no state ever merges, so level j+1 holds |A|^j states.
  const std::size_t limit = std::numeric_limits<std::size_t>::max();
  std::size_t projected = 0, level = 1;
  for (int j = 0; j <= params.k_max; ++j) {
    if (projected > limit - level) { projected = limit; break; }
    projected += level;
    if (level > limit / m.actions_) { projected = limit; break; }
    level *= m.actions_;
  }
  if (projected > state_cap) throw BuildLimitError(projected, state_cap);

  const int n = params.n;
  m.resources_.assign(static_cast<std::size_t>(n), params.r_init);
  m.level_offsets_ = {0, 1};

  std::size_t level_begin = 0;  // state index range of the level being expanded
  std::size_t level_end = 1;

  for (int k = 1; k <= params.k_max; ++k) {
    const std::size_t width = level_end - level_begin;
    const std::size_t fan = width * m.actions_;

    // Successor resource vectors for the whole level, then dedup.
    std::vector<int> cand(fan * static_cast<std::size_t>(n));
    GameState st;
    st.k = k;
    st.c.resize(static_cast<std::size_t>(n));
    JointAction act;
    for (std::size_t s = 0; s < width; ++s) {
      const int* src = m.resources_.data() + (level_begin + s) * static_cast<std::size_t>(n);
      std::copy(src, src + n, st.c.begin());
      for (std::size_t a = 0; a < m.actions_; ++a) {
        act.choice = decode_action(a, n, params.fractions.size());
        RoundOutcome out = apply_round(st, act, params);
        std::copy(out.next_resources.begin(), out.next_resources.end(),
                  cand.begin() + (s * m.actions_ + a) * static_cast<std::size_t>(n));
      }
    }

    std::vector<std::size_t> order(fan);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return cvec_less(cand.data() + x * n, cand.data() + y * n, n);
    });

    // Append unique successors in sorted order and remember each
    // candidate's id so the transition table needs no second search.
    std::vector<StateId> cand_id(fan);
    const std::size_t base = level_end;
    std::size_t unique = 0;
    for (std::size_t i = 0; i < fan; ++i) {
      const int* cv = cand.data() + order[i] * n;
      if (unique == 0 ||
          !cvec_eq(cv, m.resources_.data() + (base + unique - 1) * static_cast<std::size_t>(n), n)) {
        if (base + unique + 1 > state_cap) throw BuildLimitError(base + unique + 1, state_cap);
        m.resources_.insert(m.resources_.end(), cv, cv + n);
        ++unique;
      }
      cand_id[order[i]] = static_cast<StateId>(base + unique - 1);
    }

    m.successors_.insert(m.successors_.end(), cand_id.begin(), cand_id.end());
    level_begin = level_end;
    level_end = base + unique;
    m.level_offsets_.push_back(level_end);
  }

  m.first_terminal_ = static_cast<StateId>(level_begin);
  return m;
}

int TransitionModel::round_of(StateId id) const {
  auto it = std::upper_bound(level_offsets_.begin(), level_offsets_.end(),
                             static_cast<std::size_t>(id));
  if (it == level_offsets_.begin() || it == level_offsets_.end())
    throw std::out_of_range("round_of: bad state id");
  return static_cast<int>(it - level_offsets_.begin());
}

std::span<const int> TransitionModel::resources(StateId id) const {
  if (id >= state_count()) throw std::out_of_range("resources: bad state id");
  return {resources_.data() + static_cast<std::size_t>(id) * n_, static_cast<std::size_t>(n_)};
}

GameState TransitionModel::state(StateId id) const {
  auto r = resources(id);
  GameState s;
  s.k = round_of(id);
  s.c.assign(r.begin(), r.end());
  return s;
}

StateId TransitionModel::successor(StateId id, std::size_t action_index) const {
  if (is_terminal(id)) throw std::out_of_range("successor: terminal state");
  if (action_index >= actions_) throw std::out_of_range("successor: bad action index");
  return successors_[static_cast<std::size_t>(id) * actions_ + action_index];
}

RoundOutcome TransitionModel::outcome(StateId id, std::size_t action_index) const {
  if (is_terminal(id)) throw std::out_of_range("outcome: terminal state");
  if (action_index >= actions_) throw std::out_of_range("outcome: bad action index");
  JointAction act;
  act.choice = decode_action(action_index, n_, params_.fractions.size());
  return apply_round(state(id), act, params_);
}

std::pair<StateId, StateId> TransitionModel::level_range(int k) const {
  if (k < 1 || k > levels_) throw std::out_of_range("level_range: bad level");
  return {static_cast<StateId>(level_offsets_[static_cast<std::size_t>(k) - 1]),
          static_cast<StateId>(level_offsets_[static_cast<std::size_t>(k)])};
}

std::size_t TransitionModel::level_size(int k) const {
  auto [lo, hi] = level_range(k);
  return hi - lo;
}

std::optional<StateId> TransitionModel::find(const GameState& s) const {
  if (s.k < 1 || s.k > levels_) return std::nullopt;
  if (static_cast<int>(s.c.size()) != n_) return std::nullopt;
  auto [lo, hi] = level_range(s.k);
  StateId left = lo, right = hi;
  while (left < right) {
    const StateId mid = left + (right - left) / 2;
    if (cvec_less(resources_.data() + static_cast<std::size_t>(mid) * n_, s.c.data(), n_))
      left = mid + 1;
    else
      right = mid;
  }
  if (left < hi && cvec_eq(resources_.data() + static_cast<std::size_t>(left) * n_, s.c.data(), n_))
    return left;
  return std::nullopt;
}

LevelStats level_stats(const TransitionModel& model) {
  LevelStats st;
  for (int k = 1; k <= model.levels(); ++k) st.per_level.push_back(model.level_size(k));
  st.cumulative = model.state_count();
  if (st.per_level.size() >= 2) {
    // Ordinary least squares on (k, ln count).
    const double m = static_cast<double>(st.per_level.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < st.per_level.size(); ++i) {
      const double x = static_cast<double>(i + 1);
      const double y = std::log(static_cast<double>(st.per_level[i]));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    st.fitted_slope = (m * sxy - sx * sy) / denom;
    st.fitted_intercept = (sy - *st.fitted_slope * sx) / m;
  }
  return st;
}

void export_model(const TransitionModel& model, std::ostream& out) {
  const GameParams& p = model.params();
  out << "vdgmodel 1\n";
  out << "params n=" << p.n << " kmax=" << p.k_max << " rinit=" << p.r_init
      << " rneeded=" << p.r_needed << " rmax=" << p.r_max << " f=" << format_double(p.f)
      << " slope=" << format_double(p.decay_slope) << " fractions=";
  for (std::size_t i = 0; i < p.fractions.size(); ++i) {
    if (i) out << ',';
    out << format_double(p.fractions[i]);
  }
  out << '\n';

  out << "states " << model.state_count() << '\n';
  for (StateId id = 0; id < model.state_count(); ++id) {
    out << id << ' ' << model.round_of(id) << ' ';
    auto r = model.resources(id);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      out << r[i];
    }
    out << '\n';
  }

  out << "transitions " << model.transition_count() << '\n';
  for (StateId id = 0; id < model.first_terminal(); ++id) {
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      RoundOutcome o = model.outcome(id, a);
      auto choice = decode_action(a, p.n, p.fractions.size());
      out << id << ' ';
      for (std::size_t i = 0; i < choice.size(); ++i) {
        if (i) out << ',';
        out << choice[i];
      }
      out << ' ' << model.successor(id, a) << ' ' << format_double(o.per_agent_reward) << '\n';
    }
  }
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;
  std::string line{};

  bool next() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ModelFormatError(line_no, msg); }
  void expect() {
    if (!next()) throw ModelFormatError(line_no + 1, "unexpected end of file");
  }
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

long long want_int(LineReader& r, std::string_view s, const std::string& what) {
  try {
    return parse_int(s);
  } catch (const std::invalid_argument&) {
    r.fail("bad " + what + ": '" + std::string(s) + "'");
  }
}

double want_real(LineReader& r, std::string_view s, const std::string& what) {
  try {
    return parse_double(s);
  } catch (const std::invalid_argument&) {
    r.fail("bad " + what + ": '" + std::string(s) + "'");
  }
}

}  // namespace

TransitionModel import_model(std::istream& in) {
  LineReader r{in};

  r.expect();
  if (r.line != "vdgmodel 1") r.fail("expected header 'vdgmodel 1'");

  r.expect();
  auto fields = split(r.line, ' ');
  if (fields.empty() || fields[0] != "params") r.fail("expected params line");
  GameParams p;
  bool seen[8] = {};
  for (std::size_t i = 1; i < fields.size(); ++i) {
    auto kv = split(fields[i], '=');
    if (kv.size() != 2) r.fail("bad params entry '" + std::string(fields[i]) + "'");
    const std::string_view key = kv[0], val = kv[1];
    if (key == "n") { p.n = static_cast<int>(want_int(r, val, "n")); seen[0] = true; }
    else if (key == "kmax") { p.k_max = static_cast<int>(want_int(r, val, "kmax")); seen[1] = true; }
    else if (key == "rinit") { p.r_init = static_cast<int>(want_int(r, val, "rinit")); seen[2] = true; }
    else if (key == "rneeded") { p.r_needed = static_cast<int>(want_int(r, val, "rneeded")); seen[3] = true; }
    else if (key == "rmax") { p.r_max = static_cast<int>(want_int(r, val, "rmax")); seen[4] = true; }
    else if (key == "f") { p.f = want_real(r, val, "f"); seen[5] = true; }
    else if (key == "slope") { p.decay_slope = want_real(r, val, "slope"); seen[6] = true; }
    else if (key == "fractions") {
      p.fractions.clear();
      for (auto part : split(val, ',')) p.fractions.push_back(want_real(r, part, "fraction"));
      seen[7] = true;
    } else r.fail("unknown params key '" + std::string(key) + "'");
  }
  for (bool s : seen)
    if (!s) r.fail("params line is missing a required key");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }

  r.expect();
  fields = split(r.line, ' ');
  if (fields.size() != 2 || fields[0] != "states") r.fail("expected 'states <count>'");
  const long long state_count = want_int(r, fields[1], "state count");
  if (state_count < 1) r.fail("state count must be positive");

  TransitionModel m;
  m.params_ = p;
  m.n_ = p.n;
  m.levels_ = p.k_max + 1;
  m.actions_ = p.action_count();
  m.resources_.reserve(static_cast<std::size_t>(state_count) * p.n);
  m.level_offsets_ = {0};

  int prev_k = 0;
  for (long long id = 0; id < state_count; ++id) {
    r.expect();
    fields = split(r.line, ' ');
    if (fields.size() != 3) r.fail("expected '<id> <k> <c1,..,cn>'");
    if (want_int(r, fields[0], "state id") != id)
      r.fail("state ids must be consecutive from 0; got '" + std::string(fields[0]) + "'");
    const int k = static_cast<int>(want_int(r, fields[1], "round"));
    if (k < 1 || k > m.levels_) r.fail("round outside 1..k_max+1");
    if (k < prev_k) r.fail("levels must be non-decreasing");
    if (id == 0 && k != 1) r.fail("first state must be at level 1");
    if (k > prev_k) {
      if (k != prev_k + 1) r.fail("level " + std::to_string(prev_k + 1) + " is empty");
      while (static_cast<int>(m.level_offsets_.size()) < k)
        m.level_offsets_.push_back(static_cast<std::size_t>(id));
    }
    auto parts = split(fields[2], ',');
    if (static_cast<int>(parts.size()) != p.n) r.fail("expected " + std::to_string(p.n) + " resource entries");
    std::vector<int> cv(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const long long v = want_int(r, parts[i], "resource");
      if (v < 0 || v > p.r_max) r.fail("resource outside [0, r_max]");
      cv[i] = static_cast<int>(v);
    }
    if (id == 0)
      for (int v : cv)
        if (v != p.r_init) r.fail("initial state must be [r_init x n]");
    if (k == prev_k) {
      const int* prev = m.resources_.data() + m.resources_.size() - p.n;
      if (!cvec_less(prev, cv.data(), p.n))
        r.fail("states within a level must be strictly ascending");
    }
    m.resources_.insert(m.resources_.end(), cv.begin(), cv.end());
    prev_k = k;
  }
  if (prev_k != m.levels_) r.fail("model must reach level k_max+1");
  m.level_offsets_.push_back(static_cast<std::size_t>(state_count));
  if (static_cast<int>(m.level_offsets_.size()) != m.levels_ + 1) r.fail("missing levels");
  m.first_terminal_ = static_cast<StateId>(m.level_offsets_[m.levels_ - 1]);

  r.expect();
  fields = split(r.line, ' ');
  if (fields.size() != 2 || fields[0] != "transitions") r.fail("expected 'transitions <count>'");
  const long long tcount = want_int(r, fields[1], "transition count");
  const long long expected =
      static_cast<long long>(m.first_terminal_) * static_cast<long long>(m.actions_);
  if (tcount != expected)
    r.fail("transition count must be " + std::to_string(expected) + " (one per state and action)");

  m.successors_.resize(static_cast<std::size_t>(tcount));
  long long prev_src = -1;
  long long prev_act = -1;
  for (long long t = 0; t < tcount; ++t) {
    r.expect();
    fields = split(r.line, ' ');
    if (fields.size() != 4) r.fail("expected '<src> <a1,..,an> <dst> <reward>'");
    const long long src = want_int(r, fields[0], "source id");
    if (src < 0 || src >= static_cast<long long>(m.first_terminal_))
      r.fail("source must be a non-terminal state id");
    auto parts = split(fields[1], ',');
    if (static_cast<int>(parts.size()) != p.n) r.fail("expected " + std::to_string(p.n) + " action entries");
    std::vector<int> choice(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const long long v = want_int(r, parts[i], "action index");
      if (v < 0 || v >= static_cast<long long>(p.fractions.size()))
        r.fail("action index outside fraction table");
      choice[i] = static_cast<int>(v);
    }
    const long long act = static_cast<long long>(encode_action(choice, p.fractions.size()));
    if (src < prev_src || (src == prev_src && act <= prev_act))
      r.fail("transitions must be sorted by (source, action)");
    if (src != prev_src && (src != prev_src + 1 || act != 0))
      r.fail("every (source, action) pair must appear exactly once");
    if (src == prev_src && act != prev_act + 1)
      r.fail("every (source, action) pair must appear exactly once");
    const long long dst = want_int(r, fields[2], "destination id");
    if (dst < 0 || dst >= state_count) r.fail("destination id out of range");
    const double reward = want_real(r, fields[3], "reward");

    GameState src_state = m.state(static_cast<StateId>(src));
    JointAction a{choice};
    RoundOutcome out = apply_round(src_state, a, p);
    if (m.round_of(static_cast<StateId>(dst)) != src_state.k + 1)
      r.fail("destination must sit one level below the source");
    auto dst_res = m.resources(static_cast<StateId>(dst));
    if (!std::equal(dst_res.begin(), dst_res.end(), out.next_resources.begin()))
      r.fail("destination resources disagree with the dynamics");
    if (reward != out.per_agent_reward)
      r.fail("reward disagrees with the dynamics (expected " +
             format_double(out.per_agent_reward) + ")");

    m.successors_[static_cast<std::size_t>(t)] = static_cast<StateId>(dst);
    prev_src = src;
    prev_act = act;
  }
  if (prev_src + 1 != static_cast<long long>(m.first_terminal_))
    r.fail("transitions are missing for some states");

  while (r.next()) {
    if (!r.line.empty()) r.fail("trailing content after transitions");
  }
  return m;
}

}  // namespace vdg
