#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vdg/params.hpp"
#include "vdg/state.hpp"

namespace vdg {

struct PropertyError : std::runtime_error {
  enum class Kind { lexical, syntax, semantic };
  Kind kind;
  std::size_t offset;  // byte offset into the property text
  PropertyError(Kind kind_, std::size_t offset_, const std::string& what_);
};

/// coeff_k*k + sum_i coeffs[i]*c_{i+1} + constant, all integer.
struct LinExpr {
  long long coeff_k = 0;
  std::vector<long long> coeffs;  // one per player
  long long constant = 0;

  long long evaluate(const GameState& s) const;
  friend bool operator==(const LinExpr&, const LinExpr&) = default;
};

enum class CmpOp { lt, le, eq, ge, gt };

struct Comparison {
  LinExpr lhs;
  CmpOp op = CmpOp::lt;
  LinExpr rhs;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Immutable predicate tree. conj and disj carry at least two
/// children, negate exactly one; shared_ptr keeps subtrees shareable
/// across threads without copies.
struct PredNode;
using StatePredicate = std::shared_ptr<const PredNode>;

struct PredNode {
  enum class Kind { compare, negate, conj, disj };
  Kind kind = Kind::compare;
  Comparison cmp;                        // kind == compare
  std::vector<StatePredicate> children;  // the other kinds
};

bool predicates_equal(const StatePredicate& a, const StatePredicate& b);
bool evaluate_predicate(const StatePredicate& pred, const GameState& state);

/// Cumulative credit sum_i coeffs[i] * (c_i - r_init).
struct RewardExpr {
  std::vector<std::string> labels;  // as written, one per summand
  std::vector<long long> coeffs;    // one per player

  double evaluate(const GameState& s, int r_init) const;
  friend bool operator==(const RewardExpr&, const RewardExpr&) = default;
};

/// Player blocks as written, 1-based. With one block the listed
/// players are the proponents and everyone else opposes; with two, the
/// first block proposes and unlisted players join the second.
struct Coalition {
  std::vector<std::vector<int>> blocks;
  friend bool operator==(const Coalition&, const Coalition&) = default;
};

struct ProbBound {
  CmpOp rel = CmpOp::ge;
  double threshold = 0.0;
  friend bool operator==(const ProbBound&, const ProbBound&) = default;
};

enum class OptDir { maximize, minimize };

struct ProbOptimum {
  OptDir dir = OptDir::maximize;
  friend bool operator==(const ProbOptimum&, const ProbOptimum&) = default;
};

struct RewardOptimum {
  OptDir dir = OptDir::maximize;
  RewardExpr expr;
  friend bool operator==(const RewardOptimum&, const RewardOptimum&) = default;
};

using Query = std::variant<ProbBound, ProbOptimum, RewardOptimum>;

/// Eventually-reach over a state predicate, optionally step-bounded.
struct PathFormula {
  std::optional<long long> bound;
  std::optional<std::string> label;  // set when written as a quoted label
  StatePredicate pred;               // always resolved
};

bool operator==(const PathFormula& a, const PathFormula& b);

struct PropertyAst {
  Coalition coalition;
  Query query;
  PathFormula path;
};

bool operator==(const PropertyAst& a, const PropertyAst& b);

/// Parses one property. Offsets in errors are byte positions; the
/// params decide which players, variables and labels exist.
PropertyAst parse_property(std::string_view text, const GameParams& params);

/// Canonical text form; parse_property(print_property(ast), params)
/// reproduces a structurally equal tree.
std::string print_property(const PropertyAst& ast);

}  // namespace vdg
