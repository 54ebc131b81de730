#include "vdg/proplang.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "vdg/numio.hpp"

namespace vdg {

PropertyError::PropertyError(Kind kind_, std::size_t offset_, const std::string& what_)
    : std::runtime_error("property offset " + std::to_string(offset_) + ": " + what_),
      kind(kind_),
      offset(offset_) {}

long long LinExpr::evaluate(const GameState& s) const {
  long long v = constant + coeff_k * s.k;
  for (std::size_t i = 0; i < coeffs.size() && i < s.c.size(); ++i)
    v += coeffs[i] * s.c[i];
  return v;
}

double RewardExpr::evaluate(const GameState& s, int r_init) const {
  double v = 0.0;
  for (std::size_t i = 0; i < coeffs.size() && i < s.c.size(); ++i)
    v += static_cast<double>(coeffs[i]) * (s.c[i] - r_init);
  return v;
}

bool predicates_equal(const StatePredicate& a, const StatePredicate& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == PredNode::Kind::compare) return a->cmp == b->cmp;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!predicates_equal(a->children[i], b->children[i])) return false;
  return true;
}

bool evaluate_predicate(const StatePredicate& pred, const GameState& state) {
  switch (pred->kind) {
    case PredNode::Kind::compare: {
      const long long l = pred->cmp.lhs.evaluate(state);
      const long long r = pred->cmp.rhs.evaluate(state);
      switch (pred->cmp.op) {
        case CmpOp::lt: return l < r;
        case CmpOp::le: return l <= r;
        case CmpOp::eq: return l == r;
        case CmpOp::ge: return l >= r;
        case CmpOp::gt: return l > r;
      }
      return false;
    }
    case PredNode::Kind::negate:
      return !evaluate_predicate(pred->children[0], state);
    case PredNode::Kind::conj:
      for (const auto& ch : pred->children)
        if (!evaluate_predicate(ch, state)) return false;
      return true;
    case PredNode::Kind::disj:
      for (const auto& ch : pred->children)
        if (evaluate_predicate(ch, state)) return true;
      return false;
  }
  return false;
}

bool operator==(const PathFormula& a, const PathFormula& b) {
  return a.bound == b.bound && a.label == b.label && predicates_equal(a.pred, b.pred);
}

bool operator==(const PropertyAst& a, const PropertyAst& b) {
  return a.coalition == b.coalition && a.query == b.query && a.path == b.path;
}

namespace {

enum class Tok {
  end, ident, number, string,
  langle2, rangle2, lparen, rparen, lbracket, rbracket, lbrace, rbrace,
  comma, colon, plus, minus, star, bang, amp, pipe, question,
  lt, le, eq, ge, gt
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

[[noreturn]] void fail(PropertyError::Kind kind, std::size_t offset, const std::string& msg) {
  throw PropertyError(kind, offset, msg);
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t at, std::string text = {}) {
    out.push_back({k, std::move(text), at});
  };
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') { ++i; continue; }
    const std::size_t at = i;
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      push(Tok::ident, at, std::string(src.substr(i, j - i)));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        if (j >= src.size() || !std::isdigit(static_cast<unsigned char>(src[j])))
          fail(PropertyError::Kind::lexical, j, "digit expected after decimal point");
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t e = j + 1;
        if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
        if (e >= src.size() || !std::isdigit(static_cast<unsigned char>(src[e])))
          fail(PropertyError::Kind::lexical, j, "malformed exponent");
        ++e;
        while (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) ++e;
        j = e;
      }
      push(Tok::number, at, std::string(src.substr(i, j - i)));
      i = j;
      continue;
    }
    if (ch == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"') ++j;
      if (j >= src.size()) fail(PropertyError::Kind::lexical, at, "unterminated string");
      push(Tok::string, at, std::string(src.substr(i + 1, j - i - 1)));
      i = j + 1;
      continue;
    }
    auto two = [&](char second) { return i + 1 < src.size() && src[i + 1] == second; };
    switch (ch) {
      case '<':
        if (two('<')) { push(Tok::langle2, at); i += 2; }
        else if (two('=')) { push(Tok::le, at); i += 2; }
        else { push(Tok::lt, at); ++i; }
        continue;
      case '>':
        if (two('>')) { push(Tok::rangle2, at); i += 2; }
        else if (two('=')) { push(Tok::ge, at); i += 2; }
        else { push(Tok::gt, at); ++i; }
        continue;
      case '(': push(Tok::lparen, at); ++i; continue;
      case ')': push(Tok::rparen, at); ++i; continue;
      case '[': push(Tok::lbracket, at); ++i; continue;
      case ']': push(Tok::rbracket, at); ++i; continue;
      case '{': push(Tok::lbrace, at); ++i; continue;
      case '}': push(Tok::rbrace, at); ++i; continue;
      case ',': push(Tok::comma, at); ++i; continue;
      case ':': push(Tok::colon, at); ++i; continue;
      case '+': push(Tok::plus, at); ++i; continue;
      case '-': push(Tok::minus, at); ++i; continue;
      case '*': push(Tok::star, at); ++i; continue;
      case '!': push(Tok::bang, at); ++i; continue;
      case '&': push(Tok::amp, at); ++i; continue;
      case '|': push(Tok::pipe, at); ++i; continue;
      case '=': push(Tok::eq, at); ++i; continue;
      case '?': push(Tok::question, at); ++i; continue;
      default:
        fail(PropertyError::Kind::lexical, at,
             std::string("unexpected character '") + ch + "'");
    }
  }
  push(Tok::end, src.size());
  return out;
}

bool is_integer_text(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

class Parser {
 public:
  Parser(std::string_view text, const GameParams& params)
      : tokens_(lex(text)), params_(params) {}

  PropertyAst parse() {
    PropertyAst ast;
    ast.coalition = parse_coalition();
    parse_query_and_path(ast);
    expect(Tok::end, "unexpected trailing input");
    return ast;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const GameParams& params_;

  const Token& peek() const { return tokens_[pos_]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, const std::string& msg) {
    if (!at(k)) fail(PropertyError::Kind::syntax, peek().offset, msg);
    return tokens_[pos_++];
  }
  [[noreturn]] void syntax(const std::string& msg) const {
    fail(PropertyError::Kind::syntax, peek().offset, msg);
  }
  [[noreturn]] void semantic(std::size_t offset, const std::string& msg) const {
    fail(PropertyError::Kind::semantic, offset, msg);
  }

  int parse_player() {
    const Token& t = expect(Tok::ident, "expected a player (p1, p2, ...)");
    if (t.text.size() < 2 || t.text[0] != 'p' || !is_integer_text(t.text.substr(1)))
      fail(PropertyError::Kind::syntax, t.offset, "expected a player (p1, p2, ...)");
    const long long idx = parse_int(t.text.substr(1));
    if (idx < 1 || idx > params_.n)
      semantic(t.offset, "player p" + std::to_string(idx) + " outside 1..n");
    return static_cast<int>(idx);
  }

  Coalition parse_coalition() {
    expect(Tok::langle2, "property must start with a coalition <<...>>");
    Coalition co;
    std::vector<bool> used(static_cast<std::size_t>(params_.n) + 1, false);
    auto parse_block = [&] {
      std::vector<int> block;
      do {
        const std::size_t at = peek().offset;
        const int p = parse_player();
        if (used[static_cast<std::size_t>(p)])
          semantic(at, "player p" + std::to_string(p) + " listed twice");
        used[static_cast<std::size_t>(p)] = true;
        block.push_back(p);
      } while (accept(Tok::comma));
      return block;
    };
    co.blocks.push_back(parse_block());
    while (at(Tok::colon)) {
      const std::size_t at_colon = peek().offset;
      ++pos_;
      if (co.blocks.size() == 2)
        semantic(at_colon,
                 "at most two coalitions are supported; use <<A:B>> with every player "
                 "assigned to one of the two sides");
      co.blocks.push_back(parse_block());
    }
    expect(Tok::rangle2, "expected '>>' to close the coalition");
    return co;
  }

  CmpOp parse_cmpop(const std::string& msg) {
    if (accept(Tok::lt)) return CmpOp::lt;
    if (accept(Tok::le)) return CmpOp::le;
    if (accept(Tok::eq)) return CmpOp::eq;
    if (accept(Tok::ge)) return CmpOp::ge;
    if (accept(Tok::gt)) return CmpOp::gt;
    syntax(msg);
  }

  double parse_threshold() {
    const Token& t = expect(Tok::number, "expected a probability threshold");
    const double v = parse_double(t.text);
    if (!(v >= 0.0) || !(v <= 1.0))
      semantic(t.offset, "probability threshold must lie in [0, 1]");
    return v;
  }

  OptDir parse_dir_ident() {
    const Token& t = expect(Tok::ident, "expected max or min");
    if (t.text == "max") return OptDir::maximize;
    if (t.text == "min") return OptDir::minimize;
    fail(PropertyError::Kind::syntax, t.offset, "expected max or min");
  }

  void expect_query_suffix() {
    expect(Tok::eq, "expected '=?'");
    expect(Tok::question, "expected '=?'");
  }

  StatePredicate resolve_state_label(const std::string& label, std::size_t offset) {
    if (label == "good") {
      // total credit strictly above twice the threshold
      auto node = std::make_shared<PredNode>();
      node->kind = PredNode::Kind::compare;
      node->cmp.lhs.coeffs.assign(static_cast<std::size_t>(params_.n), 1);
      node->cmp.op = CmpOp::gt;
      node->cmp.rhs.coeffs.assign(static_cast<std::size_t>(params_.n), 0);
      node->cmp.rhs.constant = 2LL * params_.r_needed;
      node->cmp.lhs.coeff_k = 0;
      return node;
    }
    semantic(offset, "unknown state label \"" + label + "\"");
  }

  std::vector<long long> resolve_reward_label(const std::string& label, std::size_t offset) {
    std::vector<long long> coeffs(static_cast<std::size_t>(params_.n), 0);
    if (label.size() >= 2 && label[0] == 'r' && is_integer_text(label.substr(1))) {
      const long long idx = parse_int(label.substr(1));
      if (idx < 1 || idx > params_.n)
        semantic(offset, "reward label \"" + label + "\" names a player outside 1..n");
      coeffs[static_cast<std::size_t>(idx - 1)] = 1;
      return coeffs;
    }
    if (label.size() > 4 && label.rfind("done", 0) == 0 && is_integer_text(label.substr(4))) {
      int prev = 0;
      for (std::size_t i = 4; i < label.size(); ++i) {
        const int d = label[i] - '0';
        if (d < 1 || d > params_.n)
          semantic(offset, "reward label \"" + label + "\" names a player outside 1..n");
        if (d <= prev)
          semantic(offset, "reward label \"" + label + "\" must list players in ascending order");
        coeffs[static_cast<std::size_t>(d - 1)] = 1;
        prev = d;
      }
      return coeffs;
    }
    semantic(offset, "unknown reward label \"" + label + "\"");
  }

  PathFormula parse_path_brackets() {
    expect(Tok::lbracket, "expected '['");
    PathFormula path = parse_path_body();
    expect(Tok::rbracket, "expected ']'");
    return path;
  }

  PathFormula parse_path_body() {
    const Token& f = expect(Tok::ident, "expected path operator F");
    if (f.text != "F") {
      if (f.text == "G" || f.text == "U" || f.text == "X")
        fail(PropertyError::Kind::syntax, f.offset,
             "unsupported path operator '" + f.text + "'; only F is available");
      fail(PropertyError::Kind::syntax, f.offset, "expected path operator F");
    }
    PathFormula path;
    if (accept(Tok::le)) {
      const Token& b = expect(Tok::number, "expected an integer step bound");
      if (!is_integer_text(b.text))
        fail(PropertyError::Kind::syntax, b.offset, "expected an integer step bound");
      path.bound = parse_int(b.text);
    }
    if (at(Tok::string)) {
      const Token& t = tokens_[pos_++];
      path.label = t.text;
      path.pred = resolve_state_label(t.text, t.offset);
    } else {
      path.pred = parse_disj();
    }
    return path;
  }

  void parse_query_and_path(PropertyAst& ast) {
    const Token& head = expect(Tok::ident, "expected P, Pmax, Pmin, R, max or min");
    if (head.text == "P") {
      ProbBound q;
      q.rel = parse_cmpop("expected a comparison after P");
      q.threshold = parse_threshold();
      ast.query = q;
      ast.path = parse_path_brackets();
      return;
    }
    if (head.text == "Pmax" || head.text == "Pmin") {
      ProbOptimum q;
      q.dir = head.text == "Pmax" ? OptDir::maximize : OptDir::minimize;
      expect_query_suffix();
      ast.query = q;
      ast.path = parse_path_brackets();
      return;
    }
    if (head.text == "R") {
      RewardOptimum q;
      expect(Tok::lbrace, "expected '{' after R");
      const Token& lab = expect(Tok::string, "expected a quoted reward label");
      q.expr.labels.push_back(lab.text);
      q.expr.coeffs = resolve_reward_label(lab.text, lab.offset);
      expect(Tok::rbrace, "expected '}' after the reward label");
      q.dir = parse_dir_ident();
      expect_query_suffix();
      ast.query = std::move(q);
      ast.path = parse_path_brackets();
      return;
    }
    if (head.text == "max" || head.text == "min") {
      RewardOptimum q;
      q.dir = head.text == "max" ? OptDir::maximize : OptDir::minimize;
      q.expr.coeffs.assign(static_cast<std::size_t>(params_.n), 0);
      expect_query_suffix();
      expect(Tok::lparen, "expected '(' after =?");
      bool first = true;
      PathFormula shared;
      do {
        const Token& r = expect(Tok::ident, "expected a reward term R{...}[...]");
        if (r.text != "R")
          fail(PropertyError::Kind::syntax, r.offset, "expected a reward term R{...}[...]");
        expect(Tok::lbrace, "expected '{' after R");
        const Token& lab = expect(Tok::string, "expected a quoted reward label");
        q.expr.labels.push_back(lab.text);
        auto coeffs = resolve_reward_label(lab.text, lab.offset);
        for (std::size_t i = 0; i < coeffs.size(); ++i) q.expr.coeffs[i] += coeffs[i];
        expect(Tok::rbrace, "expected '}' after the reward label");
        const std::size_t path_at = peek().offset;
        PathFormula p = parse_path_brackets();
        if (first) {
          shared = std::move(p);
          first = false;
        } else if (!(p == shared)) {
          semantic(path_at, "summed reward terms must share one path formula");
        }
      } while (accept(Tok::plus));
      expect(Tok::rparen, "expected ')' to close the reward sum");
      ast.query = std::move(q);
      ast.path = std::move(shared);
      return;
    }
    fail(PropertyError::Kind::syntax, head.offset, "expected P, Pmax, Pmin, R, max or min");
  }

  // predicate grammar: disj := conj ('|' conj)*, conj := unary ('&' unary)*,
  // unary := '!' unary | '(' disj ')' | comparison
  StatePredicate parse_disj() {
    std::vector<StatePredicate> parts;
    parts.push_back(parse_conj());
    while (accept(Tok::pipe)) parts.push_back(parse_conj());
    if (parts.size() == 1) return parts[0];
    auto node = std::make_shared<PredNode>();
    node->kind = PredNode::Kind::disj;
    node->children = std::move(parts);
    return node;
  }

  StatePredicate parse_conj() {
    std::vector<StatePredicate> parts;
    parts.push_back(parse_unary());
    while (accept(Tok::amp)) parts.push_back(parse_unary());
    if (parts.size() == 1) return parts[0];
    auto node = std::make_shared<PredNode>();
    node->kind = PredNode::Kind::conj;
    node->children = std::move(parts);
    return node;
  }

  StatePredicate parse_unary() {
    if (accept(Tok::bang)) {
      auto node = std::make_shared<PredNode>();
      node->kind = PredNode::Kind::negate;
      node->children.push_back(parse_unary());
      return node;
    }
    if (accept(Tok::lparen)) {
      StatePredicate inner = parse_disj();
      expect(Tok::rparen, "expected ')'");
      return inner;
    }
    auto node = std::make_shared<PredNode>();
    node->kind = PredNode::Kind::compare;
    node->cmp.lhs = parse_linexpr();
    node->cmp.op = parse_cmpop("expected a comparison operator");
    node->cmp.rhs = parse_linexpr();
    return node;
  }

  LinExpr parse_linexpr() {
    LinExpr e;
    e.coeffs.assign(static_cast<std::size_t>(params_.n), 0);
    parse_term(e, accept(Tok::minus) ? -1 : 1);
    while (true) {
      if (accept(Tok::plus)) parse_term(e, 1);
      else if (accept(Tok::minus)) parse_term(e, -1);
      else break;
    }
    return e;
  }

  void parse_term(LinExpr& e, long long sign) {
    if (at(Tok::number)) {
      const Token& t = tokens_[pos_++];
      if (!is_integer_text(t.text))
        fail(PropertyError::Kind::syntax, t.offset, "expected an integer coefficient");
      const long long v = parse_int(t.text);
      if (accept(Tok::star)) add_var(e, sign * v);
      else e.constant += sign * v;
      return;
    }
    if (at(Tok::ident)) {
      add_var(e, sign);
      return;
    }
    syntax("expected a term (number, k or c<i>)");
  }

  void add_var(LinExpr& e, long long coeff) {
    const Token& t = expect(Tok::ident, "expected k or c<i>");
    if (t.text == "k") {
      e.coeff_k += coeff;
      return;
    }
    if (t.text.size() >= 2 && t.text[0] == 'c' && is_integer_text(t.text.substr(1))) {
      const long long idx = parse_int(t.text.substr(1));
      if (idx < 1 || idx > params_.n)
        semantic(t.offset, "variable c" + std::to_string(idx) + " outside 1..n");
      e.coeffs[static_cast<std::size_t>(idx - 1)] += coeff;
      return;
    }
    semantic(t.offset, "unknown variable '" + t.text + "'");
  }
};

std::string cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::eq: return "=";
    case CmpOp::ge: return ">=";
    case CmpOp::gt: return ">";
  }
  return "?";
}

std::string linexpr_text(const LinExpr& e) {
  std::string out;
  auto add_term = [&](long long coeff, const std::string& var) {
    if (coeff == 0) return;
    if (out.empty()) {
      if (coeff == -1) out += '-';
      else if (coeff != 1) out += std::to_string(coeff) + "*";
    } else {
      out += coeff < 0 ? '-' : '+';
      const long long mag = coeff < 0 ? -coeff : coeff;
      if (mag != 1) out += std::to_string(mag) + "*";
    }
    out += var;
  };
  for (std::size_t i = 0; i < e.coeffs.size(); ++i)
    add_term(e.coeffs[i], "c" + std::to_string(i + 1));
  add_term(e.coeff_k, "k");
  if (e.constant != 0 || out.empty()) {
    if (out.empty()) out = std::to_string(e.constant);
    else out += (e.constant < 0 ? "-" : "+") + std::to_string(std::abs(e.constant));
  }
  return out;
}

std::string pred_text(const StatePredicate& p) {
  switch (p->kind) {
    case PredNode::Kind::compare:
      return linexpr_text(p->cmp.lhs) + cmp_text(p->cmp.op) + linexpr_text(p->cmp.rhs);
    case PredNode::Kind::negate:
      return "!(" + pred_text(p->children[0]) + ")";
    case PredNode::Kind::conj: {
      std::string out;
      for (std::size_t i = 0; i < p->children.size(); ++i) {
        if (i) out += '&';
        const auto& ch = p->children[i];
        const bool parens =
            ch->kind == PredNode::Kind::conj || ch->kind == PredNode::Kind::disj;
        out += parens ? "(" + pred_text(ch) + ")" : pred_text(ch);
      }
      return out;
    }
    case PredNode::Kind::disj: {
      std::string out;
      for (std::size_t i = 0; i < p->children.size(); ++i) {
        if (i) out += '|';
        const auto& ch = p->children[i];
        const bool parens = ch->kind == PredNode::Kind::disj;
        out += parens ? "(" + pred_text(ch) + ")" : pred_text(ch);
      }
      return out;
    }
  }
  return {};
}

std::string path_text(const PathFormula& path) {
  std::string out = "F";
  if (path.bound) out += "<=" + std::to_string(*path.bound);
  out += ' ';
  if (path.label) out += '"' + *path.label + '"';
  else out += pred_text(path.pred);
  return out;
}

}  // namespace

PropertyAst parse_property(std::string_view text, const GameParams& params) {
  params.validate();
  return Parser(text, params).parse();
}

std::string print_property(const PropertyAst& ast) {
  std::string out = "<<";
  for (std::size_t b = 0; b < ast.coalition.blocks.size(); ++b) {
    if (b) out += ':';
    const auto& block = ast.coalition.blocks[b];
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (i) out += ',';
      out += 'p' + std::to_string(block[i]);
    }
  }
  out += ">>";

  const std::string path = path_text(ast.path);
  if (const auto* pb = std::get_if<ProbBound>(&ast.query)) {
    out += "P" + cmp_text(pb->rel) + format_double(pb->threshold) + "[" + path + "]";
  } else if (const auto* po = std::get_if<ProbOptimum>(&ast.query)) {
    out += po->dir == OptDir::maximize ? "Pmax" : "Pmin";
    out += "=?[" + path + "]";
  } else {
    const auto& ro = std::get<RewardOptimum>(ast.query);
    const std::string dir = ro.dir == OptDir::maximize ? "max" : "min";
    if (ro.expr.labels.size() == 1) {
      out += "R{\"" + ro.expr.labels[0] + "\"}" + dir + "=?[" + path + "]";
    } else {
      out += dir + "=?(";
      for (std::size_t i = 0; i < ro.expr.labels.size(); ++i) {
        if (i) out += '+';
        out += "R{\"" + ro.expr.labels[i] + "\"}[" + path + "]";
      }
      out += ')';
    }
  }
  return out;
}

}  // namespace vdg
