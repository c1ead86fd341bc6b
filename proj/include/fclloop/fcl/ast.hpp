#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace fclloop::fcl {

/// Integer literal or trace-boundary counter, optionally negated.
struct NumExpr {
  enum class Kind { Literal, Beg, Max, Inf };
  Kind kind = Kind::Literal;
  std::int64_t value = 0;  // magnitude, literals only
  bool negated = false;

  static NumExpr literal(std::int64_t v) {
    return v < 0 ? NumExpr{Kind::Literal, -v, true} : NumExpr{Kind::Literal, v, false};
  }
  static NumExpr beg() { return {Kind::Beg, 0, false}; }
  static NumExpr max() { return {Kind::Max, 0, false}; }
  static NumExpr inf() { return {Kind::Inf, 0, false}; }
  [[nodiscard]] NumExpr negate() const { return {kind, value, !negated}; }

  bool operator==(const NumExpr&) const = default;
};

struct AttrAccess {
  std::string var;
  std::string attr;
  bool operator==(const AttrAccess&) const = default;
};

struct Cardinality {
  std::string set;
  bool operator==(const Cardinality&) const = default;
};

struct StringLit {
  std::string value;
  bool operator==(const StringLit&) const = default;
};

using Term = std::variant<NumExpr, AttrAccess, Cardinality, StringLit>;

enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Compare {
  Term lhs;
  CmpOp op = CmpOp::Eq;
  Term rhs;
  bool operator==(const Compare&) const = default;
};

struct Member {
  std::string var;
  std::string set;
  bool operator==(const Member&) const = default;
};

/// At least `n` steps of the window of length `t` satisfy `body`.
/// Negative `t` looks into the past.
struct Window {
  NumExpr n;
  NumExpr t;
  FormulaPtr body;
  bool operator==(const Window& other) const;
};

struct Not {
  FormulaPtr body;
  bool operator==(const Not& other) const;
};

enum class BinOp { And, Or, Implies };

struct Binary {
  BinOp op = BinOp::And;
  FormulaPtr lhs;
  FormulaPtr rhs;
  bool operator==(const Binary& other) const;
};

enum class Quantifier { Forall, Exists };

struct Quant {
  Quantifier q = Quantifier::Forall;
  std::string var;
  std::string domain;
  FormulaPtr body;
  bool operator==(const Quant& other) const;
};

struct Formula {
  std::variant<Compare, Member, Window, Not, Binary, Quant> node;
  bool operator==(const Formula&) const = default;
};

/// Deep structural comparison; null pointers compare equal only to null.
bool same(const FormulaPtr& a, const FormulaPtr& b);

FormulaPtr make_compare(Term lhs, CmpOp op, Term rhs);
FormulaPtr make_member(std::string var, std::string set);
FormulaPtr make_window(NumExpr n, NumExpr t, FormulaPtr body);
FormulaPtr make_not(FormulaPtr body);
FormulaPtr make_binary(BinOp op, FormulaPtr lhs, FormulaPtr rhs);
FormulaPtr make_quant(Quantifier q, std::string var, std::string domain, FormulaPtr body);

/// The always-style dual: G[t] body == F[>=t, t] body. Throws NegativeWindow
/// unless t is a non-negative literal or a BEG/MAX counter.
FormulaPtr desugar_always(const NumExpr& t, FormulaPtr body);

/// Longest root-to-leaf path counted in formula nodes.
int depth(const FormulaPtr& f);

enum class Mode { AtStart, AtEachStep };

struct Constraint {
  std::string name;
  Mode mode = Mode::AtStart;
  FormulaPtr formula;
  std::string source_text;
  std::string gloss;  // plain-language description from the preceding `##` lines
};

/// Name, mode and formula equal; source text and gloss are ignored.
bool same_structure(const Constraint& a, const Constraint& b);

}  // namespace fclloop::fcl
