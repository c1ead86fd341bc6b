#include "fclloop/fcl/printer.hpp"

namespace fclloop::fcl {

namespace {

// Binding strength, loosest first.
enum Prec { kQuant = 0, kImplies = 1, kOr = 2, kAnd = 3, kUnary = 4 };

int precedence(const FormulaPtr& f) {
  if (const auto* b = std::get_if<Binary>(&f->node)) {
    switch (b->op) {
      case BinOp::Implies:
        return kImplies;
      case BinOp::Or:
        return kOr;
      case BinOp::And:
        return kAnd;
    }
  }
  if (std::holds_alternative<Quant>(f->node)) return kQuant;
  return kUnary;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string wrap(const FormulaPtr& f, bool parens) {
  std::string inner = render(f);
  return parens ? "(" + inner + ")" : inner;
}

}  // namespace

std::string render(const NumExpr& n) {
  std::string out = n.negated ? "-" : "";
  switch (n.kind) {
    case NumExpr::Kind::Literal:
      return out + std::to_string(n.value);
    case NumExpr::Kind::Beg:
      return out + "BEG";
    case NumExpr::Kind::Max:
      return out + "MAX";
    case NumExpr::Kind::Inf:
      return out + "INF";
  }
  return out;
}

std::string render(CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return "<";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Eq:
      return "==";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Ge:
      return ">=";
    case CmpOp::Gt:
      return ">";
  }
  return "==";
}

std::string render(const Term& term) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, NumExpr>) {
          return render(t);
        } else if constexpr (std::is_same_v<T, AttrAccess>) {
          return t.var + "." + t.attr;
        } else if constexpr (std::is_same_v<T, Cardinality>) {
          return "count(" + t.set + ")";
        } else {
          return quote(t.value);
        }
      },
      term);
}

std::string render(const FormulaPtr& formula) {
  if (!formula) return "<null>";
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Compare>) {
          return render(node.lhs) + " " + render(node.op) + " " + render(node.rhs);
        } else if constexpr (std::is_same_v<T, Member>) {
          return node.var + " in " + node.set;
        } else if constexpr (std::is_same_v<T, Window>) {
          std::string body = "(" + render(node.body) + ")";
          if (node.t.negated) {
            NumExpr span = node.t.negate();
            return "P[>=" + render(node.n) + ", " + render(span) + "]" + body;
          }
          if (node.n == node.t && node.t.kind != NumExpr::Kind::Inf) {
            return "G[" + render(node.t) + "]" + body;
          }
          return "F[>=" + render(node.n) + ", " + render(node.t) + "]" + body;
        } else if constexpr (std::is_same_v<T, Not>) {
          return "not " + wrap(node.body, precedence(node.body) < kUnary);
        } else if constexpr (std::is_same_v<T, Binary>) {
          int lp = precedence(node.lhs);
          int rp = precedence(node.rhs);
          switch (node.op) {
            case BinOp::Implies:
              return wrap(node.lhs, lp <= kImplies) + " implies " + wrap(node.rhs, rp < kImplies);
            case BinOp::Or:
              return wrap(node.lhs, lp < kOr) + " or " + wrap(node.rhs, rp <= kOr);
            case BinOp::And:
              return wrap(node.lhs, lp < kAnd) + " and " + wrap(node.rhs, rp <= kAnd);
          }
          return {};
        } else {
          return std::string(node.q == Quantifier::Forall ? "forall " : "exists ") + node.var + " in " + node.domain +
                 ": " + render(node.body);
        }
      },
      formula->node);
}

std::string render(const Constraint& constraint) {
  return "constraint " + quote(constraint.name) +
         (constraint.mode == Mode::AtStart ? " at start: " : " at each step: ") + render(constraint.formula);
}

std::string render_file(const std::vector<Constraint>& constraints) {
  std::string out;
  for (const auto& c : constraints) {
    if (!c.gloss.empty()) out += "## " + c.gloss + "\n";
    out += render(c) + "\n";
  }
  return out;
}

}  // namespace fclloop::fcl
