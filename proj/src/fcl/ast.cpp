#include "fclloop/fcl/ast.hpp"

#include <algorithm>

#include "fclloop/error.hpp"

namespace fclloop::fcl {

bool same(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool Window::operator==(const Window& other) const {
  return n == other.n && t == other.t && same(body, other.body);
}

bool Not::operator==(const Not& other) const { return same(body, other.body); }

bool Binary::operator==(const Binary& other) const {
  return op == other.op && same(lhs, other.lhs) && same(rhs, other.rhs);
}

bool Quant::operator==(const Quant& other) const {
  return q == other.q && var == other.var && domain == other.domain && same(body, other.body);
}

FormulaPtr make_compare(Term lhs, CmpOp op, Term rhs) {
  return std::make_shared<const Formula>(Formula{Compare{std::move(lhs), op, std::move(rhs)}});
}

FormulaPtr make_member(std::string var, std::string set) {
  return std::make_shared<const Formula>(Formula{Member{std::move(var), std::move(set)}});
}

FormulaPtr make_window(NumExpr n, NumExpr t, FormulaPtr body) {
  return std::make_shared<const Formula>(Formula{Window{n, t, std::move(body)}});
}

FormulaPtr make_not(FormulaPtr body) { return std::make_shared<const Formula>(Formula{Not{std::move(body)}}); }

FormulaPtr make_binary(BinOp op, FormulaPtr lhs, FormulaPtr rhs) {
  return std::make_shared<const Formula>(Formula{Binary{op, std::move(lhs), std::move(rhs)}});
}

FormulaPtr make_quant(Quantifier q, std::string var, std::string domain, FormulaPtr body) {
  return std::make_shared<const Formula>(Formula{Quant{q, std::move(var), std::move(domain), std::move(body)}});
}

FormulaPtr desugar_always(const NumExpr& t, FormulaPtr body) {
  if (t.negated) throw NegativeWindow("always-window length must not be negative");
  if (t.kind == NumExpr::Kind::Inf) throw NegativeWindow("always-window length must be finite (literal, BEG or MAX)");
  return make_window(t, t, std::move(body));
}

int depth(const FormulaPtr& f) {
  if (!f) return 0;
  return std::visit(
      [](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Compare> || std::is_same_v<T, Member>) {
          return 1;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return 1 + std::max(depth(node.lhs), depth(node.rhs));
        } else {
          return 1 + depth(node.body);
        }
      },
      f->node);
}

bool same_structure(const Constraint& a, const Constraint& b) {
  return a.name == b.name && a.mode == b.mode && same(a.formula, b.formula);
}

}  // namespace fclloop::fcl
