#include "fclloop/fcl/eval.hpp"

#include <algorithm>
#include <set>

#include "fclloop/error.hpp"
#include "fclloop/fcl/printer.hpp"

namespace fclloop::fcl {

std::int64_t counter_value(NumExpr::Kind kind, std::size_t step, std::size_t trace_len) {
  if (step >= trace_len) throw StepOutOfRange(static_cast<long>(step), trace_len);
  switch (kind) {
    case NumExpr::Kind::Beg:
      return static_cast<std::int64_t>(step);
    case NumExpr::Kind::Max:
      return static_cast<std::int64_t>(trace_len - step);
    case NumExpr::Kind::Inf:
      throw InfiniteTraceUnsupported();
    case NumExpr::Kind::Literal:
      break;
  }
  throw Error("counter_value called with a literal");
}

std::int64_t resolve(const NumExpr& n, std::size_t step, std::size_t trace_len) {
  std::int64_t v = n.kind == NumExpr::Kind::Literal ? n.value : counter_value(n.kind, step, trace_len);
  return n.negated ? -v : v;
}

namespace {

StepWindow clip_window(std::size_t step, std::int64_t t, std::size_t len) {
  const auto ilen = static_cast<std::int64_t>(len);
  const auto istep = static_cast<std::int64_t>(step);
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  if (t >= 0) {
    lo = istep;
    hi = t >= ilen ? ilen : std::min(ilen, istep + t);
  } else {
    hi = istep;
    lo = t <= -ilen ? 0 : std::max<std::int64_t>(0, istep + t);
  }
  lo = std::clamp<std::int64_t>(lo, 0, ilen);
  hi = std::clamp<std::int64_t>(hi, lo, ilen);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

const EntityId& lookup(const Env& env, const std::string& var) {
  auto it = env.find(var);
  if (it == env.end()) throw Error("unbound variable '" + var + "'");
  return it->second;
}

Value eval_term(const Trace& trace, std::size_t step, const Term& term, const Env& env, const Catalog& catalog) {
  return std::visit(
      [&](const auto& t) -> Value {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, NumExpr>) {
          return resolve(t, step, trace.length());
        } else if constexpr (std::is_same_v<T, AttrAccess>) {
          if (!catalog.has_attribute(t.attr)) throw UnknownAttribute(t.attr);
          return attr_at(trace, step, lookup(env, t.var), t.attr);
        } else if constexpr (std::is_same_v<T, Cardinality>) {
          return static_cast<std::int64_t>(set_at(trace, step, t.set, catalog).size());
        } else {
          return t.value;
        }
      },
      term);
}

template <typename V>
bool compare(const V& a, CmpOp op, const V& b) {
  switch (op) {
    case CmpOp::Lt:
      return a < b;
    case CmpOp::Le:
      return a <= b;
    case CmpOp::Eq:
      return a == b;
    case CmpOp::Ne:
      return a != b;
    case CmpOp::Ge:
      return a >= b;
    case CmpOp::Gt:
      return a > b;
  }
  return false;
}

bool eval_compare(const Value& lhs, CmpOp op, const Value& rhs) {
  if (std::holds_alternative<Absent>(lhs) || std::holds_alternative<Absent>(rhs)) return false;
  if (lhs.index() != rhs.index()) return false;
  if (const auto* a = std::get_if<std::int64_t>(&lhs)) return compare(*a, op, std::get<std::int64_t>(rhs));
  return compare(std::get<std::string>(lhs), op, std::get<std::string>(rhs));
}

}  // namespace

WindowCount count_window(const Trace& trace, std::size_t step, std::int64_t t, const FormulaPtr& body,
                         const Env& env, const Catalog& catalog) {
  WindowCount out;
  out.window = clip_window(step, t, trace.length());
  for (std::size_t k = out.window.lo; k < out.window.hi; ++k) {
    if (eval_formula(trace, k, body, env, catalog)) {
      ++out.count;
    } else {
      out.false_steps.push_back(k);
    }
  }
  return out;
}

bool eval_formula(const Trace& trace, std::size_t step, const FormulaPtr& f, const Env& env, const Catalog& catalog) {
  if (step >= trace.length()) throw StepOutOfRange(static_cast<long>(step), trace.length());
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Compare>) {
          return eval_compare(eval_term(trace, step, node.lhs, env, catalog), node.op,
                              eval_term(trace, step, node.rhs, env, catalog));
        } else if constexpr (std::is_same_v<T, Member>) {
          const EntityId& id = lookup(env, node.var);
          auto members = set_at(trace, step, node.set, catalog);
          return trace.steps[step].find(id) != nullptr && members.count(id) != 0;
        } else if constexpr (std::is_same_v<T, Window>) {
          const std::int64_t n = resolve(node.n, step, trace.length());
          const std::int64_t t = resolve(node.t, step, trace.length());
          if (n <= 0) return true;
          const StepWindow w = clip_window(step, t, trace.length());
          std::int64_t count = 0;
          for (std::size_t k = w.lo; k < w.hi && count < n; ++k) {
            if (eval_formula(trace, k, node.body, env, catalog)) ++count;
          }
          return count >= n;
        } else if constexpr (std::is_same_v<T, Not>) {
          return !eval_formula(trace, step, node.body, env, catalog);
        } else if constexpr (std::is_same_v<T, Binary>) {
          switch (node.op) {
            case BinOp::And:
              return eval_formula(trace, step, node.lhs, env, catalog) &&
                     eval_formula(trace, step, node.rhs, env, catalog);
            case BinOp::Or:
              return eval_formula(trace, step, node.lhs, env, catalog) ||
                     eval_formula(trace, step, node.rhs, env, catalog);
            case BinOp::Implies:
              return !eval_formula(trace, step, node.lhs, env, catalog) ||
                     eval_formula(trace, step, node.rhs, env, catalog);
          }
          return false;
        } else {
          Env inner = env;
          for (const EntityId& id : set_at(trace, step, node.domain, catalog)) {
            inner[node.var] = id;
            bool holds = eval_formula(trace, step, node.body, inner, catalog);
            if (node.q == Quantifier::Forall && !holds) return false;
            if (node.q == Quantifier::Exists && holds) return true;
          }
          return node.q == Quantifier::Forall;
        }
      },
      f->node);
}

namespace {

struct References {
  std::set<std::string> sets;
  std::set<std::pair<std::string, std::string>> attrs;  // (var, attr)
};

void collect_term(const Term& term, References& refs) {
  if (const auto* c = std::get_if<Cardinality>(&term)) refs.sets.insert(c->set);
  if (const auto* a = std::get_if<AttrAccess>(&term)) refs.attrs.insert({a->var, a->attr});
}

void collect(const FormulaPtr& f, References& refs) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Compare>) {
          collect_term(node.lhs, refs);
          collect_term(node.rhs, refs);
        } else if constexpr (std::is_same_v<T, Member>) {
          refs.sets.insert(node.set);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect(node.lhs, refs);
          collect(node.rhs, refs);
        } else {
          collect(node.body, refs);
        }
      },
      f->node);
}

void add_excerpts(const Trace& trace, Counterexample& cex, const Env& env, const Catalog& catalog) {
  References refs;
  collect(cex.focus, refs);
  std::vector<std::size_t> steps;
  for (std::size_t s : cex.failing_steps) {
    if (steps.size() >= kMaxExcerptSteps) break;
    if (std::find(steps.begin(), steps.end(), s) == steps.end()) steps.push_back(s);
  }
  if (steps.empty()) steps.push_back(cex.anchor_step);
  for (std::size_t s : steps) {
    for (const auto& set : refs.sets) {
      cex.excerpts.push_back({s, set, format_set(set_at(trace, s, set, catalog))});
    }
    for (const auto& [var, attr] : refs.attrs) {
      auto it = env.find(var);
      if (it == env.end()) continue;
      cex.excerpts.push_back({s, it->second + "." + attr, format_value(attr_at(trace, s, it->second, attr))});
    }
  }
}

// Counterexample for a sub-formula that cannot be decomposed further: the
// anchor step alone, one satisfying step required, none found.
Counterexample pointwise(std::size_t anchor, const FormulaPtr& f) {
  Counterexample cex;
  cex.anchor_step = anchor;
  cex.window = {anchor, anchor + 1};
  cex.required = 1;
  cex.achieved = 0;
  cex.failing_steps = {anchor};
  cex.focus = f;
  return cex;
}

Counterexample explain(const Trace& trace, std::size_t anchor, const FormulaPtr& f, Env& env,
                       std::map<std::string, EntityId>& witnesses, const Catalog& catalog) {
  if (const auto* w = std::get_if<Window>(&f->node)) {
    const std::int64_t n = resolve(w->n, anchor, trace.length());
    const std::int64_t t = resolve(w->t, anchor, trace.length());
    WindowCount wc = count_window(trace, anchor, t, w->body, env, catalog);
    Counterexample cex;
    cex.anchor_step = anchor;
    cex.window = wc.window;
    cex.required = n;
    cex.achieved = wc.count;
    cex.failing_steps_truncated = wc.false_steps.size() > kMaxFailingSteps;
    if (cex.failing_steps_truncated) wc.false_steps.resize(kMaxFailingSteps);
    cex.failing_steps = std::move(wc.false_steps);
    cex.focus = w->body;
    return cex;
  }
  if (const auto* q = std::get_if<Quant>(&f->node); q != nullptr && q->q == Quantifier::Forall) {
    for (const EntityId& id : set_at(trace, anchor, q->domain, catalog)) {
      env[q->var] = id;
      if (!eval_formula(trace, anchor, q->body, env, catalog)) {
        witnesses[q->var] = id;
        return explain(trace, anchor, q->body, env, witnesses, catalog);
      }
    }
    env.erase(q->var);
  }
  if (const auto* b = std::get_if<Binary>(&f->node)) {
    if (b->op == BinOp::And) {
      const FormulaPtr& part = eval_formula(trace, anchor, b->lhs, env, catalog) ? b->rhs : b->lhs;
      return explain(trace, anchor, part, env, witnesses, catalog);
    }
    if (b->op == BinOp::Implies) return explain(trace, anchor, b->rhs, env, witnesses, catalog);
  }
  return pointwise(anchor, f);
}

}  // namespace

std::optional<Counterexample> build_counterexample(const Trace& trace, std::size_t anchor, const FormulaPtr& f,
                                                   const Env& env, const std::string& constraint_name,
                                                   const Catalog& catalog) {
  if (eval_formula(trace, anchor, f, env, catalog)) return std::nullopt;
  Env scratch = env;
  std::map<std::string, EntityId> witnesses;
  Counterexample cex = explain(trace, anchor, f, scratch, witnesses, catalog);
  cex.constraint_name = constraint_name;
  // Outer bindings the caller supplied count as witnesses too.
  for (const auto& [var, id] : env) witnesses.emplace(var, id);
  cex.witnesses = std::move(witnesses);
  add_excerpts(trace, cex, scratch, catalog);
  return cex;
}

namespace {

std::vector<std::size_t> anchors_for(const Trace& trace, const Constraint& c) {
  if (trace.length() == 0) throw EmptyTrace();
  std::vector<std::size_t> anchors;
  if (c.mode == Mode::AtStart) {
    anchors.push_back(0);
  } else {
    for (std::size_t i = 0; i < trace.length(); ++i) anchors.push_back(i);
  }
  return anchors;
}

Verdict assemble(const Trace& trace, const Constraint& c, const std::vector<std::size_t>& anchors,
                 const std::vector<char>& holds, const Catalog& catalog) {
  Verdict v;
  v.constraint_name = c.name;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (holds[i]) continue;
    ++v.violations_total;
    if (v.violations.size() < kMaxViolationsPerConstraint) {
      auto cex = build_counterexample(trace, anchors[i], c.formula, {}, c.name, catalog);
      if (cex) v.violations.push_back(std::move(*cex));
    }
  }
  v.satisfied = v.violations_total == 0;
  return v;
}

Verdict error_verdict(const Constraint& c, const std::string& message) {
  Verdict v;
  v.constraint_name = c.name;
  v.satisfied = false;
  v.error = message;
  return v;
}

}  // namespace

Verdict eval_constraint_serial(const Trace& trace, const Constraint& c, const Catalog& catalog) {
  try {
    auto anchors = anchors_for(trace, c);
    std::vector<char> holds(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      holds[i] = eval_formula(trace, anchors[i], c.formula, {}, catalog) ? 1 : 0;
    }
    return assemble(trace, c, anchors, holds, catalog);
  } catch (const Error& e) {
    return error_verdict(c, e.what());
  }
}

Verdict eval_constraint(const Trace& trace, const Constraint& c, const Catalog& catalog) {
  std::vector<std::size_t> anchors;
  try {
    anchors = anchors_for(trace, c);
  } catch (const Error& e) {
    return error_verdict(c, e.what());
  }
  const auto count = static_cast<std::int64_t>(anchors.size());
  std::vector<char> holds(anchors.size());
  std::vector<std::string> errors(anchors.size());
#pragma omp parallel for schedule(dynamic) if (count > 8)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      holds[i] = eval_formula(trace, anchors[i], c.formula, {}, catalog) ? 1 : 0;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) return error_verdict(c, e);
  }
  try {
    return assemble(trace, c, anchors, holds, catalog);
  } catch (const Error& e) {
    return error_verdict(c, e.what());
  }
}

std::vector<Verdict> eval_all(const Trace& trace, const std::vector<Constraint>& constraints,
                              const Catalog& catalog) {
  std::vector<Verdict> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) out.push_back(eval_constraint(trace, c, catalog));
  return out;
}

nlohmann::json to_json(const Counterexample& cex) {
  nlohmann::json failing = nlohmann::json::array();
  for (std::size_t s : cex.failing_steps) failing.push_back(s + 1);
  nlohmann::json excerpts = nlohmann::json::array();
  for (const auto& e : cex.excerpts) {
    excerpts.push_back({{"step_1based", e.step + 1}, {"subject", e.subject}, {"value", e.value}});
  }
  return {{"anchor_step_1based", cex.anchor_step + 1},
          {"window_1based", {cex.window.lo + 1, cex.window.hi}},
          {"required", cex.required},
          {"achieved", cex.achieved},
          {"failing_steps_1based", std::move(failing)},
          {"failing_steps_truncated", cex.failing_steps_truncated},
          {"witnesses", cex.witnesses},
          {"excerpts", std::move(excerpts)},
          {"focus", cex.focus ? render(cex.focus) : std::string()}};
}

nlohmann::json to_json(const Verdict& verdict) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : verdict.violations) violations.push_back(to_json(v));
  nlohmann::json out{{"constraint", verdict.constraint_name},
                     {"satisfied", verdict.satisfied},
                     {"violations", std::move(violations)},
                     {"violations_total", verdict.violations_total}};
  if (verdict.error) out["error"] = *verdict.error;
  return out;
}

}  // namespace fclloop::fcl
