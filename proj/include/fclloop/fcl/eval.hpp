#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclloop/fcl/ast.hpp"
#include "fclloop/trace.hpp"

namespace fclloop::fcl {

/// Variable bindings established by enclosing quantifiers.
using Env = std::map<std::string, EntityId>;

/// Half-open step interval [lo, hi), already clipped to the trace.
struct StepWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;

  [[nodiscard]] std::size_t size() const { return hi > lo ? hi - lo : 0; }
  bool operator==(const StepWindow&) const = default;
};

/// BEG = step, MAX = trace_len - step (the current step included).
/// INF throws InfiniteTraceUnsupported.
std::int64_t counter_value(NumExpr::Kind kind, std::size_t step, std::size_t trace_len);

/// Literal or counter value at `step`, sign applied.
std::int64_t resolve(const NumExpr& n, std::size_t step, std::size_t trace_len);

struct WindowCount {
  std::int64_t count = 0;
  StepWindow window;
  std::vector<std::size_t> false_steps;  // every in-window step where the body was false
};

/// Raw window is [step, step+t) for t >= 0 and [step+t, step) for t < 0.
/// Steps outside the trace contribute nothing.
WindowCount count_window(const Trace& trace, std::size_t step, std::int64_t t, const FormulaPtr& body,
                         const Env& env, const Catalog& catalog = Catalog::dragon_hunt());

bool eval_formula(const Trace& trace, std::size_t step, const FormulaPtr& f, const Env& env = {},
                  const Catalog& catalog = Catalog::dragon_hunt());

struct Excerpt {
  std::size_t step = 0;
  std::string subject;  // set name or var-bound attribute, e.g. "Attack", "v2.location"
  std::string value;
  bool operator==(const Excerpt&) const = default;
};

inline constexpr std::size_t kMaxViolationsPerConstraint = 10;
inline constexpr std::size_t kMaxFailingSteps = 20;
inline constexpr std::size_t kMaxExcerptSteps = 3;

struct Counterexample {
  std::string constraint_name;
  std::size_t anchor_step = 0;
  StepWindow window;
  std::int64_t required = 0;
  std::int64_t achieved = 0;
  std::vector<std::size_t> failing_steps;  // at most kMaxFailingSteps
  bool failing_steps_truncated = false;
  std::map<std::string, EntityId> witnesses;
  std::vector<Excerpt> excerpts;
  /// Sub-formula whose count fell short. Evaluating it at every failing step
  /// under the witnesses yields false.
  FormulaPtr focus;

  [[nodiscard]] std::int64_t deficit() const { return required - achieved; }
};

struct Verdict {
  std::string constraint_name;
  bool satisfied = true;
  std::vector<Counterexample> violations;  // at most kMaxViolationsPerConstraint
  std::size_t violations_total = 0;        // before the cap
  std::optional<std::string> error;        // evaluation failed; counts as not satisfied
};

/// Explains why `f` is false at `anchor` under `env`. Returns nullopt when
/// `f` actually holds there.
std::optional<Counterexample> build_counterexample(const Trace& trace, std::size_t anchor, const FormulaPtr& f,
                                                   const Env& env, const std::string& constraint_name,
                                                   const Catalog& catalog = Catalog::dragon_hunt());

/// AtStart anchors at step 0; AtEachStep anchors at every step. Anchors are
/// evaluated in parallel; results are identical to eval_constraint_serial.
Verdict eval_constraint(const Trace& trace, const Constraint& c, const Catalog& catalog = Catalog::dragon_hunt());

/// Single-threaded reference of eval_constraint.
Verdict eval_constraint_serial(const Trace& trace, const Constraint& c,
                               const Catalog& catalog = Catalog::dragon_hunt());

std::vector<Verdict> eval_all(const Trace& trace, const std::vector<Constraint>& constraints,
                              const Catalog& catalog = Catalog::dragon_hunt());

/// 1-based rendering: anchor_step_1based, window_1based [lo, hi] inclusive, ...
nlohmann::json to_json(const Counterexample& cex);
nlohmann::json to_json(const Verdict& verdict);

}  // namespace fclloop::fcl
