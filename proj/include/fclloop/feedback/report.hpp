#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fclloop/fcl/ast.hpp"
#include "fclloop/suite.hpp"

namespace fclloop::feedback {

/// How much of the verification result is fed back to the generator.
enum class FeedbackVariant { MetricsOnly, GenericOnly, FullConstraint };

std::string_view to_string(FeedbackVariant v);
/// Accepts metrics|generic|full and the enum spellings.
std::optional<FeedbackVariant> parse_variant(std::string_view text);

inline constexpr std::size_t kMaxReportBullets = 60;

/// Plain-text bullets, one per line. Each richer variant repeats every line of
/// the poorer ones: metrics bullets, then generic violations, then functional
/// violations. Violation bullets are capped per layer, then "+N more".
std::string render_report(const SuiteResult& result, const std::vector<fcl::Constraint>& constraints,
                          FeedbackVariant variant);

/// One functional-violation bullet (without the leading run tag).
std::string render_counterexample(const fcl::Counterexample& cex, const std::string& gloss);

nlohmann::json report_json(const SuiteResult& result, FeedbackVariant variant, const std::string& text);

}  // namespace fclloop::feedback
