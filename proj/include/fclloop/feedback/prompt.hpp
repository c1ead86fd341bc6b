#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fclloop/dragon_hunt.hpp"
#include "fclloop/fcl/ast.hpp"

namespace fclloop::feedback {

/// Prompt sections with `{{slot}}` placeholders. In the template text each
/// section starts with a `[[section:<name>]]` line.
///
/// Required: interface_contract, domain_rules, strategy_intent.
/// Optional: constraints_summary (slot {{constraints}}), feedback_block
/// (slot {{feedback}}).
struct PromptTemplate {
  std::map<std::string, std::string> sections;

  static PromptTemplate parse(std::string_view text);
  static PromptTemplate bundled();
};

/// Slot values describing the scenario (horizon, costs, ensembles, ...).
using ScenarioDocs = std::map<std::string, std::string>;

ScenarioDocs scenario_docs(const ScenarioConfig& config,
                           std::chrono::milliseconds per_step_timeout = std::chrono::milliseconds(2000));

/// One bullet per constraint: name, gloss and canonical FCL text.
std::string constraints_summary(const std::vector<fcl::Constraint>& constraints);

/// Sections in fixed order, separated by blank lines. Without feedback the
/// prompt ends with the constraints summary; with feedback the same prefix is
/// followed by the feedback block. Throws MissingSection, or ConfigError for
/// a slot without a value.
std::string build_prompt(const PromptTemplate& tmpl, const ScenarioDocs& docs,
                         const std::vector<fcl::Constraint>& constraints,
                         const std::optional<std::string>& feedback = std::nullopt);

}  // namespace fclloop::feedback
