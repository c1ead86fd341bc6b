#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclloop/dragon_hunt.hpp"
#include "fclloop/fcl/ast.hpp"
#include "fclloop/feedback/generator.hpp"
#include "fclloop/feedback/prompt.hpp"
#include "fclloop/feedback/report.hpp"
#include "fclloop/suite.hpp"

namespace fclloop::feedback {

inline constexpr int kDefaultMaxIterations = 10;

struct LoopConfig {
  FeedbackVariant variant = FeedbackVariant::FullConstraint;
  int max_iterations = kDefaultMaxIterations;
  ScenarioConfig scenario;
  SuiteConfig suite = SuiteConfig::default_suite();
  std::vector<fcl::Constraint> constraints;
  PromptTemplate prompt_template = PromptTemplate::bundled();
  std::string command_template = "python3 {source}";
  std::chrono::milliseconds per_step_timeout{2000};
  int parallelism = 0;
  /// Artifacts go to <run_dir>/iter-<k>/ and <run_dir>/outcome.json.
  std::filesystem::path run_dir;
};

struct IterationRecord {
  int index = 0;  // 1-based
  std::string prompt;
  std::string response;
  std::string am_source;
  SuiteResult result;
  std::string report_text;
  bool accepted = false;
};

struct LoopOutcome {
  bool converged = false;
  int iterations_used = 0;
  std::vector<IterationRecord> history;
  std::optional<std::string> aborted;  // generator failure; history kept up to it
};

/// generate -> extract -> run suite -> verify -> report, until the suite is
/// accepted or max_iterations generator calls were made. Throws ConfigError
/// for an empty suite or a bad max_iterations.
LoopOutcome run_feedback_loop(CodeGenerator& generator, const LoopConfig& config);

nlohmann::json outcome_json(const LoopOutcome& outcome, const LoopConfig& config);

/// `<base>/<YYYYmmdd-HHMMSS>` (UTC), suffixed when that directory exists.
std::filesystem::path timestamped_dir(const std::filesystem::path& base);

}  // namespace fclloop::feedback
