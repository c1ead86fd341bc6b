#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclloop/feedback/loop.hpp"

namespace fclloop::feedback {

struct ExperimentRow {
  FeedbackVariant variant = FeedbackVariant::FullConstraint;
  int attempt = 0;  // 1-based
  bool converged = false;
  int iterations = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::optional<std::string> aborted;
};

/// Fresh generator per attempt.
using GeneratorFactory = std::function<std::unique_ptr<CodeGenerator>()>;

/// `attempts` independent loops per variant. Each loop writes into
/// <base.run_dir>/<variant>-<attempt>. Rows are appended to `csv_path` as they
/// finish, so a generator failure leaves a valid partial file.
ExperimentResult run_experiment(const GeneratorFactory& factory, const std::vector<FeedbackVariant>& variants,
                                int attempts, const LoopConfig& base, const std::filesystem::path& csv_path);

/// {"<variant>": {"<iterations>": count}} over every attempt.
nlohmann::json histogram(const std::vector<ExperimentRow>& rows);

std::string csv_header();
std::string csv_line(const ExperimentRow& row);

}  // namespace fclloop::feedback
