#include "fclloop/feedback/experiment.hpp"

#include <fstream>

#include "fclloop/error.hpp"

namespace fclloop::feedback {

std::string csv_header() { return "variant,attempt,converged,iterations\n"; }

std::string csv_line(const ExperimentRow& row) {
  return std::string(to_string(row.variant)) + "," + std::to_string(row.attempt) + "," +
         (row.converged ? "true" : "false") + "," + std::to_string(row.iterations) + "\n";
}

ExperimentResult run_experiment(const GeneratorFactory& factory, const std::vector<FeedbackVariant>& variants,
                                int attempts, const LoopConfig& base, const std::filesystem::path& csv_path) {
  if (attempts < 1) throw ConfigError("attempts must be at least 1");
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  csv << csv_header() << std::flush;

  ExperimentResult result;
  for (auto variant : variants) {
    for (int a = 1; a <= attempts; ++a) {
      LoopConfig cfg = base;
      cfg.variant = variant;
      cfg.run_dir = base.run_dir / (std::string(to_string(variant)) + "-" + std::to_string(a));
      std::unique_ptr<CodeGenerator> gen;
      try {
        gen = factory();
      } catch (const GeneratorUnavailable& e) {
        result.aborted = e.what();
        return result;
      }
      auto outcome = run_feedback_loop(*gen, cfg);
      if (outcome.aborted) {
        result.aborted = *outcome.aborted;
        return result;
      }
      ExperimentRow row{variant, a, outcome.converged, outcome.iterations_used};
      csv << csv_line(row) << std::flush;
      result.rows.push_back(row);
    }
  }
  return result;
}

nlohmann::json histogram(const std::vector<ExperimentRow>& rows) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& r : rows) {
    auto& bins = out[std::string(to_string(r.variant))];
    auto key = std::to_string(r.iterations);
    bins[key] = (bins.contains(key) ? bins[key].get<int>() : 0) + 1;
  }
  return out;
}

}  // namespace fclloop::feedback
