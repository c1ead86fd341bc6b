#include "fclloop/feedback/loop.hpp"

#include <ctime>
#include <fstream>

#include "fclloop/error.hpp"

namespace fclloop::feedback {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

}  // namespace

LoopOutcome run_feedback_loop(CodeGenerator& generator, const LoopConfig& config) {
  if (config.suite.episodes.empty()) throw ConfigError("suite has no episodes");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (config.run_dir.empty()) throw ConfigError("run directory not set");
  fs::create_directories(config.run_dir);

  const auto docs = scenario_docs(config.scenario, config.per_step_timeout);
  LoopOutcome outcome;
  std::optional<std::string> feedback;

  for (int k = 1; k <= config.max_iterations; ++k) {
    IterationRecord rec;
    rec.index = k;
    rec.prompt = build_prompt(config.prompt_template, docs, config.constraints, feedback);
    const fs::path dir = config.run_dir / ("iter-" + std::to_string(k));
    fs::create_directories(dir);
    write_file(dir / "prompt.txt", rec.prompt);

    try {
      rec.response = generator.generate(rec.prompt);
    } catch (const GeneratorUnavailable& e) {
      outcome.aborted = e.what();
      break;
    }
    write_file(dir / "response.txt", rec.response);
    rec.am_source = extract_code(rec.response);
    write_file(dir / "am.src", rec.am_source);

    // Relative path and cwd keep tracebacks free of the run directory name.
    AmSpec am = AmSpec::external("am.src", config.command_template);
    am.working_dir = fs::absolute(dir).string();
    am.per_step_timeout = config.per_step_timeout;
    rec.result = run_suite(am, config.scenario, config.suite, config.constraints, config.parallelism);
    rec.accepted = rec.result.accepted();
    rec.report_text = render_report(rec.result, config.constraints, config.variant);

    for (const auto& run : rec.result.runs) {
      write_file(dir / ("run-" + std::to_string(run.index + 1) + ".trace.json"), serialize(run.trace));
    }
    write_file(dir / "report.txt", rec.report_text);
    write_file(dir / "report.json", report_json(rec.result, config.variant, rec.report_text).dump(2) + "\n");

    feedback = rec.report_text;
    bool accepted = rec.accepted;
    outcome.history.push_back(std::move(rec));
    if (accepted) {
      outcome.converged = true;
      break;
    }
  }
  outcome.iterations_used = static_cast<int>(outcome.history.size());
  write_file(config.run_dir / "outcome.json", outcome_json(outcome, config).dump(2) + "\n");
  return outcome;
}

nlohmann::json outcome_json(const LoopOutcome& outcome, const LoopConfig& config) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& rec : outcome.history) {
    nlohmann::json metrics = nlohmann::json::array();
    std::size_t generic = 0;
    std::size_t functional = 0;
    for (const auto& run : rec.result.runs) {
      metrics.push_back(to_json(run.metrics));
      generic += run.generic.size();
      for (const auto& v : run.verdicts) functional += v.satisfied ? 0 : 1;
    }
    history.push_back({{"iteration", rec.index},
                       {"accepted", rec.accepted},
                       {"generic_violations", generic},
                       {"failed_constraints", functional},
                       {"metrics", metrics}});
  }
  nlohmann::json doc{{"converged", outcome.converged},
                     {"iterations_used", outcome.iterations_used},
                     {"max_iterations", config.max_iterations},
                     {"variant", std::string(to_string(config.variant))},
                     {"history", history}};
  doc["aborted"] = outcome.aborted ? nlohmann::json(*outcome.aborted) : nlohmann::json(nullptr);
  return doc;
}

fs::path timestamped_dir(const fs::path& base) {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  fs::path dir = base / buf;
  for (int n = 2; fs::exists(dir); ++n) dir = base / (std::string(buf) + "-" + std::to_string(n));
  return dir;
}

}  // namespace fclloop::feedback
