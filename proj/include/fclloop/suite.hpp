#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclloop/am_runtime.hpp"
#include "fclloop/dragon_hunt.hpp"
#include "fclloop/fcl/eval.hpp"
#include "fclloop/generic_check.hpp"

namespace fclloop {

struct EpisodeSpec {
  std::uint64_t seed = 1;
  std::optional<std::vector<VillagerSpec>> initial_villagers;
};

/// Test runs a candidate manager must pass.
struct SuiteConfig {
  std::vector<EpisodeSpec> episodes;

  /// Seeds 1..5; episode 4 starts with 2 Farmers + 2 Warriors and
  /// episode 5 with 4 Farmers.
  static SuiteConfig default_suite();
  /// `{"episodes": [{"seed": 1, "initial_villagers": [{"role": ...}]}, ...]}`
  /// or a bare array of episodes. Throws InvalidConfig.
  static SuiteConfig from_json(const nlohmann::json& doc);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Verification outcome of one episode.
struct RunResult {
  std::size_t index = 0;  // 0-based position in the suite
  std::uint64_t seed = 0;
  Trace trace;
  Metrics metrics;
  std::vector<GenericViolation> generic;
  bool functional_evaluated = false;  // false when a protocol failure gated it
  std::vector<fcl::Verdict> verdicts;

  [[nodiscard]] bool protocol_failed() const;
  [[nodiscard]] bool accepted() const;
};

struct SuiteResult {
  std::vector<RunResult> runs;
  [[nodiscard]] bool accepted() const;
};

/// Layered verification of a finished episode: generic checks on the
/// exchange log, then functional constraints unless the protocol failed.
RunResult evaluate_episode(std::size_t index, EpisodeResult episode, const std::vector<fcl::Constraint>& constraints);

/// Same layering for a recorded trace; the exchange log is rebuilt from it.
RunResult verify_trace(std::size_t index, const Trace& trace, const std::vector<fcl::Constraint>& constraints);

/// Runs one episode end to end. A manager that cannot be started yields an
/// aborted one-step trace and a pre-step protocol failure.
RunResult run_one(std::size_t index, const AmSpec& am, const ScenarioConfig& scenario, const EpisodeSpec& episode,
                  const std::vector<fcl::Constraint>& constraints);

/// Episodes in parallel (OpenMP); `parallelism` <= 0 uses the runtime default.
/// Results are in suite order and identical to run_suite_serial.
SuiteResult run_suite(const AmSpec& am, const ScenarioConfig& scenario, const SuiteConfig& suite,
                      const std::vector<fcl::Constraint>& constraints, int parallelism = 0);

SuiteResult run_suite_serial(const AmSpec& am, const ScenarioConfig& scenario, const SuiteConfig& suite,
                             const std::vector<fcl::Constraint>& constraints);

/// The machine-readable report document.
nlohmann::json to_json(const RunResult& run);
nlohmann::json to_json(const SuiteResult& suite);

}  // namespace fclloop
