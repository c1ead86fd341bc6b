#include "fclloop/suite.hpp"

#include "fclloop/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fclloop {

using nlohmann::json;

SuiteConfig SuiteConfig::default_suite() {
  SuiteConfig s;
  s.episodes = {{1, std::nullopt}, {2, std::nullopt}, {3, std::nullopt}};
  s.episodes.push_back({4, std::vector<VillagerSpec>{{Role::Farmer, "Village"},
                                                     {Role::Farmer, "Village"},
                                                     {Role::Warrior, "Village"},
                                                     {Role::Warrior, "Village"}}});
  s.episodes.push_back({5, std::vector<VillagerSpec>(4, VillagerSpec{Role::Farmer, "Village"})});
  return s;
}

SuiteConfig SuiteConfig::from_json(const json& doc) {
  const json& list = doc.is_object() ? doc.at("episodes") : doc;
  if (!list.is_array() || list.empty()) throw InvalidConfig("suite must list at least one episode");
  SuiteConfig s;
  try {
    for (const auto& e : list) {
      EpisodeSpec ep;
      ep.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("initial_villagers")) {
        std::vector<VillagerSpec> villagers;
        for (const auto& v : e.at("initial_villagers")) {
          auto role = parse_role(v.at("role").get<std::string>());
          if (!role) throw InvalidConfig("unknown villager role in suite");
          villagers.push_back({*role, v.value("location", std::string(kVillage))});
        }
        ep.initial_villagers = std::move(villagers);
      }
      s.episodes.push_back(std::move(ep));
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("bad suite config: ") + e.what());
  }
  return s;
}

json SuiteConfig::to_json() const {
  json list = json::array();
  for (const auto& e : episodes) {
    json item{{"seed", e.seed}};
    if (e.initial_villagers) {
      json villagers = json::array();
      for (const auto& v : *e.initial_villagers) {
        villagers.push_back({{"role", fclloop::to_string(v.role)}, {"location", v.location}});
      }
      item["initial_villagers"] = std::move(villagers);
    }
    list.push_back(std::move(item));
  }
  return {{"episodes", std::move(list)}};
}

bool RunResult::protocol_failed() const {
  for (const auto& v : generic) {
    if (v.category == GenericViolation::Category::ProtocolFailure) return true;
  }
  return false;
}

bool RunResult::accepted() const {
  if (!generic.empty() || !functional_evaluated) return false;
  for (const auto& v : verdicts) {
    if (!v.satisfied) return false;
  }
  return true;
}

bool SuiteResult::accepted() const {
  if (runs.empty()) return false;
  for (const auto& r : runs) {
    if (!r.accepted()) return false;
  }
  return true;
}

namespace {

RunResult layered(std::size_t index, Trace trace, Metrics metrics, std::vector<GenericViolation> generic,
                  const std::vector<fcl::Constraint>& constraints) {
  RunResult run;
  run.index = index;
  run.seed = trace.seed;
  run.generic = std::move(generic);
  run.trace = std::move(trace);
  run.metrics = metrics;
  if (!run.protocol_failed()) {
    run.functional_evaluated = true;
    run.verdicts = fcl::eval_all(run.trace, constraints);
  }
  return run;
}

}  // namespace

RunResult evaluate_episode(std::size_t index, EpisodeResult episode, const std::vector<fcl::Constraint>& constraints) {
  auto generic = check_run(episode.log, ensemble_catalog());
  return layered(index, std::move(episode.trace), episode.metrics, std::move(generic), constraints);
}

RunResult verify_trace(std::size_t index, const Trace& trace, const std::vector<fcl::Constraint>& constraints) {
  auto generic = check_run(run_log_from_trace(trace), ensemble_catalog());
  return layered(index, trace, compute_metrics(trace), std::move(generic), constraints);
}

RunResult run_one(std::size_t index, const AmSpec& am, const ScenarioConfig& scenario, const EpisodeSpec& episode,
                  const std::vector<fcl::Constraint>& constraints) {
  ScenarioConfig config = scenario;
  if (episode.initial_villagers) config.initial_villagers = *episode.initial_villagers;
  std::unique_ptr<AmHandle> handle;
  try {
    handle = spawn_am(am);
  } catch (const SpawnFailed& e) {
    auto [state, rng] = init_state(config, episode.seed);
    Trace trace;
    trace.seed = episode.seed;
    trace.terminated = Termination::AbortedProtocolError;
    trace.steps.push_back(snapshot(state, 0));
    ProtocolError error{ProtocolError::Kind::Crashed, e.what(), {}};
    trace.steps.back().events.push_back(protocol_failure_event(error));
    std::vector<GenericViolation> generic{
        {GenericViolation::Category::ProtocolFailure, std::nullopt, error.describe(), {"spawn"}}};
    Metrics metrics = compute_metrics(trace);
    return layered(index, std::move(trace), metrics, std::move(generic), constraints);
  }
  EpisodeResult result = run_episode(*handle, config, episode.seed);
  handle->shutdown();
  return evaluate_episode(index, std::move(result), constraints);
}

SuiteResult run_suite_serial(const AmSpec& am, const ScenarioConfig& scenario, const SuiteConfig& suite,
                             const std::vector<fcl::Constraint>& constraints) {
  SuiteResult out;
  for (std::size_t i = 0; i < suite.episodes.size(); ++i) {
    out.runs.push_back(run_one(i, am, scenario, suite.episodes[i], constraints));
  }
  return out;
}

SuiteResult run_suite(const AmSpec& am, const ScenarioConfig& scenario, const SuiteConfig& suite,
                      const std::vector<fcl::Constraint>& constraints, int parallelism) {
  const auto n = static_cast<std::int64_t>(suite.episodes.size());
  std::vector<RunResult> runs(suite.episodes.size());
  std::vector<std::string> errors(suite.episodes.size());
#ifdef _OPENMP
  const int threads = parallelism > 0 ? parallelism : omp_get_max_threads();
#else
  const int threads = 1;
#endif
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads != 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      runs[i] = run_one(static_cast<std::size_t>(i), am, scenario, suite.episodes[i], constraints);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("suite episode failed: " + e);
  }
  return SuiteResult{std::move(runs)};
}

json to_json(const RunResult& run) {
  json generic = json::array();
  for (const auto& v : run.generic) generic.push_back(to_json(v));
  json functional = nullptr;
  if (run.functional_evaluated) {
    functional = json::array();
    for (const auto& v : run.verdicts) functional.push_back(fcl::to_json(v));
  }
  return {{"run", run.index + 1},
          {"seed", run.seed},
          {"accepted", run.accepted()},
          {"terminated", to_string(run.trace.terminated)},
          {"metrics", to_json(run.metrics)},
          {"generic", std::move(generic)},
          {"functional", std::move(functional)}};
}

json to_json(const SuiteResult& suite) {
  json runs = json::array();
  for (const auto& r : suite.runs) runs.push_back(to_json(r));
  return {{"accepted", suite.accepted()}, {"runs", std::move(runs)}};
}

}  // namespace fclloop
