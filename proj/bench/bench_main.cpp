#include <benchmark/benchmark.h>

#include <cstdlib>

#include "fclloop/am_runtime.hpp"
#include "fclloop/bundled.hpp"
#include "fclloop/dragon_hunt.hpp"
#include "fclloop/fcl/eval.hpp"
#include "fclloop/fcl/parser.hpp"
#include "fclloop/suite.hpp"

using namespace fclloop;

namespace {

std::vector<fcl::Constraint> constraints() { return fcl::parse_constraints(bundled_constraints_text()).constraints; }

// Long losing trace: nobody attacks, so every anchor of every constraint does work.
Trace long_trace(std::size_t horizon) {
  ScenarioConfig cfg;
  cfg.horizon = static_cast<int>(horizon);
  auto am = spawn_am(AmSpec::builtin("faulty_never_attack"));
  return run_episode(*am, cfg, 1).trace;
}

const fcl::Constraint& farmers_stay() {
  static const auto cs = constraints();
  for (const auto& c : cs) {
    if (c.name == "farmers_stay") return c;
  }
  std::abort();
}

void BM_EvalConstraintSerial(benchmark::State& state) {
  Trace t = long_trace(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fcl::eval_constraint_serial(t, farmers_stay()));
}

void BM_EvalConstraintParallel(benchmark::State& state) {
  Trace t = long_trace(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fcl::eval_constraint(t, farmers_stay()));
}

void BM_SuiteSerial(benchmark::State& state) {
  auto cs = constraints();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_suite_serial(AmSpec::builtin("reference_good"), ScenarioConfig{}, SuiteConfig::default_suite(), cs));
  }
}

void BM_SuiteParallel(benchmark::State& state) {
  auto cs = constraints();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_suite(AmSpec::builtin("reference_good"), ScenarioConfig{}, SuiteConfig::default_suite(), cs));
  }
}

}  // namespace

BENCHMARK(BM_EvalConstraintSerial)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvalConstraintParallel)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SuiteSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
