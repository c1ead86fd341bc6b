#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fclloop/fcl/ast.hpp"
#include "fclloop/trace.hpp"

namespace testsupport {

using fclloop::AssignmentMap;
using fclloop::Trace;
using fclloop::fcl::FormulaPtr;

/// Villager at a step: id, role, location, hp.
struct V {
  std::string id;
  fclloop::Role role = fclloop::Role::Farmer;
  std::string location = "Village";
  std::int64_t hp = 5;
};

/// One hand-written step: villagers, dragon HP (the dragon is always
/// present), assignment and wheat.
struct StepSpec {
  std::vector<V> villagers;
  std::int64_t dragon_hp = 50;
  AssignmentMap assignment;
  std::int64_t wheat = 0;
};

Trace build_trace(const std::vector<StepSpec>& steps);

/// Trace of `len` steps with villagers `vs` fixed, Attack/Farm chosen per step.
Trace uniform_trace(std::size_t len, const std::vector<V>& vs,
                    const std::function<AssignmentMap(std::size_t)>& assign, std::int64_t dragon_hp = 50);

/// Random trace: up to `max_len` steps, up to `max_entities` entities (some
/// absent at some steps), random roles/locations/hp and assignments that may
/// mention absent ids.
Trace random_trace(std::mt19937_64& rng, std::size_t max_len = 12, std::size_t max_entities = 5);

/// Random closed formula with depth <= max_depth over the Dragon Hunt catalog.
/// No INF; window counts are non-negative.
FormulaPtr random_formula(std::mt19937_64& rng, int max_depth = 3);

/// Random formula whose free variables are among `scope`.
FormulaPtr random_formula(std::mt19937_64& rng, int max_depth, std::vector<std::string>& scope);

/// Independent reference semantics, straight from the definitions.
bool oracle_eval(const Trace& trace, std::size_t step, const FormulaPtr& f,
                 const std::map<std::string, std::string>& env = {});

/// Random assignment over `alive` plus decoys (unknown ids, unknown ensembles,
/// duplicates, omissions).
AssignmentMap random_assignment(std::mt19937_64& rng, const std::vector<std::string>& alive);

/// Path of the fixture directories.
std::string source_dir();

}  // namespace testsupport
