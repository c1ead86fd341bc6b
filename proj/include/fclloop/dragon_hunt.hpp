#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fclloop/generic_check.hpp"
#include "fclloop/rng.hpp"
#include "fclloop/trace.hpp"

namespace fclloop {

class AmHandle;

struct VillagerSpec {
  Role role = Role::Farmer;
  std::string location = std::string(kVillage);
  bool operator==(const VillagerSpec&) const = default;
};

/// Dragon Hunt parameters. Only the 30-step horizon comes from the scenario
/// description; the other defaults are tuned so that farming first, then
/// spawning warriors, then attacking wins, while attacking at once is risky.
struct ScenarioConfig {
  int horizon = 30;
  std::int64_t dragon_hp0 = 50;
  std::int64_t villager_hp0 = 5;
  std::vector<VillagerSpec> initial_villagers = {
      {Role::Farmer, "Village"}, {Role::Farmer, "Village"}, {Role::Farmer, "Village"}, {Role::Warrior, "Village"}};
  std::int64_t wheat0 = 3;
  std::int64_t farm_yield = 1;
  std::int64_t spawn_cost = 5;
  std::int64_t dmg_warrior = 3;
  std::int64_t dmg_farmer = 1;
  double retaliate_prob = 0.5;
  std::int64_t retaliate_dmg = 2;

  /// Throws InvalidConfig.
  void validate() const;

  /// Flat keys named like the fields; missing keys keep their defaults,
  /// unknown keys are rejected.
  static ScenarioConfig from_json(const nlohmann::json& doc);
  [[nodiscard]] nlohmann::json to_json() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Farm, Attack, GoToCave, SpawnFarmer, SpawnWarrior; the order fixes
/// effect resolution and iteration.
const std::vector<std::string>& ensemble_catalog();

struct Metrics {
  bool win = false;
  std::int64_t dragon_hp_end = 0;  // clamped to >= 0
  std::size_t steps_survived = 0;
  std::int64_t wheat_end = 0;

  bool operator==(const Metrics&) const = default;
};

nlohmann::json to_json(const Metrics& m);

/// Mutable world during an episode. Villagers are kept in creation order.
struct WorldState {
  std::vector<EntityState> villagers;
  std::int64_t dragon_hp = 0;
  std::int64_t wheat = 0;
  int created = 0;  // ids handed out so far; the next villager is v<created+1>
};

std::pair<WorldState, SplitMix64> init_state(const ScenarioConfig& config, std::uint64_t seed);

/// Applies one step of ensemble effects in phase order
/// Farm -> Spawn -> GoToCave -> Attack -> Retaliation and returns the event
/// log. Unknown ensembles, unknown ids and second memberships are ignored
/// with an event; location-inapplicable members become no-op events.
std::vector<std::string> apply_effects(WorldState& state, const AssignmentMap& assignment, SplitMix64& rng,
                                       const ScenarioConfig& config);

/// Entities (villagers in creation order, then the dragon) and environment.
StepRecord snapshot(const WorldState& state, std::size_t index);

/// Throws EmptyTrace.
Metrics compute_metrics(const Trace& trace);

struct EpisodeResult {
  Trace trace;
  RunLog log;
  Metrics metrics;
};

/// Runs the adaptation loop: observe, ask the manager, record, apply effects,
/// until the dragon is dead, every villager is dead, the horizon is reached
/// or the manager violates the protocol. Each record holds the state the
/// manager saw together with its decision; the final record is the terminal
/// observation and carries no decision.
EpisodeResult run_episode(AmHandle& am, const ScenarioConfig& config, std::uint64_t seed);

}  // namespace fclloop
