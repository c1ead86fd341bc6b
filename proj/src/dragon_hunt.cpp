#include "fclloop/dragon_hunt.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fclloop/am_runtime.hpp"
#include "fclloop/error.hpp"

namespace fclloop {

using nlohmann::json;

namespace {

bool is_location(const std::string& loc) { return loc == kVillage || loc == kCave; }

}  // namespace

void ScenarioConfig::validate() const {
  if (horizon < 1) throw InvalidConfig("horizon must be at least 1");
  if (dragon_hp0 <= 0) throw InvalidConfig("dragon_hp0 must be positive");
  if (villager_hp0 <= 0) throw InvalidConfig("villager_hp0 must be positive");
  if (initial_villagers.empty()) throw InvalidConfig("initial_villagers must not be empty");
  for (const auto& v : initial_villagers) {
    if (!is_location(v.location)) throw InvalidConfig("unknown villager location '" + v.location + "'");
  }
  if (wheat0 < 0) throw InvalidConfig("wheat0 must not be negative");
  if (farm_yield < 0 || spawn_cost < 0 || dmg_warrior < 0 || dmg_farmer < 0 || retaliate_dmg < 0) {
    throw InvalidConfig("yields, costs and damages must not be negative");
  }
  if (!(retaliate_prob >= 0.0 && retaliate_prob <= 1.0)) throw InvalidConfig("retaliate_prob must be in [0, 1]");
}

ScenarioConfig ScenarioConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidConfig("scenario config must be a JSON object");
  ScenarioConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "horizon") {
        c.horizon = value.get<int>();
      } else if (key == "dragon_hp0") {
        c.dragon_hp0 = value.get<std::int64_t>();
      } else if (key == "villager_hp0") {
        c.villager_hp0 = value.get<std::int64_t>();
      } else if (key == "wheat0") {
        c.wheat0 = value.get<std::int64_t>();
      } else if (key == "farm_yield") {
        c.farm_yield = value.get<std::int64_t>();
      } else if (key == "spawn_cost") {
        c.spawn_cost = value.get<std::int64_t>();
      } else if (key == "dmg_warrior") {
        c.dmg_warrior = value.get<std::int64_t>();
      } else if (key == "dmg_farmer") {
        c.dmg_farmer = value.get<std::int64_t>();
      } else if (key == "retaliate_prob") {
        c.retaliate_prob = value.get<double>();
      } else if (key == "retaliate_dmg") {
        c.retaliate_dmg = value.get<std::int64_t>();
      } else if (key == "initial_villagers") {
        c.initial_villagers.clear();
        for (const auto& v : value) {
          auto role = parse_role(v.at("role").get<std::string>());
          if (!role) throw InvalidConfig("unknown villager role '" + v.at("role").get<std::string>() + "'");
          c.initial_villagers.push_back({*role, v.value("location", std::string(kVillage))});
        }
      } else {
        throw InvalidConfig("unknown scenario key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("bad scenario config value: ") + e.what());
  }
  c.validate();
  return c;
}

json ScenarioConfig::to_json() const {
  json villagers = json::array();
  for (const auto& v : initial_villagers) villagers.push_back({{"role", to_string(v.role)}, {"location", v.location}});
  return {{"horizon", horizon},           {"dragon_hp0", dragon_hp0},   {"villager_hp0", villager_hp0},
          {"initial_villagers", villagers}, {"wheat0", wheat0},         {"farm_yield", farm_yield},
          {"spawn_cost", spawn_cost},     {"dmg_warrior", dmg_warrior}, {"dmg_farmer", dmg_farmer},
          {"retaliate_prob", retaliate_prob}, {"retaliate_dmg", retaliate_dmg}};
}

const std::vector<std::string>& ensemble_catalog() { return Catalog::dragon_hunt().ensembles; }

json to_json(const Metrics& m) {
  return {{"win", m.win},
          {"dragon_hp_end", m.dragon_hp_end},
          {"steps_survived", m.steps_survived},
          {"wheat_end", m.wheat_end}};
}

namespace {

EntityState make_villager(int number, Role role, std::string location, std::int64_t hp) {
  return {"v" + std::to_string(number), EntityKind::Villager, role, std::move(location), hp};
}

}  // namespace

std::pair<WorldState, SplitMix64> init_state(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  WorldState state;
  for (const auto& spec : config.initial_villagers) {
    ++state.created;
    state.villagers.push_back(make_villager(state.created, spec.role, spec.location, config.villager_hp0));
  }
  state.dragon_hp = config.dragon_hp0;
  state.wheat = config.wheat0;
  return {std::move(state), SplitMix64(seed)};
}

std::vector<std::string> apply_effects(WorldState& state, const AssignmentMap& assignment, SplitMix64& rng,
                                       const ScenarioConfig& config) {
  std::vector<std::string> events;
  const auto& catalog = ensemble_catalog();

  auto find = [&](const EntityId& id) -> EntityState* {
    auto it = std::find_if(state.villagers.begin(), state.villagers.end(), [&](const auto& v) { return v.id == id; });
    return it == state.villagers.end() ? nullptr : &*it;
  };

  for (const auto& [name, ids] : assignment) {
    if (std::find(catalog.begin(), catalog.end(), name) == catalog.end()) {
      events.push_back("ignored unknown ensemble " + name);
    }
  }

  // Each alive villager acts in at most one ensemble, the first in catalog order.
  std::map<std::string, std::vector<EntityId>> acting;
  std::map<EntityId, std::string> claimed;
  for (const auto& name : catalog) {
    auto it = assignment.find(name);
    if (it == assignment.end()) continue;
    for (const auto& id : it->second) {
      if (find(id) == nullptr) {
        events.push_back("ignored unknown component " + id + " in " + name);
      } else if (auto c = claimed.find(id); c != claimed.end()) {
        events.push_back(id + " already acts in " + c->second + "; ignored in " + name);
      } else {
        claimed.emplace(id, name);
        acting[name].push_back(id);
      }
    }
  }
  // Keep creation order within an ensemble.
  for (auto& [name, ids] : acting) {
    std::stable_sort(ids.begin(), ids.end(), [&](const EntityId& a, const EntityId& b) {
      return find(a) < find(b);
    });
  }

  for (const auto& id : acting["Farm"]) {
    EntityState* v = find(id);
    if (v->location == kVillage) {
      state.wheat += config.farm_yield;
      events.push_back(id + " farmed +" + std::to_string(config.farm_yield) + " wheat");
    } else {
      events.push_back(id + " cannot farm outside the Village (no-op)");
    }
  }

  for (const auto& [name, role] : {std::pair{"SpawnFarmer", Role::Farmer}, std::pair{"SpawnWarrior", Role::Warrior}}) {
    const auto& members = acting[name];
    if (members.empty()) continue;
    std::size_t in_village = 0;
    for (const auto& id : members) in_village += find(id)->location == kVillage ? 1 : 0;
    if (in_village < 2) {
      events.push_back(std::string(name) + " needs two villagers in the Village (no-op)");
    } else if (state.wheat < config.spawn_cost) {
      events.push_back(std::string(name) + " needs " + std::to_string(config.spawn_cost) + " wheat, have " +
                       std::to_string(state.wheat) + " (no-op)");
    } else {
      state.wheat -= config.spawn_cost;
      ++state.created;
      state.villagers.push_back(make_villager(state.created, role, std::string(kVillage), config.villager_hp0));
      events.push_back(std::string(name) + " spawned " + state.villagers.back().id + " (-" +
                       std::to_string(config.spawn_cost) + " wheat)");
    }
  }

  for (const auto& id : acting["GoToCave"]) {
    EntityState* v = find(id);
    if (v->location == kVillage) {
      v->location = std::string(kCave);
      events.push_back(id + " moved to the Cave");
    } else {
      events.push_back(id + " is already in the Cave (no-op)");
    }
  }

  for (const auto& id : acting["Attack"]) {
    EntityState* v = find(id);
    if (v->location != kCave) {
      events.push_back(id + " cannot attack from the Village (no-op)");
      continue;
    }
    const std::int64_t dmg = v->role == Role::Warrior ? config.dmg_warrior : config.dmg_farmer;
    state.dragon_hp -= dmg;
    events.push_back(id + " attacked the Dragon for " + std::to_string(dmg));
  }

  if (state.dragon_hp > 0) {
    std::vector<EntityState*> in_cave;
    for (auto& v : state.villagers) {
      if (v.location == kCave) in_cave.push_back(&v);
    }
    if (!in_cave.empty()) {
      if (rng.uniform() < config.retaliate_prob) {
        EntityState* target = in_cave[rng.below(in_cave.size())];
        target->hp -= config.retaliate_dmg;
        events.push_back("the Dragon struck " + target->id + " for " + std::to_string(config.retaliate_dmg));
        if (target->hp <= 0) events.push_back(target->id + " was killed");
      } else {
        events.push_back("the Dragon missed");
      }
    }
  }
  std::erase_if(state.villagers, [](const EntityState& v) { return v.hp <= 0; });
  return events;
}

StepRecord snapshot(const WorldState& state, std::size_t index) {
  StepRecord record;
  record.index = index;
  record.entities = state.villagers;
  record.entities.push_back({std::string(kDragonId), EntityKind::Dragon, std::nullopt, std::nullopt, state.dragon_hp});
  record.env = {state.wheat, state.dragon_hp};
  return record;
}

Metrics compute_metrics(const Trace& trace) {
  if (trace.steps.empty()) throw EmptyTrace();
  const StepRecord& last = trace.steps.back();
  Metrics m;
  m.win = trace.terminated == Termination::Win;
  m.dragon_hp_end = std::max<std::int64_t>(0, last.env.dragon_hp);
  m.steps_survived = trace.length();
  m.wheat_end = last.env.wheat;
  return m;
}

EpisodeResult run_episode(AmHandle& am, const ScenarioConfig& config, std::uint64_t seed) {
  auto [state, rng] = init_state(config, seed);
  EpisodeResult result;
  result.trace.seed = seed;
  for (std::size_t i = 0;; ++i) {
    StepRecord record = snapshot(state, i);
    if (state.dragon_hp <= 0) {
      result.trace.terminated = Termination::Win;
    } else if (state.villagers.empty()) {
      result.trace.terminated = Termination::LossAllDead;
    } else if (i + 1 >= static_cast<std::size_t>(config.horizon)) {
      result.trace.terminated = Termination::LossHorizon;
    } else {
      ResolveRequest request{i, state.villagers, state.wheat, state.dragon_hp, ensemble_catalog(), i == 0};
      ResolveResult response = am.resolve(request);
      Exchange exchange{i, villagers_at(record), std::nullopt, std::nullopt};
      if (auto* error = std::get_if<ProtocolError>(&response)) {
        record.events.push_back(protocol_failure_event(*error));
        exchange.error = *error;
        result.log.exchanges.push_back(std::move(exchange));
        result.trace.terminated = Termination::AbortedProtocolError;
        result.trace.steps.push_back(std::move(record));
        break;
      }
      record.assignment = std::get<AssignmentMap>(std::move(response));
      exchange.assignment = record.assignment;
      result.log.exchanges.push_back(std::move(exchange));
      record.events = apply_effects(state, record.assignment, rng, config);
      result.trace.steps.push_back(std::move(record));
      continue;
    }
    result.trace.steps.push_back(std::move(record));
    break;
  }
  result.metrics = compute_metrics(result.trace);
  return result;
}

}  // namespace fclloop
