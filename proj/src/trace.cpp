#include "fclloop/trace.hpp"

#include <algorithm>

#include "fclloop/error.hpp"

namespace fclloop {

using nlohmann::json;

std::string_view to_string(EntityKind kind) {
  return kind == EntityKind::Villager ? "Villager" : "Dragon";
}

std::string_view to_string(Role role) { return role == Role::Farmer ? "Farmer" : "Warrior"; }

std::optional<EntityKind> parse_kind(std::string_view text) {
  if (text == "Villager") return EntityKind::Villager;
  if (text == "Dragon") return EntityKind::Dragon;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "Farmer") return Role::Farmer;
  if (text == "Warrior") return Role::Warrior;
  return std::nullopt;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Win:
      return "Win";
    case Termination::LossHorizon:
      return "Loss-Horizon";
    case Termination::LossAllDead:
      return "Loss-AllDead";
    case Termination::AbortedProtocolError:
      return "Aborted-ProtocolError";
  }
  return "Loss-Horizon";
}

std::optional<Termination> parse_termination(std::string_view text) {
  for (auto t : {Termination::Win, Termination::LossHorizon, Termination::LossAllDead,
                 Termination::AbortedProtocolError}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

const EntityState* StepRecord::find(std::string_view id) const {
  auto it = std::find_if(entities.begin(), entities.end(), [&](const EntityState& e) { return e.id == id; });
  return it == entities.end() ? nullptr : &*it;
}

namespace {

bool contains(const std::vector<std::string>& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

bool Catalog::has_set(std::string_view name) const {
  return contains(role_sets, name) || contains(ensembles, name);
}

bool Catalog::is_ensemble(std::string_view name) const { return contains(ensembles, name); }

bool Catalog::has_attribute(std::string_view attr) const {
  return contains(int_attributes, attr) || contains(string_attributes, attr);
}

bool Catalog::is_int_attribute(std::string_view attr) const { return contains(int_attributes, attr); }

const Catalog& Catalog::dragon_hunt() {
  static const Catalog catalog{
      {"Villagers", "Farmers", "Warriors", "Dragons"},
      {"Farm", "Attack", "GoToCave", "SpawnFarmer", "SpawnWarrior"},
      {"hp"},
      {"role", "location", "kind"},
  };
  return catalog;
}

std::set<EntityId> set_at(const Trace& trace, std::size_t step, std::string_view set_name,
                          const Catalog& catalog) {
  if (step >= trace.length()) throw StepOutOfRange(static_cast<long>(step), trace.length());
  const StepRecord& record = trace.steps[step];
  std::set<EntityId> out;
  if (catalog.is_ensemble(set_name)) {
    auto it = record.assignment.find(std::string(set_name));
    if (it != record.assignment.end()) out = it->second;
    return out;
  }
  if (!catalog.has_set(set_name)) throw UnknownSet(std::string(set_name));
  for (const EntityState& e : record.entities) {
    bool member = false;
    if (set_name == "Villagers") {
      member = e.kind == EntityKind::Villager;
    } else if (set_name == "Farmers") {
      member = e.kind == EntityKind::Villager && e.role == Role::Farmer;
    } else if (set_name == "Warriors") {
      member = e.kind == EntityKind::Villager && e.role == Role::Warrior;
    } else if (set_name == "Dragons") {
      member = e.kind == EntityKind::Dragon;
    } else {
      throw UnknownSet(std::string(set_name));
    }
    if (member) out.insert(e.id);
  }
  return out;
}

Value attr_at(const Trace& trace, std::size_t step, std::string_view entity, std::string_view attr) {
  if (step >= trace.length()) throw StepOutOfRange(static_cast<long>(step), trace.length());
  if (attr != "hp" && attr != "role" && attr != "location" && attr != "kind") {
    throw UnknownAttribute(std::string(attr));
  }
  const EntityState* e = trace.steps[step].find(entity);
  if (e == nullptr) return Absent{};
  if (attr == "hp") return e->hp;
  if (attr == "kind") return std::string(to_string(e->kind));
  if (attr == "role") {
    if (!e->role) return Absent{};
    return std::string(to_string(*e->role));
  }
  if (!e->location) return Absent{};
  return *e->location;
}

std::vector<EntityId> villagers_at(const StepRecord& step) {
  std::vector<EntityId> out;
  for (const auto& e : step.entities) {
    if (e.kind == EntityKind::Villager) out.push_back(e.id);
  }
  return out;
}

json to_json(const AssignmentMap& assignment) {
  json out = json::object();
  for (const auto& [name, ids] : assignment) out[name] = json(std::vector<std::string>(ids.begin(), ids.end()));
  return out;
}

json to_json(const StepRecord& step) {
  json entities = json::array();
  for (const auto& e : step.entities) {
    json item{{"id", e.id}, {"kind", to_string(e.kind)}, {"hp", e.hp}};
    if (e.role) item["role"] = to_string(*e.role);
    if (e.location) item["location"] = *e.location;
    entities.push_back(std::move(item));
  }
  return json{{"index", step.index},
              {"entities", std::move(entities)},
              {"env", {{"wheat", step.env.wheat}, {"dragon_hp", step.env.dragon_hp}}},
              {"assignment", to_json(step.assignment)},
              {"events", step.events}};
}

json to_json(const Trace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) steps.push_back(to_json(s));
  return json{{"schema_version", "1"},
              {"seed", trace.seed},
              {"terminated", to_string(trace.terminated)},
              {"steps", std::move(steps)}};
}

AssignmentMap assignment_from_json(const json& doc) {
  if (!doc.is_object()) throw TraceFormatError("assignment must be an object");
  AssignmentMap out;
  for (const auto& [name, ids] : doc.items()) {
    if (!ids.is_array()) throw TraceFormatError("assignment members of '" + name + "' must be an array");
    auto& members = out[name];
    for (const auto& id : ids) {
      if (!id.is_string()) throw TraceFormatError("assignment member ids must be strings");
      members.insert(id.get<std::string>());
    }
  }
  return out;
}

Trace trace_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<std::string>() != "1") throw TraceFormatError("unsupported schema_version");
    Trace trace;
    trace.seed = doc.at("seed").get<std::uint64_t>();
    auto terminated = parse_termination(doc.at("terminated").get<std::string>());
    if (!terminated) throw TraceFormatError("unknown termination '" + doc.at("terminated").get<std::string>() + "'");
    trace.terminated = *terminated;
    for (const auto& s : doc.at("steps")) {
      StepRecord step;
      step.index = s.at("index").get<std::size_t>();
      if (step.index != trace.steps.size()) throw TraceFormatError("step index does not match position");
      for (const auto& e : s.at("entities")) {
        EntityState entity;
        entity.id = e.at("id").get<std::string>();
        if (entity.id.empty()) throw TraceFormatError("empty entity id");
        auto kind = parse_kind(e.at("kind").get<std::string>());
        if (!kind) throw TraceFormatError("unknown entity kind");
        entity.kind = *kind;
        entity.hp = e.at("hp").get<std::int64_t>();
        if (e.contains("role")) {
          auto role = parse_role(e.at("role").get<std::string>());
          if (!role) throw TraceFormatError("unknown role");
          entity.role = role;
        }
        if (e.contains("location")) entity.location = e.at("location").get<std::string>();
        step.entities.push_back(std::move(entity));
      }
      step.env.wheat = s.at("env").at("wheat").get<std::int64_t>();
      step.env.dragon_hp = s.at("env").at("dragon_hp").get<std::int64_t>();
      step.assignment = assignment_from_json(s.at("assignment"));
      step.events = s.at("events").get<std::vector<std::string>>();
      trace.steps.push_back(std::move(step));
    }
    return trace;
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("malformed trace document: ") + e.what());
  }
}

std::string serialize(const Trace& trace) { return to_json(trace).dump() + "\n"; }

Trace deserialize(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw TraceFormatError("trace is not valid JSON");
  return trace_from_json(doc);
}

std::string format_set(const std::set<EntityId>& ids) {
  std::string out = "{";
  bool first = true;
  for (const auto& id : ids) {
    if (!first) out += ", ";
    out += id;
    first = false;
  }
  return out + "}";
}

std::string format_value(const Value& value) {
  if (std::holds_alternative<Absent>(value)) return "absent";
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return "\"" + std::get<std::string>(value) + "\"";
}

}  // namespace fclloop
