#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fclloop {

using EntityId = std::string;

enum class EntityKind { Villager, Dragon };
enum class Role { Farmer, Warrior };

inline constexpr std::string_view kVillage = "Village";
inline constexpr std::string_view kCave = "Cave";
inline constexpr std::string_view kDragonId = "dragon";

std::string_view to_string(EntityKind kind);
std::string_view to_string(Role role);
std::optional<EntityKind> parse_kind(std::string_view text);
std::optional<Role> parse_role(std::string_view text);

struct EntityState {
  EntityId id;
  EntityKind kind = EntityKind::Villager;
  std::optional<Role> role;          // villagers only
  std::optional<std::string> location;  // villagers only
  std::int64_t hp = 0;

  bool operator==(const EntityState&) const = default;
};

struct EnvState {
  std::int64_t wheat = 0;
  std::int64_t dragon_hp = 0;

  bool operator==(const EnvState&) const = default;
};

/// Ensemble name -> member ids, exactly as the adaptation manager returned
/// them. Validity is checked by the generic layer, not here.
using AssignmentMap = std::map<std::string, std::set<EntityId>>;

struct StepRecord {
  std::size_t index = 0;
  std::vector<EntityState> entities;
  EnvState env;
  AssignmentMap assignment;
  std::vector<std::string> events;

  [[nodiscard]] const EntityState* find(std::string_view id) const;

  bool operator==(const StepRecord&) const = default;
};

enum class Termination { Win, LossHorizon, LossAllDead, AbortedProtocolError };

std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view text);

struct Trace {
  std::vector<StepRecord> steps;
  std::uint64_t seed = 0;
  Termination terminated = Termination::LossHorizon;

  [[nodiscard]] std::size_t length() const { return steps.size(); }

  bool operator==(const Trace&) const = default;
};

/// Names the sets and attributes a formula may refer to.
struct Catalog {
  std::vector<std::string> role_sets;  // computed from entity attributes
  std::vector<std::string> ensembles;  // read from the step's assignment
  std::vector<std::string> int_attributes;
  std::vector<std::string> string_attributes;

  [[nodiscard]] bool has_set(std::string_view name) const;
  [[nodiscard]] bool is_ensemble(std::string_view name) const;
  [[nodiscard]] bool has_attribute(std::string_view attr) const;
  [[nodiscard]] bool is_int_attribute(std::string_view attr) const;

  /// Villagers/Farmers/Warriors/Dragons plus the five Dragon Hunt ensembles.
  static const Catalog& dragon_hunt();
};

/// Attribute value; `Absent` when the entity is not present at the step.
struct Absent {
  bool operator==(const Absent&) const = default;
};
using Value = std::variant<Absent, std::int64_t, std::string>;

/// Members of a role set or ensemble at one step, in lexicographic id order.
std::set<EntityId> set_at(const Trace& trace, std::size_t step, std::string_view set_name,
                          const Catalog& catalog = Catalog::dragon_hunt());

/// Throws UnknownAttribute for attributes outside {hp, role, location, kind}.
Value attr_at(const Trace& trace, std::size_t step, std::string_view entity, std::string_view attr);

/// Alive villagers at a step, in record order.
std::vector<EntityId> villagers_at(const StepRecord& step);

nlohmann::json to_json(const Trace& trace);
nlohmann::json to_json(const StepRecord& step);
nlohmann::json to_json(const AssignmentMap& assignment);
Trace trace_from_json(const nlohmann::json& doc);
AssignmentMap assignment_from_json(const nlohmann::json& doc);

/// Compact, key-sorted serialization; byte-stable for identical traces.
std::string serialize(const Trace& trace);
Trace deserialize(std::string_view text);

std::string format_set(const std::set<EntityId>& ids);
std::string format_value(const Value& value);

}  // namespace fclloop
