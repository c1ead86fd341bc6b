#include "fclloop/generic_check.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fclloop {

std::string_view to_string(GenericViolation::Category category) {
  switch (category) {
    case GenericViolation::Category::ProtocolFailure:
      return "ProtocolFailure";
    case GenericViolation::Category::UnknownEnsemble:
      return "UnknownEnsemble";
    case GenericViolation::Category::DuplicateAssignment:
      return "DuplicateAssignment";
    case GenericViolation::Category::UnassignedComponent:
      return "UnassignedComponent";
    case GenericViolation::Category::UnknownComponent:
      return "UnknownComponent";
  }
  return "ProtocolFailure";
}

std::vector<GenericViolation> check_assignment(const std::vector<EntityId>& alive_villagers,
                                               const AssignmentMap& assignment,
                                               const std::vector<std::string>& catalog) {
  using Category = GenericViolation::Category;
  std::vector<GenericViolation> out;
  const std::set<EntityId> alive(alive_villagers.begin(), alive_villagers.end());
  auto in_catalog = [&](const std::string& name) {
    return std::find(catalog.begin(), catalog.end(), name) != catalog.end();
  };

  for (const auto& [name, ids] : assignment) {
    if (!in_catalog(name)) {
      out.push_back({Category::UnknownEnsemble, std::nullopt, "invalid ensemble name \"" + name + "\"", {name}});
    }
  }

  std::map<EntityId, std::vector<std::string>> placed;
  for (const auto& name : catalog) {
    auto it = assignment.find(name);
    if (it == assignment.end()) continue;
    for (const auto& id : it->second) placed[id].push_back(name);
  }
  for (const auto& [id, names] : placed) {
    if (names.size() < 2 || alive.count(id) == 0) continue;
    std::string detail = "component " + id + " assigned twice: in ";
    for (std::size_t i = 0; i < names.size(); ++i) detail += (i ? " and " : "") + names[i];
    std::vector<std::string> evidence{id};
    evidence.insert(evidence.end(), names.begin(), names.end());
    out.push_back({Category::DuplicateAssignment, std::nullopt, std::move(detail), std::move(evidence)});
  }

  std::set<EntityId> unknown;
  for (const auto& [name, ids] : assignment) {
    for (const auto& id : ids) {
      if (alive.count(id) == 0 && unknown.insert(id).second) {
        out.push_back({Category::UnknownComponent, std::nullopt,
                       "unknown component \"" + id + "\" assigned to " + name, {id, name}});
      }
    }
  }

  for (const auto& id : alive_villagers) {
    if (placed.count(id) == 0) {
      out.push_back({Category::UnassignedComponent, std::nullopt,
                     "component " + id + " is not assigned to any ensemble", {id}});
    }
  }
  return out;
}

std::vector<GenericViolation> check_run(const RunLog& log, const std::vector<std::string>& catalog) {
  std::vector<GenericViolation> out;
  for (const auto& ex : log.exchanges) {
    if (ex.error) {
      out.push_back({GenericViolation::Category::ProtocolFailure, ex.step,
                     truncate_diagnostic(ex.error->describe()), {std::string(to_string(ex.error->kind))}});
      continue;
    }
    if (!ex.assignment) continue;
    for (auto& v : check_assignment(ex.alive, *ex.assignment, catalog)) {
      v.step = ex.step;
      out.push_back(std::move(v));
    }
  }
  return out;
}

RunLog run_log_from_trace(const Trace& trace) {
  RunLog log;
  if (trace.steps.empty()) return log;
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    log.exchanges.push_back({step.index, villagers_at(step), step.assignment, std::nullopt});
  }
  const auto& last = trace.steps.back();
  if (trace.terminated == Termination::AbortedProtocolError) {
    std::optional<ProtocolError> error;
    for (const auto& e : last.events) {
      if ((error = protocol_error_from_event(e))) break;
    }
    if (!error) error = ProtocolError{ProtocolError::Kind::Crashed, "episode aborted", {}};
    log.exchanges.push_back({last.index, villagers_at(last), std::nullopt, std::move(error)});
  }
  return log;
}

nlohmann::json to_json(const GenericViolation& v) {
  nlohmann::json out{{"category", to_string(v.category)}, {"detail", v.detail}, {"evidence", v.evidence}};
  out["step_1based"] = v.step ? nlohmann::json(*v.step + 1) : nlohmann::json(nullptr);
  return out;
}

}  // namespace fclloop
