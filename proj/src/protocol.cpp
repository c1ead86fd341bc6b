#include "fclloop/protocol.hpp"

namespace fclloop {

using nlohmann::json;

json ResolveRequest::to_json() const {
  json villager_list = json::array();
  for (const auto& v : villagers) {
    villager_list.push_back({{"id", v.id},
                             {"role", v.role ? std::string(fclloop::to_string(*v.role)) : std::string()},
                             {"location", v.location.value_or("")},
                             {"hp", v.hp}});
  }
  json out{{"type", "resolve"},
           {"step", step},
           {"state",
            {{"villagers", std::move(villager_list)},
             {"wheat", wheat},
             {"dragon_hp", dragon_hp},
             {"ensembles", ensembles}}}};
  if (first) out["v"] = 1;
  return out;
}

std::string_view to_string(ProtocolError::Kind kind) {
  switch (kind) {
    case ProtocolError::Kind::Timeout:
      return "timeout";
    case ProtocolError::Kind::Eof:
      return "eof";
    case ProtocolError::Kind::Malformed:
      return "malformed";
    case ProtocolError::Kind::Crashed:
      return "crashed";
  }
  return "malformed";
}

std::string ProtocolError::describe() const {
  std::string out(to_string(kind));
  if (!detail.empty()) out += ": " + detail;
  if (!stderr_text.empty()) out += "\n" + stderr_text;
  return out;
}

std::string truncate_diagnostic(std::string_view text, std::size_t limit) {
  if (text.size() <= limit) return std::string(text);
  return std::string(text.substr(text.size() - limit));
}

std::string protocol_failure_event(const ProtocolError& error) {
  return std::string(kProtocolFailureEvent) + error.describe();
}

std::optional<ProtocolError> protocol_error_from_event(std::string_view event) {
  if (!event.starts_with(kProtocolFailureEvent)) return std::nullopt;
  event.remove_prefix(kProtocolFailureEvent.size());
  for (auto kind : {ProtocolError::Kind::Timeout, ProtocolError::Kind::Eof, ProtocolError::Kind::Malformed,
                    ProtocolError::Kind::Crashed}) {
    std::string_view name = to_string(kind);
    if (!event.starts_with(name)) continue;
    std::string_view rest = event.substr(name.size());
    ProtocolError error{kind, {}, {}};
    if (rest.starts_with(": ")) {
      error.detail = std::string(rest.substr(2));
    } else if (rest.starts_with("\n")) {
      error.stderr_text = std::string(rest.substr(1));
    } else if (!rest.empty()) {
      continue;
    }
    return error;
  }
  return ProtocolError{ProtocolError::Kind::Crashed, std::string(event), {}};
}

ResolveResult parse_response(std::string_view line) {
  auto malformed = [](std::string detail) { return ProtocolError{ProtocolError::Kind::Malformed, std::move(detail), {}}; };
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded()) return malformed("response is not JSON: " + truncate_diagnostic(line, 200));
  if (!doc.is_object()) return malformed("response must be a JSON object");
  auto type = doc.find("type");
  if (type == doc.end() || !type->is_string() || type->get<std::string>() != "assignment") {
    return malformed("response field \"type\" must be \"assignment\"");
  }
  auto ensembles = doc.find("ensembles");
  if (ensembles == doc.end() || !ensembles->is_object()) {
    return malformed("response field \"ensembles\" must be an object of name -> [ids]");
  }
  AssignmentMap out;
  for (const auto& [name, ids] : ensembles->items()) {
    if (!ids.is_array()) return malformed("members of ensemble \"" + name + "\" must be an array");
    auto& members = out[name];
    for (const auto& id : ids) {
      if (!id.is_string()) return malformed("member ids of ensemble \"" + name + "\" must be strings");
      members.insert(id.get<std::string>());
    }
  }
  return out;
}

}  // namespace fclloop
