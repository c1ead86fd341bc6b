#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fclloop/trace.hpp"

namespace fclloop {

/// What the adaptation manager sees at one step.
struct ResolveRequest {
  std::size_t step = 0;
  std::vector<EntityState> villagers;
  std::int64_t wheat = 0;
  std::int64_t dragon_hp = 0;
  std::vector<std::string> ensembles;
  bool first = false;  // carries the protocol version field

  [[nodiscard]] nlohmann::json to_json() const;
};

struct ProtocolError {
  enum class Kind { Timeout, Eof, Malformed, Crashed };
  Kind kind = Kind::Malformed;
  std::string detail;
  std::string stderr_text;  // at most kMaxDiagnosticChars

  [[nodiscard]] std::string describe() const;
};

std::string_view to_string(ProtocolError::Kind kind);

inline constexpr std::size_t kMaxDiagnosticChars = 2000;

/// Keeps the last `limit` characters, which is where stack traces put the
/// actual error.
std::string truncate_diagnostic(std::string_view text, std::size_t limit = kMaxDiagnosticChars);

/// Event line recorded on the final step of an aborted episode.
inline constexpr std::string_view kProtocolFailureEvent = "protocol failure: ";
std::string protocol_failure_event(const ProtocolError& error);
/// Inverse of protocol_failure_event; describe() of the result equals the
/// original's describe().
std::optional<ProtocolError> protocol_error_from_event(std::string_view event);

using ResolveResult = std::variant<AssignmentMap, ProtocolError>;

/// Shape-checks one response line: a JSON object with type "assignment" and
/// an "ensembles" object mapping names to arrays of id strings.
ResolveResult parse_response(std::string_view line);

}  // namespace fclloop
