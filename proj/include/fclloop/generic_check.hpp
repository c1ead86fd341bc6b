#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fclloop/protocol.hpp"
#include "fclloop/trace.hpp"

namespace fclloop {

struct GenericViolation {
  enum class Category { ProtocolFailure, UnknownEnsemble, DuplicateAssignment, UnassignedComponent, UnknownComponent };

  Category category = Category::ProtocolFailure;
  std::optional<std::size_t> step;  // absent for failures before the first step
  std::string detail;
  std::vector<std::string> evidence;  // offending ensemble names or ids

  bool operator==(const GenericViolation&) const = default;
};

std::string_view to_string(GenericViolation::Category category);

/// One adaptation-manager exchange recorded during an episode.
struct Exchange {
  std::size_t step = 0;
  std::vector<EntityId> alive;  // villagers alive when the request was sent
  std::optional<AssignmentMap> assignment;
  std::optional<ProtocolError> error;
};

struct RunLog {
  std::vector<Exchange> exchanges;
};

/// Empty iff `assignment` partitions `alive_villagers` into catalog ensembles.
std::vector<GenericViolation> check_assignment(const std::vector<EntityId>& alive_villagers,
                                               const AssignmentMap& assignment,
                                               const std::vector<std::string>& catalog);

/// Protocol failures plus every per-step assignment violation.
std::vector<GenericViolation> check_run(const RunLog& log, const std::vector<std::string>& catalog);

/// Rebuilds the exchange log from a recorded trace. The final record never
/// carries a decision; an aborted trace yields a failed exchange built from
/// its final-step events.
RunLog run_log_from_trace(const Trace& trace);

inline constexpr std::size_t kMaxGenericPerRun = 25;

nlohmann::json to_json(const GenericViolation& v);

}  // namespace fclloop
