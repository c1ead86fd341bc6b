#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fclloop/protocol.hpp"

namespace fclloop {

/// How to obtain an adaptation manager.
struct AmSpec {
  enum class Kind { External, Builtin };

  Kind kind = Kind::Builtin;
  std::string command_template = "python3 {source}";  // External: exactly one {source}
  std::string source_path;                             // External
  std::string builtin_name;                            // Builtin
  std::string working_dir;  // External: cwd of the process; a relative source_path is resolved against it
  std::chrono::milliseconds per_step_timeout{2000};

  static AmSpec builtin(std::string name);
  /// Throws InvalidConfig unless the template has exactly one `{source}`.
  static AmSpec external(std::string source_path, std::string command_template = "python3 {source}");

  /// `builtin:<name>` or a source path run through `command_template`.
  static AmSpec parse(std::string_view text, std::string command_template = "python3 {source}");

  /// Command line with the shell-quoted source substituted.
  [[nodiscard]] std::string command() const;
  [[nodiscard]] std::string describe() const;
};

/// A running adaptation manager. One request may be outstanding at a time.
class AmHandle {
 public:
  virtual ~AmHandle() = default;

  /// Never throws and never blocks past the per-step timeout.
  virtual ResolveResult resolve(const ResolveRequest& request) = 0;
  virtual void shutdown() = 0;
};

/// Throws SpawnFailed (missing source, unknown builtin, exec failure).
std::unique_ptr<AmHandle> spawn_am(const AmSpec& spec);

struct BuiltinInfo {
  std::string name;
  std::string description;
};

/// reference_good plus one faulty manager per failure category.
const std::vector<BuiltinInfo>& builtin_catalog();
bool is_builtin(std::string_view name);

/// Standalone Python program implementing the named builtin over the wire
/// protocol; runs identically to the in-process builtin.
std::string builtin_source(std::string_view name);

}  // namespace fclloop
