#include "fclloop/am_runtime.hpp"

#include <filesystem>
#include <functional>
#include <map>

#include "fclloop/error.hpp"
#include "fclloop/subprocess.hpp"
#include "fclloop_embedded.hpp"

namespace fclloop {

using nlohmann::json;

namespace {

constexpr std::string_view kPlaceholder = "{source}";

std::size_t count_placeholders(std::string_view s) {
  std::size_t n = 0;
  for (auto pos = s.find(kPlaceholder); pos != std::string_view::npos; pos = s.find(kPlaceholder, pos + 1)) ++n;
  return n;
}

}  // namespace

AmSpec AmSpec::builtin(std::string name) {
  AmSpec spec;
  spec.kind = Kind::Builtin;
  spec.builtin_name = std::move(name);
  return spec;
}

AmSpec AmSpec::external(std::string source_path, std::string command_template) {
  if (count_placeholders(command_template) != 1) {
    throw InvalidConfig("AM command template must contain exactly one {source} placeholder: " + command_template);
  }
  AmSpec spec;
  spec.kind = Kind::External;
  spec.source_path = std::move(source_path);
  spec.command_template = std::move(command_template);
  return spec;
}

AmSpec AmSpec::parse(std::string_view text, std::string command_template) {
  if (text.starts_with("builtin:")) return builtin(std::string(text.substr(8)));
  return external(std::string(text), std::move(command_template));
}

std::string AmSpec::command() const {
  std::string out = command_template;
  auto pos = out.find(kPlaceholder);
  if (pos != std::string::npos) out.replace(pos, kPlaceholder.size(), shell_quote(source_path));
  return out;
}

std::string AmSpec::describe() const {
  return kind == Kind::Builtin ? "builtin:" + builtin_name : command();
}

// ---------------------------------------------------------------------------
// Builtin managers. Each maps one request to one raw response line, which
// then goes through the same shape check as an external process's output.

namespace {

// Constants the reference policy plans with; they match the default scenario.
constexpr std::int64_t kSpawnCost = 5;
constexpr std::int64_t kDmgWarrior = 3;
constexpr std::int64_t kDmgFarmer = 1;

struct CrashSignal {
  std::string message;
};

json empty_assignment() {
  json out = json::object();
  for (const char* name : {"Farm", "Attack", "GoToCave", "SpawnFarmer", "SpawnWarrior"}) out[name] = json::array();
  return out;
}

json ids_of(const std::vector<const EntityState*>& villagers) {
  json out = json::array();
  for (const auto* v : villagers) out.push_back(v->id);
  return out;
}

json respond(json ensembles) { return {{"type", "assignment"}, {"ensembles", std::move(ensembles)}}; }

json reference_good(const ResolveRequest& r) {
  std::vector<const EntityState*> cave;
  std::vector<const EntityState*> idle;
  for (const auto& v : r.villagers) (v.location == kCave ? cave : idle).push_back(&v);
  json a = empty_assignment();
  a["Attack"] = ids_of(cave);
  std::int64_t cave_damage = 0;
  for (const auto* v : cave) cave_damage += v->role == Role::Warrior ? kDmgWarrior : kDmgFarmer;
  if (cave_damage >= r.dragon_hp) {
    a["Farm"] = ids_of(idle);
    return respond(std::move(a));
  }
  std::vector<const EntityState*> warriors;
  std::vector<const EntityState*> rest;
  for (const auto* v : idle) (v->role == Role::Warrior ? warriors : rest).push_back(v);
  if (warriors.size() >= 2 || (!cave.empty() && !warriors.empty())) {
    a["GoToCave"] = ids_of(warriors);
    idle = rest;
  }
  if (r.wheat >= 2 * kSpawnCost && idle.size() >= 2) {
    a["SpawnWarrior"] = ids_of({idle[0], idle[1]});
    idle.erase(idle.begin(), idle.begin() + 2);
  }
  a["Farm"] = ids_of(idle);
  return respond(std::move(a));
}

json all_farm(const ResolveRequest& r) {
  json a = empty_assignment();
  for (const auto& v : r.villagers) a["Farm"].push_back(v.id);
  return a;
}

json faulty_never_attack(const ResolveRequest& r) { return respond(all_farm(r)); }

json faulty_crash(const ResolveRequest&) {
  throw CrashSignal{"RuntimeError: faulty_crash refuses to resolve ensembles"};
}

json faulty_malformed(const ResolveRequest& r) {
  json pairs = json::array();
  for (const auto& v : r.villagers) pairs.push_back(json::array({"Farm", v.id}));
  return {{"type", "assignment"}, {"ensembles", std::move(pairs)}};
}

json faulty_unknown_ensemble(const ResolveRequest& r) {
  json a = empty_assignment();
  for (std::size_t i = 0; i < r.villagers.size(); ++i) {
    if (i == 0) {
      a["Defend"] = json::array({r.villagers[i].id});
    } else {
      a["Farm"].push_back(r.villagers[i].id);
    }
  }
  return respond(std::move(a));
}

json faulty_duplicate_assignment(const ResolveRequest& r) {
  json a = all_farm(r);
  if (!r.villagers.empty()) a["Attack"].push_back(r.villagers.front().id);
  return respond(std::move(a));
}

json faulty_unassigned(const ResolveRequest& r) {
  json a = empty_assignment();
  for (std::size_t i = 0; i + 1 < r.villagers.size(); ++i) a["Farm"].push_back(r.villagers[i].id);
  return respond(std::move(a));
}

json faulty_cave_idle(const ResolveRequest& r) {
  std::vector<const EntityState*> targets;
  std::vector<const EntityState*> rest;
  for (const auto& v : r.villagers) (v.role == Role::Warrior ? targets : rest).push_back(&v);
  json a = empty_assignment();
  a["GoToCave"] = ids_of(targets);
  a["Farm"] = ids_of(rest);
  return respond(std::move(a));
}

using Policy = std::function<json(const ResolveRequest&)>;

struct BuiltinEntry {
  BuiltinInfo info;
  Policy policy;
};

const std::vector<BuiltinEntry>& entries() {
  static const std::vector<BuiltinEntry> table = {
      {{"reference_good",
        "farms until wheat >= 2x spawn cost, spawns warriors, sends them to the Cave in pairs, attacks with everyone "
        "in the Cave"},
       reference_good},
      {{"faulty_crash", "raises an error on the first request"}, faulty_crash},
      {{"faulty_malformed", "returns ensembles as a list of pairs instead of an object"}, faulty_malformed},
      {{"faulty_unknown_ensemble", "puts the first villager into the non-existent ensemble Defend"},
       faulty_unknown_ensemble},
      {{"faulty_duplicate_assignment", "puts the first villager into both Farm and Attack"},
       faulty_duplicate_assignment},
      {{"faulty_unassigned", "leaves the last villager out of every ensemble"}, faulty_unassigned},
      {{"faulty_never_attack", "valid partitions, but everyone farms forever"}, faulty_never_attack},
      {{"faulty_cave_idle", "sends warriors to the Cave and keeps them in GoToCave, never attacking"},
       faulty_cave_idle},
  };
  return table;
}

const BuiltinEntry* find_builtin(std::string_view name) {
  for (const auto& e : entries()) {
    if (e.info.name == name) return &e;
  }
  return nullptr;
}

class BuiltinHandle final : public AmHandle {
 public:
  explicit BuiltinHandle(const BuiltinEntry& entry) : entry_(entry) {}

  ResolveResult resolve(const ResolveRequest& request) override {
    if (crashed_) return ProtocolError{ProtocolError::Kind::Eof, "manager is no longer running", {}};
    try {
      return parse_response(entry_.policy(request).dump());
    } catch (const CrashSignal& crash) {
      crashed_ = true;
      return ProtocolError{ProtocolError::Kind::Crashed, "manager exited with status 1",
                           "builtin:" + entry_.info.name + " raised " + crash.message};
    }
  }

  void shutdown() override {}

 private:
  const BuiltinEntry& entry_;
  bool crashed_ = false;
};

class ExternalHandle final : public AmHandle {
 public:
  explicit ExternalHandle(const AmSpec& spec)
      : process_(spec.command(), spec.working_dir), timeout_(spec.per_step_timeout), working_dir_(spec.working_dir) {}

  ~ExternalHandle() override { shutdown(); }

  ResolveResult resolve(const ResolveRequest& request) override {
    if (failed_) return ProtocolError{ProtocolError::Kind::Eof, "manager is no longer running", {}};
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::string line;
    Subprocess::ReadStatus status = Subprocess::ReadStatus::Eof;
    if (process_.write_line(request.to_json().dump(), deadline)) status = process_.read_line(line, deadline);
    if (status == Subprocess::ReadStatus::Line) {
      ResolveResult result = parse_response(line);
      if (auto* error = std::get_if<ProtocolError>(&result)) {
        failed_ = true;
        error->stderr_text = diagnostics();
      }
      return result;
    }
    failed_ = true;
    if (status == Subprocess::ReadStatus::Timeout) {
      return ProtocolError{ProtocolError::Kind::Timeout,
                           "no response within " + std::to_string(timeout_.count()) + " ms",
                           diagnostics()};
    }
    int code = process_.wait_for_exit(std::chrono::milliseconds(300));
    std::string err = diagnostics();
    if (code > 0 || !err.empty()) {
      std::string detail = code >= 0 ? "manager exited with status " + std::to_string(code) : "manager closed its output";
      return ProtocolError{ProtocolError::Kind::Crashed, detail, err};
    }
    return ProtocolError{ProtocolError::Kind::Eof, "manager closed its output without responding", {}};
  }

  void shutdown() override { process_.terminate(std::chrono::milliseconds(1000)); }

 private:
  // Stderr tail with the working directory stripped from paths, so reports
  // do not depend on where the run directory lives.
  std::string diagnostics() {
    std::string text = process_.stderr_text();
    if (!working_dir_.empty()) {
      const std::string prefix = working_dir_ + "/";
      for (auto pos = text.find(prefix); pos != std::string::npos; pos = text.find(prefix, pos)) {
        text.erase(pos, prefix.size());
      }
    }
    return truncate_diagnostic(text);
  }

  Subprocess process_;
  std::chrono::milliseconds timeout_;
  std::string working_dir_;
  bool failed_ = false;
};

}  // namespace

std::unique_ptr<AmHandle> spawn_am(const AmSpec& spec) {
  if (spec.kind == AmSpec::Kind::Builtin) {
    const BuiltinEntry* entry = find_builtin(spec.builtin_name);
    if (entry == nullptr) throw SpawnFailed("unknown builtin AM '" + spec.builtin_name + "'");
    return std::make_unique<BuiltinHandle>(*entry);
  }
  std::error_code ec;
  std::filesystem::path source(spec.source_path);
  if (!spec.working_dir.empty() && source.is_relative()) source = std::filesystem::path(spec.working_dir) / source;
  if (!std::filesystem::is_regular_file(source, ec)) {
    throw SpawnFailed("AM source file not found: " + spec.source_path);
  }
  return std::make_unique<ExternalHandle>(spec);
}

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> infos = [] {
    std::vector<BuiltinInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

bool is_builtin(std::string_view name) { return find_builtin(name) != nullptr; }

std::string builtin_source(std::string_view name) {
  if (!is_builtin(name)) throw SpawnFailed("unknown builtin AM '" + std::string(name) + "'");
  std::string source(embedded::kBuiltinAmPy);
  const std::string marker = "POLICY = \"reference_good\"";
  auto pos = source.find(marker);
  if (pos == std::string::npos) throw Error("embedded builtin AM source lacks its POLICY line");
  source.replace(pos, marker.size(), "POLICY = \"" + std::string(name) + "\"");
  return source;
}

}  // namespace fclloop
