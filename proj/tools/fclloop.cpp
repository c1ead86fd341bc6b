#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fclloop/am_runtime.hpp"
#include "fclloop/bundled.hpp"
#include "fclloop/dragon_hunt.hpp"
#include "fclloop/error.hpp"
#include "fclloop/fcl/parser.hpp"
#include "fclloop/feedback/experiment.hpp"
#include "fclloop/feedback/loop.hpp"
#include "fclloop/feedback/report.hpp"
#include "fclloop/suite.hpp"

namespace {

using namespace fclloop;
using nlohmann::json;

enum Exit { kOk = 0, kFailed = 1, kInputError = 2, kProtocolAbort = 3, kGeneratorUnavailable = 4 };

/// An input problem already reported on stderr.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

/// Settings shared by every command, from the JSON config file.
struct Settings {
  ScenarioConfig scenario;
  SuiteConfig suite = SuiteConfig::default_suite();
  json generator = json::object();
  std::string am_command = "python3 {source}";
  std::chrono::milliseconds timeout{2000};
  int parallelism = 0;
  int max_iterations = feedback::kDefaultMaxIterations;
};

Settings load_settings(const std::string& flag_path) {
  Settings s;
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("FCLLOOP_CONFIG"); env != nullptr) path = env;
  }
  if (path.empty()) return s;
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw InputError("config " + path + ": expected a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "scenario") s.scenario = ScenarioConfig::from_json(value);
      else if (key == "suite") s.suite = SuiteConfig::from_json(value);
      else if (key == "generator") s.generator = value;
      else if (key == "am_command") s.am_command = value.get<std::string>();
      else if (key == "timeout_ms") s.timeout = std::chrono::milliseconds(value.get<long>());
      else if (key == "parallelism") s.parallelism = value.get<int>();
      else if (key == "max_iterations") s.max_iterations = value.get<int>();
      else throw InputError("config " + path + ": unknown key \"" + key + "\"");
    }
    s.scenario.validate();
  } catch (const Error& e) {
    throw InputError("config " + path + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  return s;
}

std::vector<fcl::Constraint> load_constraints(const std::string& path) {
  std::string text = path.empty() ? std::string(bundled_constraints_text()) : read_file(path);
  auto parsed = fcl::parse_constraints(text);
  if (!parsed.ok()) {
    std::string label = path.empty() ? "<bundled>" : path;
    std::string msg;
    for (const auto& d : parsed.diagnostics) msg += label + ":" + d.to_string() + "\n";
    msg.pop_back();
    throw InputError(msg);
  }
  return parsed.constraints;
}

feedback::FeedbackVariant variant_arg(const std::string& text) {
  auto v = feedback::parse_variant(text);
  if (!v) throw InputError("unknown variant '" + text + "' (metrics, generic, full)");
  return *v;
}

void apply_suite_flag(Settings& s, const std::string& path) {
  if (path.empty()) return;
  try {
    s.suite = SuiteConfig::from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw InputError("suite " + path + ": " + e.what());
  } catch (const Error& e) {
    throw InputError("suite " + path + ": " + e.what());
  }
}

AmSpec am_arg(const std::string& text, const Settings& s, const std::string& command_flag) {
  try {
    AmSpec am = AmSpec::parse(text, command_flag.empty() ? s.am_command : command_flag);
    am.per_step_timeout = s.timeout;
    return am;
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

// ---- commands ----

struct SimulateOpts {
  std::string am, am_command, config, out;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateOpts& o) {
  Settings s = load_settings(o.config);
  AmSpec am = am_arg(o.am, s, o.am_command);
  std::unique_ptr<AmHandle> handle;
  try {
    handle = spawn_am(am);
  } catch (const SpawnFailed& e) {
    throw InputError(e.what());
  }
  EpisodeResult episode = run_episode(*handle, s.scenario, o.seed);
  handle->shutdown();
  std::string trace_text = serialize(episode.trace);
  if (o.out.empty()) {
    std::cout << trace_text;
  } else {
    write_file(o.out, trace_text);
    json summary{{"seed", o.seed},
                 {"terminated", std::string(to_string(episode.trace.terminated))},
                 {"metrics", to_json(episode.metrics)}};
    std::cout << summary.dump() << "\n";
  }
  if (episode.trace.terminated == Termination::AbortedProtocolError) {
    std::cerr << "fclloop: " << episode.trace.steps.back().events.back() << "\n";
    return kProtocolAbort;
  }
  return kOk;
}

struct VerifyOpts {
  std::vector<std::string> traces;
  bool suite = false;
  std::string suite_file, am, am_command, constraints, variant = "full", out, config;
  int parallelism = -1;
};

bool accepted_under(const SuiteResult& r, feedback::FeedbackVariant v) {
  for (const auto& run : r.runs) {
    switch (v) {
      case feedback::FeedbackVariant::MetricsOnly:
        if (!run.metrics.win || run.protocol_failed()) return false;
        break;
      case feedback::FeedbackVariant::GenericOnly:
        if (!run.generic.empty()) return false;
        break;
      case feedback::FeedbackVariant::FullConstraint:
        if (!run.accepted()) return false;
        break;
    }
  }
  return true;
}

int cmd_verify(const VerifyOpts& o) {
  Settings s = load_settings(o.config);
  apply_suite_flag(s, o.suite_file);
  auto variant = variant_arg(o.variant);
  auto constraints = load_constraints(o.constraints);
  if (o.traces.empty() == !o.suite) throw InputError("give either --trace files or --suite with --am");

  SuiteResult result;
  if (o.suite) {
    if (o.am.empty()) throw InputError("--suite needs --am");
    AmSpec am = am_arg(o.am, s, o.am_command);
    result = run_suite(am, s.scenario, s.suite, constraints, o.parallelism >= 0 ? o.parallelism : s.parallelism);
  } else {
    for (std::size_t i = 0; i < o.traces.size(); ++i) {
      Trace trace;
      try {
        trace = deserialize(read_file(o.traces[i]));
      } catch (const Error& e) {
        throw InputError(o.traces[i] + ": " + e.what());
      }
      result.runs.push_back(verify_trace(i, trace, constraints));
    }
  }
  std::string text = feedback::render_report(result, constraints, variant);
  std::cout << text;
  if (!o.out.empty()) write_file(o.out, feedback::report_json(result, variant, text).dump(2) + "\n");
  return accepted_under(result, variant) ? kOk : kFailed;
}

struct VibeOpts {
  std::string generator, variant = "full", suite_file, constraints, run_dir = "runs", config, am_command;
  int max_iter = 0;
  int parallelism = -1;
};

feedback::LoopConfig loop_config(const Settings& s, const std::vector<fcl::Constraint>& constraints,
                                 const std::string& am_command, int max_iter, int parallelism) {
  feedback::LoopConfig cfg;
  cfg.max_iterations = max_iter > 0 ? max_iter : s.max_iterations;
  cfg.scenario = s.scenario;
  cfg.suite = s.suite;
  cfg.constraints = constraints;
  cfg.command_template = am_command.empty() ? s.am_command : am_command;
  cfg.per_step_timeout = s.timeout;
  cfg.parallelism = parallelism >= 0 ? parallelism : s.parallelism;
  return cfg;
}

int cmd_vibe(const VibeOpts& o) {
  Settings s = load_settings(o.config);
  apply_suite_flag(s, o.suite_file);
  auto cfg = loop_config(s, load_constraints(o.constraints), o.am_command, o.max_iter, o.parallelism);
  cfg.variant = variant_arg(o.variant);
  auto generator = feedback::make_generator(o.generator, s.generator);
  cfg.run_dir = feedback::timestamped_dir(o.run_dir);
  auto outcome = feedback::run_feedback_loop(*generator, cfg);
  std::cout << (outcome.converged ? "converged" : "not converged") << " after " << outcome.iterations_used
            << " iteration(s); artifacts in " << cfg.run_dir.string() << "\n";
  if (outcome.aborted) {
    std::cerr << "fclloop: generator unavailable: " << *outcome.aborted << "\n";
    return kGeneratorUnavailable;
  }
  return outcome.converged ? kOk : kFailed;
}

struct ExperimentOpts {
  std::string generator, variants = "full,generic,metrics", out = "results.csv", histogram, suite_file, constraints,
                         run_dir = "runs", config, am_command;
  int attempts = 10;
  int max_iter = 0;
  int parallelism = -1;
};

int cmd_experiment(const ExperimentOpts& o) {
  Settings s = load_settings(o.config);
  apply_suite_flag(s, o.suite_file);
  auto cfg = loop_config(s, load_constraints(o.constraints), o.am_command, o.max_iter, o.parallelism);
  std::vector<feedback::FeedbackVariant> variants;
  std::stringstream list(o.variants);
  for (std::string item; std::getline(list, item, ',');) {
    if (!item.empty()) variants.push_back(variant_arg(item));
  }
  if (variants.empty()) throw InputError("--variants is empty");
  // Validate the generator spec before starting.
  feedback::make_generator(o.generator, s.generator);
  cfg.run_dir = feedback::timestamped_dir(o.run_dir);
  auto factory = [&] { return feedback::make_generator(o.generator, s.generator); };
  auto result = feedback::run_experiment(factory, variants, o.attempts, cfg, o.out);

  std::string hist_path = o.histogram;
  if (hist_path.empty()) {
    std::filesystem::path p(o.out);
    hist_path = (p.parent_path() / (p.stem().string() + ".hist.json")).string();
  }
  write_file(hist_path, feedback::histogram(result.rows).dump(2) + "\n");
  std::cout << result.rows.size() << " attempt(s) written to " << o.out << "; histogram in " << hist_path << "\n";
  if (result.aborted) {
    std::cerr << "fclloop: generator unavailable: " << *result.aborted << "\n";
    return kGeneratorUnavailable;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fclloop: run, verify and repair adaptation managers for the Dragon Hunt scenario"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "run one episode and write its trace");
  simulate->add_option("--am", sim.am, "builtin:<name> or path to a manager source")->required();
  simulate->add_option("--am-command", sim.am_command, "command template with one {source}");
  simulate->add_option("--config", sim.config, "JSON config file (default: $FCLLOOP_CONFIG)");
  simulate->add_option("--seed", sim.seed, "episode seed");
  simulate->add_option("--out", sim.out, "trace output file (default: stdout)");

  VerifyOpts ver;
  auto* verify = app.add_subcommand("verify", "check traces or a suite run against the constraints");
  verify->add_option("--trace", ver.traces, "recorded trace file (repeatable)");
  verify->add_flag("--suite", ver.suite, "run the test suite with --am instead of reading traces");
  verify->add_option("--suite-file", ver.suite_file, "suite definition (JSON)");
  verify->add_option("--am", ver.am, "manager for --suite");
  verify->add_option("--am-command", ver.am_command, "command template with one {source}");
  verify->add_option("--constraints", ver.constraints, "FCL constraint file (default: bundled)");
  verify->add_option("--variant", ver.variant, "metrics, generic or full");
  verify->add_option("--out", ver.out, "report JSON output file");
  verify->add_option("--config", ver.config, "JSON config file (default: $FCLLOOP_CONFIG)");
  verify->add_option("--parallelism", ver.parallelism, "episodes run concurrently (0: all processors)");

  VibeOpts vibe;
  auto* vibe_cmd = app.add_subcommand("vibe", "generate a manager and repair it from verification feedback");
  vibe_cmd->add_option("--generator", vibe.generator, "http, replay:<dir> or builtin:<name>")->required();
  vibe_cmd->add_option("--variant", vibe.variant, "metrics, generic or full");
  vibe_cmd->add_option("--max-iter", vibe.max_iter, "iteration cap (default 10)");
  vibe_cmd->add_option("--suite", vibe.suite_file, "suite definition (JSON)");
  vibe_cmd->add_option("--constraints", vibe.constraints, "FCL constraint file (default: bundled)");
  vibe_cmd->add_option("--run-dir", vibe.run_dir, "base directory for run artifacts");
  vibe_cmd->add_option("--am-command", vibe.am_command, "command template with one {source}");
  vibe_cmd->add_option("--config", vibe.config, "JSON config file (default: $FCLLOOP_CONFIG)");
  vibe_cmd->add_option("--parallelism", vibe.parallelism, "episodes run concurrently (0: all processors)");

  ExperimentOpts exp;
  auto* experiment = app.add_subcommand("experiment", "repeat the feedback loop per variant and tabulate iterations");
  experiment->add_option("--generator", exp.generator, "http, replay:<dir> or builtin:<name>")->required();
  experiment->add_option("--attempts", exp.attempts, "loops per variant");
  experiment->add_option("--variants", exp.variants, "comma-separated variants");
  experiment->add_option("--out", exp.out, "CSV output file");
  experiment->add_option("--histogram", exp.histogram, "histogram JSON (default: <out>.hist.json)");
  experiment->add_option("--max-iter", exp.max_iter, "iteration cap (default 10)");
  experiment->add_option("--suite", exp.suite_file, "suite definition (JSON)");
  experiment->add_option("--constraints", exp.constraints, "FCL constraint file (default: bundled)");
  experiment->add_option("--run-dir", exp.run_dir, "base directory for run artifacts");
  experiment->add_option("--am-command", exp.am_command, "command template with one {source}");
  experiment->add_option("--config", exp.config, "JSON config file (default: $FCLLOOP_CONFIG)");
  experiment->add_option("--parallelism", exp.parallelism, "episodes run concurrently (0: all processors)");

  std::string source_name;
  auto* am_source = app.add_subcommand("am-source", "print the Python source of a builtin manager");
  am_source->add_option("name", source_name, "builtin name")->required();
  auto* list = app.add_subcommand("list", "list builtin managers and generator kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*verify) return cmd_verify(ver);
    if (*vibe_cmd) return cmd_vibe(vibe);
    if (*experiment) return cmd_experiment(exp);
    if (*am_source) {
      if (!is_builtin(source_name)) throw InputError("unknown builtin manager: " + source_name);
      std::cout << builtin_source(source_name);
      return kOk;
    }
    if (*list) {
      for (const auto& b : builtin_catalog()) std::cout << "builtin:" << b.name << "  " << b.description << "\n";
      for (const auto& g : feedback::generator_catalog()) std::cout << g.usage << "  " << g.description << "\n";
      return kOk;
    }
  } catch (const InputError& e) {
    std::cerr << "fclloop: " << e.what() << "\n";
    return kInputError;
  } catch (const GeneratorUnavailable& e) {
    std::cerr << "fclloop: generator unavailable: " << e.what() << "\n";
    return kGeneratorUnavailable;
  } catch (const ConfigError& e) {
    std::cerr << "fclloop: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidConfig& e) {
    std::cerr << "fclloop: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "fclloop: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
