#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fclloop/bundled.hpp"
#include "fclloop/error.hpp"
#include "fclloop/fcl/parser.hpp"
#include "fclloop/feedback/experiment.hpp"
#include "fclloop/feedback/generator.hpp"
#include "fclloop/feedback/loop.hpp"
#include "fclloop/feedback/prompt.hpp"
#include "fclloop/feedback/report.hpp"
#include "support.hpp"

using namespace fclloop;
using namespace fclloop::feedback;
namespace fs = std::filesystem;

namespace {

std::vector<fcl::Constraint> constraints() { return fcl::parse_constraints(bundled_constraints_text()).constraints; }

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("fclloop_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

bool contains_lines(const std::string& big, const std::string& small) {
  auto b = lines(big);
  for (const auto& l : lines(small)) {
    if (std::find(b.begin(), b.end(), l) == b.end()) return false;
  }
  return true;
}

SuiteResult suite_of(const std::string& builtin) {
  return run_suite(AmSpec::builtin(builtin), ScenarioConfig{}, SuiteConfig::default_suite(), constraints());
}

std::string fixture(const std::string& name) { return testsupport::source_dir() + "/data/fixtures/" + name; }

LoopConfig loop_config(const std::string& name, FeedbackVariant variant) {
  LoopConfig cfg;
  cfg.variant = variant;
  cfg.constraints = constraints();
  cfg.run_dir = fresh_dir(name);
  return cfg;
}

}  // namespace

TEST(Prompt, ShapeAndStablePrefix) {
  auto tmpl = PromptTemplate::bundled();
  auto docs = scenario_docs(ScenarioConfig{});
  EXPECT_EQ(docs.at("horizon"), "30");
  EXPECT_EQ(docs.at("retaliate_pct"), "50");
  auto first = build_prompt(tmpl, docs, constraints());
  EXPECT_NE(first.find("## Interface contract"), std::string::npos);
  EXPECT_EQ(first.find("{{"), std::string::npos);
  // ends with the constraints summary
  auto tail = first.substr(first.rfind("- economy:"));
  EXPECT_EQ(tail, "- economy: The village should farm in at least 3 of the first 10 steps.\n"
                  "  FCL: constraint \"economy\" at start: F[>=3, 10](count(Farm) >= 1)\n");
  auto second = build_prompt(tmpl, docs, constraints(), std::string("- run #1 (seed 1): loss\n"));
  EXPECT_EQ(second.substr(0, first.size()), first);
  EXPECT_NE(second.find("- run #1 (seed 1): loss"), std::string::npos);
  EXPECT_TRUE(second.ends_with("Reply with the complete corrected program.\n"));
  auto third = build_prompt(tmpl, docs, constraints(), std::string("other report"));
  EXPECT_EQ(third.substr(0, first.size()), first);
}

TEST(Prompt, MissingSection) {
  auto tmpl = PromptTemplate::bundled();
  tmpl.sections.erase("interface_contract");
  EXPECT_THROW(build_prompt(tmpl, scenario_docs(ScenarioConfig{}), constraints()), MissingSection);
  auto parsed = PromptTemplate::parse("[[section:domain_rules]]\nx\n[[section:strategy_intent]]\ny\n");
  EXPECT_EQ(parsed.sections.size(), 2u);
  EXPECT_THROW(build_prompt(parsed, {}, {}), MissingSection);
}

TEST(Report, MetricsOnlyHasNoConstraintText) {
  auto text = render_report(suite_of("faulty_never_attack"), constraints(), FeedbackVariant::MetricsOnly);
  EXPECT_EQ(lines(text).size(), 5u);
  EXPECT_NE(text.find("- run #1 (seed 1): loss, dragon HP 50, steps 30, wheat 119"), std::string::npos);
  EXPECT_EQ(text.find("attack"), std::string::npos);
  EXPECT_EQ(text.find("["), std::string::npos);
}

TEST(Report, AttackEarlyBullet) {
  auto text = render_report(suite_of("faulty_never_attack"), constraints(), FeedbackVariant::FullConstraint);
  EXPECT_NE(text.find("[attack_early] The Dragon should be attacked at least once in the first 15 steps. Violated at "
                      "step 1: steps 1..15, found 0 of 1 (deficit 1)."),
            std::string::npos)
      << text;
  EXPECT_NE(text.find("attacked at least once"), std::string::npos);
}

TEST(Report, GoToCaveBulletNamesWitness) {
  auto text = render_report(suite_of("faulty_cave_idle"), constraints(), FeedbackVariant::FullConstraint);
  auto pos = text.find("[go_to_cave_attack]");
  ASSERT_NE(pos, std::string::npos);
  auto line = text.substr(pos, text.find('\n', pos) - pos);
  EXPECT_NE(line.find("after moving to the Cave"), std::string::npos);
  EXPECT_NE(line.find("for v = v4"), std::string::npos);
}

TEST(Report, GenericBullets) {
  auto text = render_report(suite_of("faulty_duplicate_assignment"), constraints(), FeedbackVariant::GenericOnly);
  EXPECT_NE(text.find("- run #1, step 1: component v1 assigned twice: in Farm and Attack"), std::string::npos);
  EXPECT_NE(text.find("- run #1: +4 more generic violations"), std::string::npos);  // 29 steps, 25 shown
  EXPECT_EQ(text.find("[win]"), std::string::npos);
  auto unknown = render_report(suite_of("faulty_unknown_ensemble"), constraints(), FeedbackVariant::GenericOnly);
  EXPECT_NE(unknown.find("invalid ensemble name \"Defend\""), std::string::npos);
  auto capped = lines(unknown);
  // each run: 29 steps x (unknown ensemble + unassigned) = 58; 60 bullets cover 2 runs and 8 of the third
  EXPECT_EQ(capped.back(), "- +166 more generic violations");
}

TEST(Report, VariantMonotonicity) {
  for (const auto& info : builtin_catalog()) {
    auto r = suite_of(info.name);
    auto m = render_report(r, constraints(), FeedbackVariant::MetricsOnly);
    auto g = render_report(r, constraints(), FeedbackVariant::GenericOnly);
    auto f = render_report(r, constraints(), FeedbackVariant::FullConstraint);
    EXPECT_TRUE(contains_lines(g, m)) << info.name;
    EXPECT_TRUE(contains_lines(f, g)) << info.name;
    EXPECT_EQ(g.substr(0, m.size()), m);
    EXPECT_EQ(f.substr(0, g.size()), g);
  }
}

TEST(Generators, ExtractCode) {
  EXPECT_EQ(extract_code("text\n```python\nprint(1)\n```\nmore ```x\ny```"), "print(1)\n");
  EXPECT_EQ(extract_code("```\na\n```"), "a\n");
  EXPECT_EQ(extract_code("no fence"), "no fence");
  EXPECT_EQ(extract_code("```python\nunterminated"), "unterminated");
}

TEST(Generators, ReplayExhaustion) {
  ReplayGenerator g(fixture("seq3"));
  EXPECT_EQ(g.remaining(), 3u);
  EXPECT_NE(g.generate("").find("faulty_crash"), std::string::npos);
  EXPECT_NE(g.generate("").find("faulty_never_attack"), std::string::npos);
  EXPECT_NE(g.generate("").find("reference_good"), std::string::npos);
  EXPECT_THROW(g.generate(""), GeneratorUnavailable);
  EXPECT_THROW(ReplayGenerator("/nonexistent"), ConfigError);
}

TEST(Generators, Builtin) {
  BuiltinGenerator g("reference_good");
  auto code = extract_code(g.generate("anything"));
  EXPECT_EQ(code, builtin_source("reference_good"));
  EXPECT_THROW(BuiltinGenerator("nope"), ConfigError);
}

TEST(Generators, HttpConfigErrors) {
  EXPECT_THROW(HttpChatGenerator(HttpGeneratorConfig{}), ConfigError);
  HttpGeneratorConfig c;
  c.base_url = "http://127.0.0.1:9";
  c.model = "m";
  c.auth_env = "FCLLOOP_TEST_SURELY_UNSET";
  ::unsetenv("FCLLOOP_TEST_SURELY_UNSET");
  EXPECT_THROW(HttpChatGenerator{c}, GeneratorUnavailable);
  EXPECT_THROW(HttpGeneratorConfig::from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(make_generator("carrier-pigeon"), ConfigError);
  EXPECT_EQ(generator_catalog().size(), 3u);
}

TEST(Generators, HttpUnreachableRetries) {
  ::setenv("FCLLOOP_TEST_TOKEN", "t", 1);
  auto c = HttpGeneratorConfig::from_json(
      {{"base_url", "http://127.0.0.1:9/v1"}, {"model", "m"}, {"auth_env", "FCLLOOP_TEST_TOKEN"}, {"backoff_ms", 10}});
  HttpChatGenerator g(c);
  try {
    g.generate("hi");
    FAIL() << "expected GeneratorUnavailable";
  } catch (const GeneratorUnavailable& e) {
    EXPECT_NE(std::string(e.what()).find("after 4 attempt(s)"), std::string::npos) << e.what();
  }
}

TEST(Loop, ConvergesOnRepairSequence) {
  ReplayGenerator g(fixture("seq3"));
  auto cfg = loop_config("seq3", FeedbackVariant::FullConstraint);
  auto out = run_feedback_loop(g, cfg);
  EXPECT_TRUE(out.converged);
  EXPECT_EQ(out.iterations_used, 3);
  ASSERT_EQ(out.history.size(), 3u);
  EXPECT_FALSE(out.history[0].accepted);
  EXPECT_TRUE(out.history[2].accepted);
  for (int k = 1; k <= 3; ++k) {
    auto dir = cfg.run_dir / ("iter-" + std::to_string(k));
    for (const char* f : {"prompt.txt", "response.txt", "am.src", "report.json", "report.txt", "run-5.trace.json"}) {
      EXPECT_TRUE(fs::exists(dir / f)) << dir / f;
    }
    EXPECT_EQ(slurp(dir / "prompt.txt"), out.history[k - 1].prompt);
    EXPECT_EQ(slurp(dir / "report.txt"), out.history[k - 1].report_text);
  }
  // iteration 2 is prompted with iteration 1's report
  EXPECT_NE(out.history[1].prompt.find(out.history[0].report_text), std::string::npos);
  EXPECT_NE(out.history[1].prompt.find("crashed: manager exited with status 1"), std::string::npos);
  auto outcome = nlohmann::json::parse(slurp(cfg.run_dir / "outcome.json"));
  EXPECT_EQ(outcome["iterations_used"], 3);
  EXPECT_EQ(outcome["converged"], true);
}

TEST(Loop, StallsAtCap) {
  ReplayGenerator g(fixture("stall"));
  auto cfg = loop_config("stall", FeedbackVariant::MetricsOnly);
  auto out = run_feedback_loop(g, cfg);
  EXPECT_FALSE(out.converged);
  EXPECT_FALSE(out.aborted.has_value());
  EXPECT_EQ(out.iterations_used, 10);
  EXPECT_EQ(g.remaining(), 0u);  // exactly max_iterations generator calls
  EXPECT_EQ(out.history.back().report_text.find("attack"), std::string::npos);
}

TEST(Loop, ImmediateAcceptance) {
  BuiltinGenerator g("reference_good");
  auto out = run_feedback_loop(g, loop_config("ref", FeedbackVariant::GenericOnly));
  EXPECT_TRUE(out.converged);
  EXPECT_EQ(out.iterations_used, 1);
}

TEST(Loop, GeneratorFailureKeepsHistory) {
  ReplayGenerator g(fixture("seq3"));
  g.generate("");
  g.generate("");
  g.generate("");  // exhausted before the loop starts
  auto out = run_feedback_loop(g, loop_config("abort", FeedbackVariant::FullConstraint));
  EXPECT_TRUE(out.aborted.has_value());
  EXPECT_EQ(out.iterations_used, 0);
  ReplayGenerator g2(fixture("seq3"));
  auto cfg = loop_config("abort2", FeedbackVariant::FullConstraint);
  cfg.max_iterations = 2;
  auto capped = run_feedback_loop(g2, cfg);
  EXPECT_EQ(capped.iterations_used, 2);
  EXPECT_FALSE(capped.converged);
  EXPECT_EQ(g2.remaining(), 1u);
}

TEST(Loop, ArtifactsAreDeterministic) {
  auto run = [](const std::string& name) {
    ReplayGenerator g(fixture("seq3"));
    auto cfg = loop_config(name, FeedbackVariant::FullConstraint);
    run_feedback_loop(g, cfg);
    return cfg.run_dir;
  };
  auto a = run("det_a");
  auto b = run("det_b");
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
}

TEST(Experiment, RowsAndHistogram) {
  auto base = loop_config("experiment", FeedbackVariant::FullConstraint);
  auto csv = base.run_dir / "results.csv";
  auto factory = [] { return std::make_unique<ReplayGenerator>(fixture("seq3")); };
  auto result = run_experiment(factory, {FeedbackVariant::FullConstraint, FeedbackVariant::MetricsOnly}, 2, base, csv);
  ASSERT_EQ(result.rows.size(), 4u);
  auto text = slurp(csv);
  EXPECT_EQ(lines(text).size(), 5u);
  EXPECT_EQ(lines(text)[0], "variant,attempt,converged,iterations");
  EXPECT_EQ(lines(text)[1], "full,1,true,3");
  EXPECT_EQ(histogram(result.rows)["full"], (nlohmann::json{{"3", 2}}));
}

TEST(Experiment, HistogramCounting) {
  std::vector<ExperimentRow> rows = {{FeedbackVariant::FullConstraint, 1, true, 3},
                                     {FeedbackVariant::FullConstraint, 2, true, 3}};
  EXPECT_EQ(histogram(rows).dump(), R"({"full":{"3":2}})");
}
