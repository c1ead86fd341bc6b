#include "fclloop/feedback/prompt.hpp"

#include <cstdio>

#include "fclloop/bundled.hpp"
#include "fclloop/error.hpp"
#include "fclloop/fcl/printer.hpp"

namespace fclloop::feedback {

namespace {

constexpr std::string_view kSectionOpen = "[[section:";

std::string trim_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  while (!s.empty() && s.front() == '\n') s.erase(s.begin());
  return s;
}

std::string fill(const std::string& text, const ScenarioDocs& slots) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto open = text.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    std::string name = text.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it == slots.end()) throw ConfigError("prompt template slot {{" + name + "}} has no value");
    out += it->second;
    pos = close + 2;
  }
  out.append(text, pos);
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  std::string current;
  std::string body;
  auto flush = [&] {
    if (!current.empty()) t.sections[current] = trim_newlines(body);
    body.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (line.starts_with(kSectionOpen) && line.ends_with("]]")) {
      flush();
      current = std::string(line.substr(kSectionOpen.size(), line.size() - kSectionOpen.size() - 2));
    } else if (!current.empty()) {
      body += line;
      body += '\n';
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return t;
}

PromptTemplate PromptTemplate::bundled() { return parse(bundled_prompt_template_text()); }

ScenarioDocs scenario_docs(const ScenarioConfig& config, std::chrono::milliseconds per_step_timeout) {
  ScenarioDocs docs;
  docs["horizon"] = std::to_string(config.horizon);
  docs["dragon_hp0"] = std::to_string(config.dragon_hp0);
  docs["villager_hp0"] = std::to_string(config.villager_hp0);
  docs["wheat0"] = std::to_string(config.wheat0);
  docs["farm_yield"] = std::to_string(config.farm_yield);
  docs["spawn_cost"] = std::to_string(config.spawn_cost);
  docs["dmg_warrior"] = std::to_string(config.dmg_warrior);
  docs["dmg_farmer"] = std::to_string(config.dmg_farmer);
  docs["retaliate_dmg"] = std::to_string(config.retaliate_dmg);
  char pct[32];
  std::snprintf(pct, sizeof pct, "%g", config.retaliate_prob * 100.0);
  docs["retaliate_pct"] = pct;
  docs["timeout_ms"] = std::to_string(per_step_timeout.count());

  std::string mix;
  int farmers = 0;
  int warriors = 0;
  for (const auto& v : config.initial_villagers) (v.role == Role::Farmer ? farmers : warriors) += 1;
  mix = std::to_string(farmers) + " Farmer(s) and " + std::to_string(warriors) +
        " Warrior(s), all in the Village (test runs vary this mix)";
  docs["initial_villagers"] = mix;

  std::string names;
  for (const auto& e : ensemble_catalog()) names += (names.empty() ? "" : ", ") + e;
  docs["ensembles"] = names;
  return docs;
}

std::string constraints_summary(const std::vector<fcl::Constraint>& constraints) {
  std::string out;
  for (const auto& c : constraints) {
    out += "- " + c.name + ": " + (c.gloss.empty() ? "(no description)" : c.gloss) + "\n  FCL: " + fcl::render(c) + "\n";
  }
  return trim_newlines(out);
}

std::string build_prompt(const PromptTemplate& tmpl, const ScenarioDocs& docs,
                         const std::vector<fcl::Constraint>& constraints, const std::optional<std::string>& feedback) {
  for (const char* required : {"interface_contract", "domain_rules", "strategy_intent"}) {
    if (tmpl.sections.count(required) == 0) {
      throw MissingSection(std::string("prompt template lacks section '") + required + "'");
    }
  }
  ScenarioDocs slots = docs;
  slots["constraints"] = constraints_summary(constraints);

  std::string out;
  for (const char* name : {"interface_contract", "domain_rules", "strategy_intent"}) {
    if (!out.empty()) out += "\n\n";
    out += fill(tmpl.sections.at(name), slots);
  }
  if (!constraints.empty()) {
    auto it = tmpl.sections.find("constraints_summary");
    out += "\n\n";
    out += it != tmpl.sections.end() ? fill(it->second, slots)
                                     : "## Constraints\n" + slots["constraints"];
  }
  out += "\n";
  if (feedback) {
    slots["feedback"] = trim_newlines(*feedback);
    auto it = tmpl.sections.find("feedback_block");
    out += "\n";
    out += it != tmpl.sections.end() ? fill(it->second, slots) : "## Feedback\n" + slots["feedback"];
    out += "\n";
  }
  return out;
}

}  // namespace fclloop::feedback
