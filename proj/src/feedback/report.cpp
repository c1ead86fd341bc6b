#include "fclloop/feedback/report.hpp"

#include <map>

namespace fclloop::feedback {

std::string_view to_string(FeedbackVariant v) {
  switch (v) {
    case FeedbackVariant::MetricsOnly: return "metrics";
    case FeedbackVariant::GenericOnly: return "generic";
    case FeedbackVariant::FullConstraint: return "full";
  }
  return "full";
}

std::optional<FeedbackVariant> parse_variant(std::string_view text) {
  if (text == "metrics" || text == "MetricsOnly") return FeedbackVariant::MetricsOnly;
  if (text == "generic" || text == "GenericOnly") return FeedbackVariant::GenericOnly;
  if (text == "full" || text == "FullConstraint") return FeedbackVariant::FullConstraint;
  return std::nullopt;
}

namespace {

std::string run_tag(const RunResult& r) { return "run #" + std::to_string(r.index + 1); }

std::string metrics_bullet(const RunResult& r) {
  const auto& m = r.metrics;
  std::string out = "- " + run_tag(r) + " (seed " + std::to_string(r.seed) + "): " + (m.win ? "win" : "loss") +
                    ", dragon HP " + std::to_string(m.dragon_hp_end) + ", steps " + std::to_string(m.steps_survived) +
                    ", wheat " + std::to_string(m.wheat_end);
  if (r.protocol_failed()) out += ", aborted";
  return out;
}

std::string generic_bullet(const RunResult& r, const GenericViolation& v) {
  std::string out = "- " + run_tag(r);
  if (v.step) out += ", step " + std::to_string(*v.step + 1);
  out += ": ";
  // Multi-line details (stderr tails) are folded onto one bullet line.
  for (char c : v.detail) {
    if (c == '\n') out += " | ";
    else if (c != '\r') out += c;
  }
  return out;
}

// weight: how many violations the bullet stands for
struct Bullet {
  std::string text;
  std::size_t weight = 1;
};

void append_capped(std::string& out, const std::vector<Bullet>& bullets, const char* noun) {
  std::size_t shown = std::min(bullets.size(), kMaxReportBullets);
  for (std::size_t i = 0; i < shown; ++i) out += bullets[i].text + "\n";
  std::size_t hidden = 0;
  for (std::size_t i = shown; i < bullets.size(); ++i) hidden += bullets[i].weight;
  if (bullets.size() > shown) out += "- +" + std::to_string(hidden) + " more " + noun + "\n";
}

}  // namespace

std::string render_counterexample(const fcl::Counterexample& cex, const std::string& gloss) {
  std::string out = "[" + cex.constraint_name + "] ";
  if (!gloss.empty()) out += gloss + " ";
  out += "Violated at step " + std::to_string(cex.anchor_step + 1);
  if (!cex.witnesses.empty()) {
    out += " for ";
    bool first = true;
    for (const auto& [var, id] : cex.witnesses) {
      out += (first ? "" : ", ") + var + " = " + id;
      first = false;
    }
  }
  out += ": steps " + std::to_string(cex.window.lo + 1) + ".." + std::to_string(cex.window.hi) + ", found " +
         std::to_string(cex.achieved) + " of " + std::to_string(cex.required) + " (deficit " +
         std::to_string(cex.deficit()) + ").";
  if (!cex.excerpts.empty()) {
    out += " Evidence:";
    std::size_t last = static_cast<std::size_t>(-1);
    for (const auto& e : cex.excerpts) {
      if (e.step != last) {
        out += (last == static_cast<std::size_t>(-1) ? " step " : "; step ") + std::to_string(e.step + 1) + ":";
        last = e.step;
      } else {
        out += ",";
      }
      out += " " + e.subject + " = " + e.value;
    }
    out += ".";
  }
  return out;
}

std::string render_report(const SuiteResult& result, const std::vector<fcl::Constraint>& constraints,
                          FeedbackVariant variant) {
  std::string out;
  for (const auto& r : result.runs) out += metrics_bullet(r) + "\n";
  if (variant == FeedbackVariant::MetricsOnly) return out;

  std::vector<Bullet> generic;
  for (const auto& r : result.runs) {
    std::size_t shown = std::min(r.generic.size(), kMaxGenericPerRun);
    for (std::size_t i = 0; i < shown; ++i) generic.push_back({generic_bullet(r, r.generic[i])});
    if (std::size_t rest = r.generic.size() - shown) {
      generic.push_back({"- " + run_tag(r) + ": +" + std::to_string(rest) + " more generic violations", rest});
    }
  }
  append_capped(out, generic, "generic violations");
  if (variant == FeedbackVariant::GenericOnly) return out;

  std::map<std::string, std::string> glosses;
  for (const auto& c : constraints) glosses[c.name] = c.gloss;
  std::vector<Bullet> functional;
  for (const auto& r : result.runs) {
    if (!r.functional_evaluated) {
      functional.push_back({"- " + run_tag(r) + ": functional constraints not checked (protocol failure)", 0});
      continue;
    }
    for (const auto& v : r.verdicts) {
      if (v.satisfied) continue;
      if (v.error) {
        functional.push_back({"- " + run_tag(r) + ": [" + v.constraint_name + "] could not be evaluated: " + *v.error});
        continue;
      }
      auto gloss = glosses.count(v.constraint_name) ? glosses[v.constraint_name] : std::string();
      for (const auto& cex : v.violations) {
        functional.push_back({"- " + run_tag(r) + ": " + render_counterexample(cex, gloss)});
      }
      if (std::size_t rest = v.violations_total - v.violations.size()) {
        functional.push_back({"- " + run_tag(r) + ": [" + v.constraint_name + "] +" + std::to_string(rest) +
                                  " more violations",
                              rest});
      }
    }
  }
  append_capped(out, functional, "functional violations");
  return out;
}

nlohmann::json report_json(const SuiteResult& result, FeedbackVariant variant, const std::string& text) {
  nlohmann::json doc = to_json(result);
  doc["variant"] = std::string(to_string(variant));
  doc["report"] = text;
  return doc;
}

}  // namespace fclloop::feedback
