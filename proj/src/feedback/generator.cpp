#include "fclloop/feedback/generator.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "fclloop/am_runtime.hpp"
#include "fclloop/error.hpp"

namespace fclloop::feedback {

namespace fs = std::filesystem;

std::string extract_code(const std::string& response) {
  auto open = response.find("```");
  if (open == std::string::npos) return response;
  auto body = response.find('\n', open);
  if (body == std::string::npos) return response;
  ++body;
  auto close = response.find("```", body);
  if (close == std::string::npos) return response.substr(body);
  return response.substr(body, close - body);
}

// ---- replay ----

ReplayGenerator::ReplayGenerator(const fs::path& dir) : dir_(dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw ConfigError("replay directory not found: " + dir.string());
  std::vector<std::pair<long, fs::path>> numbered;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    std::size_t digits = 0;
    while (digits < name.size() && std::isdigit(static_cast<unsigned char>(name[digits]))) ++digits;
    if (digits == 0) continue;
    numbered.emplace_back(std::stol(name.substr(0, digits)), entry.path());
  }
  if (numbered.empty()) throw ConfigError("replay directory has no numbered response files: " + dir.string());
  std::sort(numbered.begin(), numbered.end());
  for (auto& [n, p] : numbered) files_.push_back(std::move(p));
}

std::string ReplayGenerator::generate(const std::string&) {
  if (next_ >= files_.size()) {
    throw GeneratorUnavailable("replay responses exhausted after " + std::to_string(files_.size()) + " file(s)");
  }
  std::ifstream in(files_[next_++], std::ios::binary);
  if (!in) throw GeneratorUnavailable("cannot read " + files_[next_ - 1].string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ReplayGenerator::describe() const { return "replay:" + dir_.string(); }

// ---- builtin ----

BuiltinGenerator::BuiltinGenerator(std::string name) : name_(std::move(name)) {
  if (!is_builtin(name_)) throw ConfigError("unknown builtin manager: " + name_);
}

std::string BuiltinGenerator::generate(const std::string&) {
  return "```python\n" + builtin_source(name_) + "```\n";
}

std::string BuiltinGenerator::describe() const { return "builtin:" + name_; }

// ---- http ----

HttpGeneratorConfig HttpGeneratorConfig::from_json(const nlohmann::json& doc) {
  HttpGeneratorConfig c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw ConfigError("generator config must be an object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "base_url") c.base_url = value.get<std::string>();
      else if (key == "model") c.model = value.get<std::string>();
      else if (key == "auth_env") c.auth_env = value.get<std::string>();
      else if (key == "temperature") c.temperature = value.get<double>();
      else if (key == "max_tokens") c.max_tokens = value.get<int>();
      else if (key == "retries") c.retries = value.get<int>();
      else if (key == "backoff_ms") c.backoff = std::chrono::milliseconds(value.get<long>());
      else if (key == "timeout_s") c.timeout = std::chrono::seconds(value.get<long>());
      else throw ConfigError("unknown generator config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad generator config: ") + e.what());
  }
  if (c.retries < 0 || c.retries > 3) throw ConfigError("generator retries must be within 0..3");
  return c;
}

HttpChatGenerator::HttpChatGenerator(HttpGeneratorConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("http generator needs base_url");
  if (config_.model.empty()) throw ConfigError("http generator needs model");
  if (config_.auth_env.empty()) throw ConfigError("http generator needs auth_env");
  const char* token = std::getenv(config_.auth_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw GeneratorUnavailable("environment variable " + config_.auth_env + " is not set");
  }
  token_ = token;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

std::string HttpChatGenerator::generate(const std::string& prompt) {
  auto url = split_url(config_.base_url);
  nlohmann::json body{{"model", config_.model},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (config_.temperature) body["temperature"] = *config_.temperature;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  const std::string payload = body.dump();

  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(std::chrono::seconds(30));
    client.set_bearer_token_auth(token_);
    auto res = client.Post(url.path + "/chat/completions", payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw GeneratorUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    try {
      auto doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw GeneratorUnavailable(std::string("unexpected chat-completion response: ") + e.what());
    }
  }
  throw GeneratorUnavailable("generator unreachable after " + std::to_string(config_.retries + 1) +
                             " attempt(s): " + last_error);
}

std::string HttpChatGenerator::describe() const { return "http:" + config_.model; }

// ---- catalog ----

const std::vector<GeneratorKind>& generator_catalog() {
  static const std::vector<GeneratorKind> kinds = {
      {"http", "http", "chat-completion endpoint configured by the \"generator\" config object"},
      {"replay", "replay:<dir>", "numbered response files served in order"},
      {"builtin", "builtin:<name>", "source of a builtin manager"},
  };
  return kinds;
}

std::unique_ptr<CodeGenerator> make_generator(std::string_view spec, const nlohmann::json& http_config) {
  if (spec == "http") return std::make_unique<HttpChatGenerator>(HttpGeneratorConfig::from_json(http_config));
  if (spec.starts_with("replay:")) return std::make_unique<ReplayGenerator>(fs::path(spec.substr(7)));
  if (spec.starts_with("builtin:")) return std::make_unique<BuiltinGenerator>(std::string(spec.substr(8)));
  throw ConfigError("unknown generator '" + std::string(spec) + "' (use http, replay:<dir> or builtin:<name>)");
}

}  // namespace fclloop::feedback
