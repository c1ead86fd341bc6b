#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fclloop::feedback {

/// Produces a response (expected to contain a fenced code block) for a prompt.
class CodeGenerator {
 public:
  virtual ~CodeGenerator() = default;
  /// Throws GeneratorUnavailable.
  virtual std::string generate(const std::string& prompt) = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
};

/// Body of the first fenced block (``` with an optional language tag), or the
/// whole response if there is none.
std::string extract_code(const std::string& response);

/// Numbered response files (sorted by the leading number in the file name),
/// served in order.
class ReplayGenerator : public CodeGenerator {
 public:
  /// Throws ConfigError if the directory is missing or empty.
  explicit ReplayGenerator(const std::filesystem::path& dir);
  std::string generate(const std::string& prompt) override;
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] std::size_t remaining() const { return files_.size() - next_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  std::size_t next_ = 0;
};

/// Always answers with the Python source of a builtin manager.
class BuiltinGenerator : public CodeGenerator {
 public:
  /// Throws ConfigError for an unknown builtin.
  explicit BuiltinGenerator(std::string name);
  std::string generate(const std::string& prompt) override;
  [[nodiscard]] std::string describe() const override;

 private:
  std::string name_;
};

struct HttpGeneratorConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1; /chat/completions is appended
  std::string model;
  std::string auth_env = "OPENAI_API_KEY";
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  int retries = 3;  // extra attempts after the first
  std::chrono::milliseconds backoff{1000};  // doubled after every failed attempt
  std::chrono::seconds timeout{300};

  /// Keys base_url, model, auth_env, temperature, max_tokens, plus retries,
  /// backoff_ms and timeout_s. Throws ConfigError.
  static HttpGeneratorConfig from_json(const nlohmann::json& doc);
};

/// Chat-completion client: one user message, reply read from
/// choices[0].message.content.
class HttpChatGenerator : public CodeGenerator {
 public:
  /// Throws ConfigError (missing base_url/model) or GeneratorUnavailable
  /// (auth variable unset).
  explicit HttpChatGenerator(HttpGeneratorConfig config);
  std::string generate(const std::string& prompt) override;
  [[nodiscard]] std::string describe() const override;

 private:
  HttpGeneratorConfig config_;
  std::string token_;
};

struct GeneratorKind {
  std::string name;
  std::string usage;
  std::string description;
};

const std::vector<GeneratorKind>& generator_catalog();

/// `http`, `replay:<dir>` or `builtin:<name>`. The HTTP settings come from
/// `http_config` (the "generator" object of a config file). Throws ConfigError.
std::unique_ptr<CodeGenerator> make_generator(std::string_view spec, const nlohmann::json& http_config = {});

}  // namespace fclloop::feedback
