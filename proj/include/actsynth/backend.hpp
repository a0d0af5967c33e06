#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "actsynth/prompts.hpp"

namespace actsynth {

enum class BackendKind { http, mock };

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string endpoint;  // full URL of a chat-completions endpoint
  std::string model_name = "gpt-4o";
  std::filesystem::path script_path;
  double temperature = 0.2;
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{120};
};

/// Environment variable holding the bearer token for the HTTP backend.
inline constexpr const char* kApiKeyEnv = "ACTSYNTH_API_KEY";
/// Environment variable overriding the HTTP endpoint.
inline constexpr const char* kEndpointEnv = "ACTSYNTH_ENDPOINT";

class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& msg, std::optional<int> status = std::nullopt, std::string body = {})
      : std::runtime_error(msg), status_(status), body_(std::move(body)) {}
  std::optional<int> status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  std::optional<int> status_;
  std::string body_;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const PromptBundle& prompt) = 0;
};

/// Scripted replies: {"mode":"sequence","responses":[...]} or
/// {"mode":"keyed","responses":{"<prompt hash>": "..."}}.
class MockBackend : public LlmBackend {
 public:
  enum class Mode { sequence, keyed };

  static MockBackend from_json(const nlohmann::json& script);
  static MockBackend from_file(const std::filesystem::path& path);
  static MockBackend sequence(std::vector<std::string> replies);

  MockBackend(const MockBackend& other);
  MockBackend& operator=(const MockBackend&) = delete;

  std::string complete(const PromptBundle& prompt) override;
  std::size_t calls() const;
  Mode mode() const { return mode_; }

 private:
  MockBackend() = default;

  Mode mode_ = Mode::sequence;
  std::vector<std::string> sequence_;
  std::map<std::string, std::string> keyed_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
  std::size_t calls_ = 0;
};

/// OpenAI-compatible chat-completions client with retry on transient failures.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(BackendConfig cfg);
  std::string complete(const PromptBundle& prompt) override;

 private:
  BackendConfig cfg_;
};

/// Request body sent by HttpBackend.
nlohmann::json build_chat_request(const PromptBundle& prompt, const std::string& model, double temperature);
/// Extracts choices[0].message.content; throws BackendError on other shapes.
std::string extract_reply(const std::string& body);

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& cfg);

inline std::string invoke(LlmBackend& backend, const PromptBundle& prompt) { return backend.complete(prompt); }

}  // namespace actsynth
