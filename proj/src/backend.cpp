#include "actsynth/backend.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>

namespace actsynth {

namespace {

using nlohmann::json;

json message_content(const std::vector<PromptPart>& parts) {
  json content = json::array();
  for (const auto& p : parts) {
    if (p.kind == PromptPart::Kind::text) {
      content.push_back({{"type", "text"}, {"text", p.content}});
    } else {
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", p.content}}}});
    }
  }
  return content;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendError("endpoint is not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

MockBackend MockBackend::from_json(const json& script) {
  MockBackend m;
  const auto mode = script.value("mode", std::string("sequence"));
  if (mode == "sequence") {
    m.mode_ = Mode::sequence;
    for (const auto& r : script.at("responses")) m.sequence_.push_back(r.get<std::string>());
  } else if (mode == "keyed") {
    m.mode_ = Mode::keyed;
    for (const auto& [k, v] : script.at("responses").items()) m.keyed_[k] = v.get<std::string>();
  } else {
    throw BackendError("mock script: unknown mode '" + mode + "'");
  }
  return m;
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("mock script not found: " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw BackendError("mock script " + path.string() + " is malformed: " + e.what());
  }
}

MockBackend MockBackend::sequence(std::vector<std::string> replies) {
  MockBackend m;
  m.sequence_ = std::move(replies);
  return m;
}

MockBackend::MockBackend(const MockBackend& other) {
  std::lock_guard lock(other.mu_);
  mode_ = other.mode_;
  sequence_ = other.sequence_;
  keyed_ = other.keyed_;
  cursor_ = other.cursor_;
  calls_ = other.calls_;
}

std::string MockBackend::complete(const PromptBundle& prompt) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (mode_ == Mode::sequence) {
    if (cursor_ >= sequence_.size()) {
      throw BackendError("mock script exhausted after " + std::to_string(sequence_.size()) + " replies");
    }
    return sequence_[cursor_++];
  }
  const auto hash = prompt_hash(prompt);
  const auto it = keyed_.find(hash);
  if (it == keyed_.end()) throw BackendError("mock script has no reply for prompt hash " + hash);
  return it->second;
}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

json build_chat_request(const PromptBundle& prompt, const std::string& model, double temperature) {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", json::array({{{"type", "text"}, {"text", prompt.system_text}}})}});
  for (const auto& shot : prompt.fewshot) {
    messages.push_back({{"role", "user"}, {"content", message_content(shot.user_parts)}});
    messages.push_back(
        {{"role", "assistant"}, {"content", json::array({{{"type", "text"}, {"text", shot.assistant_text}}})}});
  }
  messages.push_back({{"role", "user"}, {"content", message_content(prompt.user_parts)}});
  return {{"model", model}, {"messages", messages}, {"temperature", temperature}};
}

std::string extract_reply(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw BackendError("backend reply is not JSON", 200, body);
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
    }
    return text;
  } catch (const json::exception&) {
    throw BackendError("backend reply lacks choices[0].message.content", 200, body);
  }
}

HttpBackend::HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) throw BackendError("http backend requires an endpoint");
}

std::string HttpBackend::complete(const PromptBundle& prompt) {
  const Endpoint ep = split_url(cfg_.endpoint);
  const std::string body = build_chat_request(prompt, cfg_.model_name, cfg_.temperature).dump();
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  std::string last_error;
  std::optional<int> last_status;
  std::string last_body;
  auto backoff = cfg_.initial_backoff;
  const int attempts = std::max(cfg_.max_attempts, 1);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = "network error: " + httplib::to_string(res.error());
      last_status.reset();
    } else if (res->status >= 200 && res->status < 300) {
      return extract_reply(res->body);
    } else if (!transient(res->status)) {
      throw BackendError("backend returned HTTP " + std::to_string(res->status) + ": " + res->body, res->status,
                         res->body);
    } else {
      last_error = "HTTP " + std::to_string(res->status);
      last_status = res->status;
      last_body = res->body;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError("backend unreachable after " + std::to_string(attempts) + " attempts (" + last_error + ")" +
                         (last_body.empty() ? "" : ": " + last_body),
                     last_status, last_body);
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::mock) return std::make_unique<MockBackend>(MockBackend::from_file(cfg.script_path));
  return std::make_unique<HttpBackend>(cfg);
}

}  // namespace actsynth
