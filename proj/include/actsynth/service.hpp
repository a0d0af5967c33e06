#pragma once

#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "actsynth/pipeline.hpp"

namespace httplib {
class Server;
}

namespace actsynth {

/// Single-session HTTP front end over a RunResult. Reads run concurrently;
/// /user-action and /regenerate are serialized.
class Service {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };

  /// Runs the full pipeline once to populate the session.
  Service(RunConfig cfg, std::unique_ptr<LlmBackend> backend);
  ~Service();

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks until stop().
  void serve(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it; run serve_bound() afterwards.
  int bind_any_port(const std::string& host);
  void serve_bound();
  void stop();

  RunResult snapshot() const;
  int current_keyframe() const;

 private:
  Response get_activity() const;
  Response get_frame(int t) const;
  Response post_step(const nlohmann::json& body);
  Response post_user_action(const nlohmann::json& body);
  Response post_regenerate();
  /// Caller holds mutate_mu_.
  Response regenerate_with(const FixedState& fixed);
  void make_server();

  RunConfig cfg_;
  std::unique_ptr<LlmBackend> backend_;
  mutable std::shared_mutex state_mu_;
  std::mutex mutate_mu_;
  RunResult result_;
  int current_ = 0;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace actsynth
