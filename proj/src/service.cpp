#include "actsynth/service.hpp"

#include <algorithm>
#include <regex>

#include <httplib.h>

#include "actsynth/response_parser.hpp"

namespace actsynth {

namespace {

using nlohmann::json;

Service::Response reply(int status, const json& body) { return {status, body.dump()}; }

Service::Response error(int status, const std::string& msg) { return reply(status, {{"error", msg}}); }

}  // namespace

Service::Service(RunConfig cfg, std::unique_ptr<LlmBackend> backend)
    : cfg_(std::move(cfg)), backend_(std::move(backend)) {
  result_ = run_pipeline(cfg_, backend_.get());
  if (!result_.activity.keyframes.empty()) current_ = result_.activity.keyframes.front().index;
}

Service::~Service() { stop(); }

RunResult Service::snapshot() const {
  std::shared_lock lock(state_mu_);
  return result_;
}

int Service::current_keyframe() const {
  std::shared_lock lock(state_mu_);
  return current_;
}

Service::Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex frame_re(R"(/frames/(-?\d+))");
  json doc = json::object();
  if (method == "POST" && !body.empty()) {
    doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return error(400, "request body must be a JSON object");
  }
  try {
    std::smatch m;
    if (method == "GET" && path == "/scene") {
      std::shared_lock lock(state_mu_);
      return reply(200, scene_to_json(result_.scene));
    }
    if (method == "GET" && path == "/activity") return get_activity();
    if (method == "GET" && std::regex_match(path, m, frame_re)) return get_frame(std::stoi(m[1].str()));
    if (method == "POST" && path == "/step") return post_step(doc);
    if (method == "POST" && path == "/user-action") return post_user_action(doc);
    if (method == "POST" && path == "/regenerate") return post_regenerate();
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
  return error(404, "no route for " + method + " " + path);
}

Service::Response Service::get_activity() const {
  std::shared_lock lock(state_mu_);
  json indices = json::array();
  for (const auto& k : result_.activity.keyframes) indices.push_back(k.index);
  json fixed = json::array();
  for (const auto& d : result_.fixed.descriptions) fixed.push_back(format_description(d, &result_.scene));
  return reply(200, {{"activity", activity_to_json(result_.activity, &result_.scene)},
                     {"keyframes", indices},
                     {"current", current_},
                     {"fixed", fixed}});
}

Service::Response Service::get_frame(int t) const {
  std::shared_lock lock(state_mu_);
  const Keyframe* kf = result_.activity.keyframe(t);
  const KeyframePlacement* p = result_.placement(t);
  if (!kf || !p) return error(404, "no keyframe " + std::to_string(t));
  json descs = json::array();
  for (const auto& d : kf->descriptions) {
    json j = description_to_json(d, &result_.scene);
    j["text"] = format_description(d, &result_.scene);
    j["fixed"] = result_.fixed.poses.count(d.subject) > 0;
    descs.push_back(j);
  }
  json traj = json::array();
  for (const auto& tr : result_.trajectories) {
    if (tr.to_keyframe == t) traj.push_back(trajectory_to_json(tr));
  }
  const json placement = placement_to_json(*p);
  return reply(200, {{"keyframe", t},
                     {"descriptions", descs},
                     {"poses", placement.at("characters")},
                     {"groups", placement.at("groups")},
                     {"trajectories", traj}});
}

Service::Response Service::post_step(const json& body) {
  if (!body.contains("direction") || !body.at("direction").is_number_integer()) {
    return error(400, "body must be {\"direction\": 1 | -1}");
  }
  const int dir = body.at("direction").get<int>();
  if (dir != 1 && dir != -1) return error(400, "direction must be 1 or -1");
  std::unique_lock lock(state_mu_);
  const int next = current_ + dir;
  if (!result_.activity.keyframe(next)) {
    return reply(409, {{"error", "keyframe " + std::to_string(next) + " is out of range"}, {"current", current_}});
  }
  current_ = next;
  return reply(200, {{"current", current_}});
}

Service::Response Service::post_user_action(const json& body) {
  if (!body.contains("description") || !body.contains("pose")) {
    return error(400, "body must contain \"description\" and \"pose\"");
  }
  std::lock_guard serial(mutate_mu_);
  Scene scene;
  std::vector<Character> generated;
  FixedState fixed;
  {
    std::shared_lock lock(state_mu_);
    scene = result_.scene;
    fixed = result_.fixed;
    for (const auto& c : result_.activity.characters) {
      if (!fixed.poses.count(c.id)) generated.push_back(c);
    }
  }

  Description desc;
  CharacterPose pose;
  try {
    const auto& d = body.at("description");
    desc = d.is_string() ? parse_description(d.get<std::string>(), scene) : description_from_json(d);
    pose = pose_from_json(body.at("pose"));
  } catch (const std::exception& e) {
    return error(400, e.what());
  }
  if (pose.fundamental != desc.pose) return error(400, "pose.fundamental does not match the description");
  if (std::any_of(generated.begin(), generated.end(), [&](const Character& c) { return c.id == desc.subject; })) {
    return error(400, desc.subject + " is a generated character; pick another id for the user");
  }
  Activity probe;
  probe.characters = generated;
  probe.characters.push_back({desc.subject, "user"});
  probe.keyframes = {Keyframe{0, {desc}}};
  for (const auto& v : validate_activity(probe, scene)) {
    if (v.rule != "completeness") return error(400, describe(v));
  }

  const auto same = [&](const Character& c) { return c.id == desc.subject; };
  fixed.characters.erase(std::remove_if(fixed.characters.begin(), fixed.characters.end(), same),
                         fixed.characters.end());
  fixed.descriptions.erase(std::remove_if(fixed.descriptions.begin(), fixed.descriptions.end(),
                                          [&](const Description& d) { return d.subject == desc.subject; }),
                           fixed.descriptions.end());
  fixed.characters.push_back({desc.subject, "user"});
  fixed.descriptions.push_back(desc);
  fixed.poses[desc.subject] = pose;
  return regenerate_with(fixed);
}

Service::Response Service::post_regenerate() {
  std::lock_guard serial(mutate_mu_);
  FixedState fixed;
  {
    std::shared_lock lock(state_mu_);
    fixed = result_.fixed;
  }
  return regenerate_with(fixed);
}

Service::Response Service::regenerate_with(const FixedState& fixed) {
  RunResult base = snapshot();
  RunResult next;
  try {
    next = regenerate_activity(base, cfg_, *backend_, fixed);
  } catch (const StageError& e) {
    return reply(500, {{"error", e.what()}, {"stage", e.stage()}});
  }
  std::unique_lock lock(state_mu_);
  result_ = std::move(next);
  current_ = result_.activity.keyframes.front().index;
  return reply(200, {{"activity", activity_to_json(result_.activity, &result_.scene)}, {"current", current_}});
}

void Service::serve(const std::string& host, int port) {
  make_server();
  if (!server_->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

int Service::bind_any_port(const std::string& host) {
  make_server();
  return server_->bind_to_any_port(host);
}

void Service::make_server() {
  server_ = std::make_unique<httplib::Server>();
  const auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  server_->Get(".*", route);
  server_->Post(".*", route);
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

void Service::serve_bound() {
  if (server_) server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace actsynth
