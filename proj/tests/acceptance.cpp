// One PASS/FAIL line per acceptance criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "actsynth/hash.hpp"
#include "actsynth/pipeline.hpp"
#include "actsynth/service.hpp"
#include "checks.hpp"
#include "golden.hpp"
#include "grids.hpp"
#include "test_util.hpp"
#include "toy.hpp"

using namespace actsynth;
using namespace actsynth::test;
using nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Check {
 public:
  explicit Check(Outcome& o) : o_(o) {}
  void operator()(bool cond, const std::string& what) {
    if (!cond && o_.ok) {
      o_.ok = false;
      o_.detail = what;
    }
  }

 private:
  Outcome& o_;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<std::string(Check&)>& body) {
  Outcome o;
  Check check(o);
  std::string summary;
  const auto start = std::chrono::steady_clock::now();
  try {
    summary = body(check);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (o.ok && secs >= budget_s) {
    o.ok = false;
    o.detail = "over the runtime budget";
  }
  if (!o.ok) ++failures;
  std::printf("%s  %-28s %7.2fs / %.0fs  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), secs, budget_s,
              o.ok ? summary.c_str() : o.detail.c_str());
  std::fflush(stdout);
}

ViewObservation obs(std::size_t idx, std::vector<int> marks) {
  ViewObservation o;
  o.candidate_index = idx;
  o.surviving_marks = std::move(marks);
  return o;
}

bool shares(const ViewObservation& a, const ViewObservation& b) {
  for (int x : a.surviving_marks)
    if (std::find(b.surviving_marks.begin(), b.surviving_marks.end(), x) != b.surviving_marks.end()) return true;
  return false;
}

bool reachable_all(const std::vector<ViewObservation>& v) {
  if (v.empty()) return true;
  std::vector<char> seen(v.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!seen[j] && shares(v[i], v[j])) {
        seen[j] = 1;
        stack.push_back(j);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

}  // namespace

int main() {
  criterion("mark filter thresholds", 1.0, [](Check& check) {
    const Mark base{0, 0.5, 5.0, 0.0, 0.0};
    struct Case {
      Mark m;
      bool keep;
    };
    std::vector<Case> cases;
    const auto with = [&](int id, auto set, bool keep) {
      Mark m = base;
      m.object_id = id;
      set(m);
      cases.push_back({m, keep});
    };
    with(1, [](Mark& m) { m.area_fraction = 0.039; }, false);
    with(2, [](Mark& m) { m.area_fraction = 0.041; }, true);
    with(3, [](Mark& m) { m.distance = 9.9; }, true);
    with(4, [](Mark& m) { m.distance = 10.1; }, false);
    with(5, [](Mark& m) { m.out_of_view_fraction = 0.19; }, true);
    with(6, [](Mark& m) { m.out_of_view_fraction = 0.21; }, false);
    std::vector<Mark> marks;
    std::vector<int> expect;
    for (const auto& c : cases) {
      marks.push_back(c.m);
      if (c.keep) expect.push_back(c.m.object_id);
      check(filter_marks({c.m}) == (c.keep ? std::vector<int>{c.m.object_id} : std::vector<int>{}),
            "mark " + std::to_string(c.m.object_id));
    }
    check(filter_marks(marks) == expect, "combined suite");
    return "6 boundary marks filtered exactly";
  });

  criterion("set cover oracle", 30.0, [](Check& check) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t nc = 1 + rng() % 12;
      const int no = 1 + int(rng() % 10);
      std::vector<ViewObservation> cands;
      std::set<int> universe;
      for (std::size_t i = 0; i < nc; ++i) {
        std::vector<int> m;
        for (int o = 0; o < no; ++o)
          if (rng() % 3 == 0) m.push_back(o);
        universe.insert(m.begin(), m.end());
        cands.push_back(obs(i, m));
      }
      const auto cover = greedy_cover(cands, universe);
      std::set<int> got;
      for (const auto& c : cover) got.insert(c.surviving_marks.begin(), c.surviving_marks.end());
      check(got == universe, "instance " + std::to_string(t) + " not covered");
      std::size_t opt = nc + 1, largest = 0;
      for (const auto& c : cands) largest = std::max(largest, c.surviving_marks.size());
      for (std::uint32_t mask = 1; mask < (1u << nc); ++mask) {
        std::set<int> u;
        for (std::size_t i = 0; i < nc; ++i)
          if (mask & (1u << i)) u.insert(cands[i].surviving_marks.begin(), cands[i].surviving_marks.end());
        if (u == universe) opt = std::min<std::size_t>(opt, __builtin_popcount(mask));
      }
      if (universe.empty()) {
        check(cover.empty(), "empty universe");
        continue;
      }
      double h = 0.0;
      for (std::size_t k = 1; k <= largest; ++k) h += 1.0 / double(k);
      check(double(cover.size()) <= h * double(opt) + 1e-12, "instance " + std::to_string(t) + " exceeds bound");
      worst = std::max(worst, double(cover.size()) / double(opt));
    }
    return "100 instances, worst |greedy|/|OPT| = " + fmt(worst);
  });

  criterion("view connectivity", 10.0, [](Check& check) {
    std::mt19937_64 rng(202);
    int done = 0, added = 0;
    while (done < 100) {
      std::vector<ViewObservation> cands;
      for (std::size_t i = 0; i < 12; ++i) {
        std::vector<int> m;
        for (int o = 0; o < 14; ++o)
          if (rng() % 5 == 0) m.push_back(o);
        cands.push_back(obs(i, m));
      }
      std::vector<ViewObservation> nonempty;
      for (const auto& c : cands)
        if (!c.surviving_marks.empty()) nonempty.push_back(c);
      if (!reachable_all(nonempty)) continue;
      std::set<int> universe;
      for (const auto& c : nonempty) universe.insert(c.surviving_marks.begin(), c.surviving_marks.end());
      const auto cover = greedy_cover(nonempty, universe);
      const auto r = augment_connectivity(cover, nonempty);
      check(reachable_all(r.views), "instance " + std::to_string(done) + " left disconnected");
      check(r.connected(), "instance " + std::to_string(done) + " reports residual components");
      added += int(r.views.size() - cover.size());
      ++done;
    }
    return "100 connectable instances connected, " + std::to_string(added) + " bridge views added";
  });

  criterion("cost templates", 1.0, [](Check& check) {
    check(std::abs(positional_cost(1.5, 0.5) - (1.0 - std::exp(-1.0))) <= 1e-12, "positional D=0.5 d=1.5");
    check(rotational_cost({1, 0}, {0, 1}) == 0.5, "orthogonal");
    check(rotational_cost({3, 0}, {0, -0.2}) == 0.5, "orthogonal scaled");
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 10.0), ang(-kPi, kPi), sc(0.01, 100.0);
    for (int i = 0; i < 10000; ++i) {
      const double d = u(rng) + 0.01, a = u(rng), b = a + u(rng) + 1e-3;
      const double ca = positional_cost(a, d), cb = positional_cost(b, d);
      check(ca >= 0.0 && ca <= 1.0, "positional range");
      check((ca == 0.0) == (a <= d), "positional zero iff within D");
      check(a <= d || cb > ca, "positional monotone");
      const Vec2 x = heading(ang(rng)), y = heading(ang(rng));
      const double r = rotational_cost(x, y);
      check(r >= 0.0 && r <= 1.0, "rotational range");
      check(std::abs(r - rotational_cost(y, x)) <= 1e-12, "rotational symmetry");
      check(std::abs(r - rotational_cost(x * sc(rng), y * sc(rng))) <= 1e-12, "rotational scale invariance");
    }
    return "analytic values exact, 10^4-point sweep clean";
  });

  criterion("acceptance statistics", 5.0, [](Check& check) {
    std::mt19937_64 rng(404);
    double worst_z = 0.0;
    for (double dc : {0.5, 1.0, 2.0}) {
      for (double t : {0.1, 0.5, 1.0}) {
        const int n = 10000;
        int acc = 0;
        for (int i = 0; i < n; ++i) acc += metropolis_accept(1.0, 1.0 + dc, t, rng);
        const double p = std::min(std::exp(-dc / t), 1.0);
        const double sd = std::sqrt(p * (1.0 - p) / n);
        const double err = std::abs(double(acc) / n - p);
        const bool ok = sd > 0.0 ? err <= 3.0 * sd : err <= 1.0 / n;
        check(ok, "dC=" + fmt(dc) + " t=" + fmt(t) + " rate " + fmt(double(acc) / n) + " vs " + fmt(p));
        if (sd > 0.0) worst_z = std::max(worst_z, err / sd);
      }
    }
    return "9 settings within 3 sd, worst " + fmt(worst_z) + " sd";
  });

  criterion("optimizer vs grid search", 60.0, [](Check& check) {
    const Scene room = toy_room();
    const GroupResult r = optimize_group(toy_group(room), AnnealSchedule{}, derive_seed(1, "toy"));
    const double oracle = toy_grid_search();
    check(r.cost <= oracle + 0.02, "annealed " + fmt(r.cost) + " vs grid " + fmt(oracle));
    return "annealed " + fmt(r.cost) + ", grid " + fmt(oracle);
  });

  criterion("astar optimality", 20.0, [](Check& check) {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<int> coord(0, 63);
    int grids = 0;
    while (grids < 50) {
      const OccupancyGrid g = random_grid(rng);
      Cell s{}, t{};
      std::optional<StepCount> oracle;
      for (int tries = 0; tries < 200 && !oracle; ++tries) {
        s = {coord(rng), coord(rng)};
        t = {coord(rng), coord(rng)};
        if (g.blocked(s) || g.blocked(t)) continue;
        oracle = dijkstra(g, s, t);
      }
      if (!oracle) continue;
      const CellPath p = astar_cells(g, s, t);
      check(p.steps == *oracle, "grid " + std::to_string(grids) + " cost differs from Dijkstra");
      check(densely_free(g, astar(g, g.center(s), g.center(t))), "grid " + std::to_string(grids) + " smoothed path collides");
      ++grids;
    }
    return "50 grids, costs equal to Dijkstra, smoothed paths free";
  });

  criterion("golden replay", 30.0, [](Check& check) {
    const Scene s = apartment();
    const auto areas = cluster_areas(s);
    const auto g = parse_graph_response(read_text(fixture("fig11_task1.txt")), areas);
    check(g.edges == std::vector<AreaEdge>{{0, 2}, {1, 2}}, "graph edges");
    const auto act = parse_activity_response(read_text(fixture("fig11_task2.txt")), s).activity;
    check(act.characters.size() == 2 && act.keyframes.size() == 3, "activity shape");
    check(act.keyframes.size() == 3 &&
              *act.keyframes[1].find("character_0") == *act.keyframes[0].find("character_0"),
          "keyframe 1 carry-over");
    check(act == golden_activity(), "activity differs from fixture");

    const RunConfig cfg = RunConfig::load(fixture("golden_run.json"));
    const RunResult a = run_pipeline(cfg);
    const RunResult b = run_pipeline(cfg);
    check(a.graph.edges == g.edges && a.activity == golden_activity(), "pipeline activity");
    const double worst = max_group_cost(a);
    check(worst < 0.05, "max group cost " + fmt(worst));
    const auto overlaps = interpenetrations(a);
    check(overlaps.empty(), overlaps.empty() ? "" : "overlap " + overlaps[0].what + " " + fmt(overlaps[0].depth));
    check(a.to_json().dump() == b.to_json().dump(), "runs differ");
    return "edges (0,2),(1,2); 2 characters x 3 keyframes; max group cost " + fmt(worst) + "; deterministic";
  });

  criterion("interactive fixity", 30.0, [](Check& check) {
    const RunConfig cfg = RunConfig::load(fixture("serve_run.json"));
    Service svc(cfg, make_backend(cfg.backend));
    const Scene s = apartment();
    const auto points = generate_sitting_points(s.at(11));
    const CharacterPose pose{points.at(4).position, 0.25, -0.5, FundamentalPose::sitting, 4};
    const std::string tuple = "(character_u, sitting, object_11-sofa, (talk to, character_0))";
    const auto resp = svc.handle("POST", "/user-action", json{{"description", tuple}, {"pose", pose_to_json(pose)}}.dump());
    check(resp.status == 200, "status " + std::to_string(resp.status) + ": " + resp.body);
    const RunResult r = svc.snapshot();
    bool in_prompt = false;
    for (const auto& p : r.provenance)
      if (p.stage.rfind("activity", 0) == 0 && prompt_to_json(p.prompt).dump().find(tuple) != std::string::npos)
        in_prompt = true;
    check(in_prompt, "description missing from the activity prompt");
    check(r.placements.size() == r.activity.keyframes.size(), "placement count");
    for (const auto& p : r.placements) {
      check(p.poses.count("character_u") && p.poses.at("character_u") == pose,
            "user pose altered in keyframe " + std::to_string(p.keyframe));
      const json frame = json::parse(svc.handle("GET", "/frames/" + std::to_string(p.keyframe), "").body);
      check(frame.at("poses").at("character_u").at("position") == pose_to_json(pose).at("position") &&
                frame.at("poses").at("character_u").at("body_yaw") == pose.body_yaw &&
                frame.at("poses").at("character_u").at("head_yaw") == pose.head_yaw,
            "frame output differs from the posted pose");
      const Description* d = r.activity.keyframe(p.keyframe)->find("character_0");
      if (d && d->reference == 11) {
        const auto& c0 = p.poses.at("character_0");
        check(c0.sitting_point_index && *c0.sitting_point_index != 4, "co-seated character on the user's point");
        check(distance(c0.position.xy(), pose.position.xy()) >= 2 * kCapsuleRadius, "capsules overlap");
      }
    }
    return "user tuple in prompt, pose identical in " + std::to_string(r.placements.size()) +
           " keyframes, co-seated character on a separate point";
  });

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
