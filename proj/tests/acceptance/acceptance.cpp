// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "crowdnav/cli.hpp"
#include "crowdnav/config.hpp"
#include "crowdnav/report.hpp"
#include "crowdnav/runner.hpp"
#include "crowdnav/stats.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Cross-task online config over synthetic scenes of 3-5 groups of 2-3.
RunConfig paired_config() {
  RunConfig c;
  c.scenario.task = Task::cross;
  c.scenario.mode = Mode::online;
  place_robot(c.scenario);
  c.crowd.source = CrowdSource::synthetic;
  c.crowd.groups_min = 3;
  c.crowd.groups_max = 5;
  c.crowd.synthetic.min_group_size = 2;
  c.crowd.synthetic.max_group_size = 3;
  c.seeds.base = 1000;
  return c;
}

struct Paired {
  std::vector<TrialResult> edge, edge_nopred, entity, hull;
  double seconds = 0;
};

Paired run_paired(std::size_t trials) {
  const RunConfig c = paired_config();
  const std::vector<Method> methods{parse_method("group-edge-linear"), parse_method("group-edge-nopred"),
                                    parse_method("ped-linear"), parse_method("group-hull-linear")};
  const auto t0 = std::chrono::steady_clock::now();
  const auto jobs = plan_jobs(c, methods, trials);
  const auto results = run_jobs(jobs, c.pipeline, 1);
  Paired p;
  p.seconds = seconds_since(t0);
  for (std::size_t i = 0; i < trials; ++i) {
    p.edge.push_back(results[i]);
    p.edge_nopred.push_back(results[trials + i]);
    p.entity.push_back(results[2 * trials + i]);
    p.hull.push_back(results[3 * trials + i]);
  }
  return p;
}

/// Metric pairs where both sides are finite.
std::pair<std::vector<double>, std::vector<double>> metric(const std::vector<TrialResult>& a,
                                                           const std::vector<TrialResult>& b,
                                                           double TrialResult::*field) {
  std::pair<std::vector<double>, std::vector<double>> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(a[i].*field) && std::isfinite(b[i].*field)) {
      out.first.push_back(a[i].*field);
      out.second.push_back(b[i].*field);
    }
  }
  return out;
}

void criteria_1_2_3_5() {
  constexpr std::size_t kTrials = 100;
  const Paired p = run_paired(kTrials);

  {
    const auto [e, n] = metric(p.edge, p.entity, &TrialResult::min_dist);
    const double pv = welch_greater_p(e, n);
    const bool ok = mean(e) > mean(n) && pv < 0.05 && p.seconds <= 600.0;
    report(1, ok,
           fmt("MinD edge %.3f vs ped-linear %.3f, p=%.3g, n=%.0f", mean(e), mean(n), pv, double(e.size())) +
               fmt(", runtime %.1f s", p.seconds));
  }
  {
    const auto [l, z] = metric(p.edge, p.edge_nopred, &TrialResult::min_dist);
    const double pv = welch_greater_p(l, z);
    report(2, mean(l) >= mean(z) && pv < 0.1,
           fmt("MinD linear %.3f vs nopred %.3f, p=%.3g, n=%.0f", mean(l), mean(z), pv, double(l.size())));
  }
  {
    const auto [e, n] = metric(p.edge, p.entity, &TrialResult::path_length);
    const double pv = welch_greater_p(e, n);
    report(3, mean(e) > mean(n) && pv < 0.05, fmt("PL edge %.3f vs ped-linear %.3f, p=%.3g", mean(e), mean(n), pv));
  }
  {
    const auto [ed, hd] = metric(p.edge, p.hull, &TrialResult::min_dist);
    const auto [ep, hp] = metric(p.edge, p.hull, &TrialResult::path_length);
    std::vector<double> es, hs;
    for (std::size_t i = 0; i < kTrials; ++i) {
      es.push_back(p.edge[i].success ? 1.0 : 0.0);
      hs.push_back(p.hull[i].success ? 1.0 : 0.0);
    }
    const auto d = tost_equivalence(ed, hd, 0.2);
    const auto l = tost_equivalence(ep, hp, 2.0);
    const auto s = tost_equivalence(es, hs, 0.03);
    report(5, d.equivalent && l.equivalent && s.equivalent && ed.size() >= 100,
           fmt("p_tost MinD %.3g, PL %.3g, SR %.3g (SR edge %.2f", d.p_tost, l.p_tost, s.p_tost, mean(es)) +
               fmt(" hull %.2f), n=%.0f", mean(hs), double(ed.size())));
  }
}

void criterion_4() {
  RunConfig c = paired_config();
  c.scenario.perception = Perception::lidar;
  c.seeds.base = 2000;
  PipelineConfig pipeline = c.pipeline;
  pipeline.measure_time = true;
  const std::vector<Method> methods{parse_method("group-edge-linear"), parse_method("group-hull-linear")};
  const auto jobs = plan_jobs(c, methods, 10);
  const auto results = run_jobs(jobs, pipeline, 1);
  std::vector<double> edge, hull;
  for (const auto& r : results) {
    auto& dst = r.method == "group-edge-linear" ? edge : hull;
    dst.insert(dst.end(), r.step_times.begin(), r.step_times.end());
  }
  const double me = median(edge), mh = median(hull);
  report(4, mh >= 1.5 * me,
         fmt("median step edge %.2f ms, hull %.2f ms, ratio %.2f", me * 1e3, mh * 1e3, mh / me));
}

void criterion_6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-6, 6);
  LidarConfig exact;
  exact.noise_half_width = 0.0;
  LidarConfig noisy;
  double worst = 0.0;
  std::vector<double> rx, ry;
  for (std::uint64_t scene = 0; rx.size() < 10000; ++scene) {
    std::vector<Circle> peds;
    while (peds.size() < 12) {
      const Point2 c{u(rng), u(rng)};
      if (norm(c) > 1.0) peds.push_back({c, noisy.pedestrian_radius});
    }
    const auto clean = simulate_scan({0, 0}, peds, exact, scene);
    for (const auto& p : clean.points) {
      double best = 1e300;
      for (const auto& c : peds) best = std::min(best, std::abs(distance(p, c.center) - c.radius));
      worst = std::max(worst, best);
    }
    const auto dirty = simulate_scan({0, 0}, peds, noisy, scene);
    if (dirty.points.size() != clean.points.size()) {
      report(6, false, "noisy and noiseless scans hit different rays");
      return;
    }
    for (std::size_t i = 0; i < clean.points.size() && rx.size() < 10000; ++i) {
      rx.push_back(dirty.points[i].x - clean.points[i].x);
      ry.push_back(dirty.points[i].y - clean.points[i].y);
    }
  }
  const double h = noisy.noise_half_width;
  auto uniform_cdf = [h](double x) { return std::clamp((x + h) / (2 * h), 0.0, 1.0); };
  const double px = oracle::ks_p_value(oracle::ks_statistic(rx, uniform_cdf), rx.size());
  const double py = oracle::ks_p_value(oracle::ks_statistic(ry, uniform_cdf), ry.size());
  report(6, worst <= 1e-9 && px > 0.01 && py > 0.01,
         fmt("max on-circle error %.2e m, KS p x %.3f y %.3f over %.0f points", worst, px, py, double(rx.size())));
}

void criterion_7() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(-10, 10);
  std::size_t hull_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n; ++i) {
      // Every fourth set lives on an integer grid to exercise collinear and duplicate points.
      pts.push_back(trial % 4 == 0 ? Point2{std::round(u(rng) / 4), std::round(u(rng) / 4)} : Point2{u(rng), u(rng)});
    }
    const auto hull = convex_hull(pts);
    std::set<std::pair<double, double>> got;
    for (const auto& p : hull.vertices) got.insert({p.x, p.y});
    if (got != oracle::brute_force_hull(pts) || got.size() != hull.vertices.size()) ++hull_mismatch;
  }

  GroupingParams params;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Point2 center = unit_from_angle(u(rng)) * (3.0 + std::abs(u(rng)) / 2);
    const Point2 v = unit_from_angle(u(rng)) * (std::abs(u(rng)) / 8);
    Group g{0, {}};
    const std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      g.members.push_back(make_entity(center + Point2{u(rng), u(rng)} / 10.0, v, EntitySource::pedestrian, int(i)));
    }
    const auto pent = build_pentagon(visible_edge_keypoints(g, {0, 0}, params), {0, 0}, params.offset_d);
    for (int q = 0; q < 10; ++q) {
      const Point2 p = center + Point2{u(rng), u(rng)} / 2.0;
      const double d = point_polygon_distance(p, pent);
      worst = std::max(worst, std::abs(d - oracle::sampled_polygon_distance(p, pent.outline, 10000)));
    }
  }
  report(7, hull_mismatch == 0 && worst <= 1e-3,
         fmt("hull mismatches %.0f/1000, max pentagon distance error %.2e m", double(hull_mismatch), worst));
}

void criterion_8() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0, 1);
  GroupingParams params;
  double offset_err = 0.0;
  std::size_t outside = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Point2 robot{10 * u(rng) - 5, 10 * u(rng) - 5};
    const Point2 center = robot + unit_from_angle(2 * kPi * u(rng)) * (3.0 + 5.0 * u(rng));
    const Point2 v = unit_from_angle(2 * kPi * u(rng)) * (1.5 * u(rng));
    Group g{0, {}};
    const int n = 1 + static_cast<int>(5 * u(rng));
    for (int i = 0; i < n; ++i) {
      const Point2 jitter = unit_from_angle(2 * kPi * u(rng)) * (1.2 * u(rng));
      g.members.push_back(make_entity(center + jitter, v * (0.8 + 0.4 * u(rng)), EntitySource::pedestrian, i));
    }
    const auto kp = visible_edge_keypoints(g, robot, params);
    const auto pent = build_pentagon(kp, robot, params.offset_d);
    offset_err = std::max({offset_err,
                           std::abs(distance(pent.left_offset(), robot) - distance(pent.left(), robot) - params.offset_d),
                           std::abs(distance(pent.right_offset(), robot) - distance(pent.right(), robot) -
                                    params.offset_d)});
    const double ref = bearing(robot, kp.center);
    const double lo = relative_bearing(kp.right, robot, ref);
    const double hi = relative_bearing(kp.left, robot, ref);
    for (const auto& m : g.members) {
      const double b = relative_bearing(m.position, robot, ref);
      if (b < lo - 1e-12 || b > hi + 1e-12) ++outside;
    }
  }
  report(8, offset_err <= 1e-9 && outside == 0,
         fmt("max offset error %.2e m, members outside span %.0f", offset_err, double(outside)));
}

void criterion_9() {
  auto run = [](std::vector<OrcaAgent> agents, int steps) {
    double worst = 1e300;
    for (int s = 0; s < steps; ++s) {
      for (auto& a : agents) {
        const Point2 d = a.goal - a.position;
        const double n = norm(d);
        a.pref_velocity = n > 1e-9 ? d * (std::min(1.3, n) / n) : Point2{};
      }
      agents = orca_step(agents, std::nullopt, 0.1);
      for (std::size_t i = 0; i < agents.size(); ++i)
        for (std::size_t j = i + 1; j < agents.size(); ++j)
          worst = std::min(worst, distance(agents[i].position, agents[j].position) - agents[i].radius -
                                      agents[j].radius);
    }
    bool arrived = true;
    for (const auto& a : agents) arrived = arrived && distance(a.position, a.goal) < 0.25;
    return std::pair(worst, arrived);
  };
  auto agent = [](int id, Point2 p, Point2 goal) {
    OrcaAgent a;
    a.id = id;
    a.position = p;
    a.goal = goal;
    return a;
  };
  const auto [gap2, done2] = run({agent(0, {-5, 0}, {5, 0}), agent(1, {5, 0}, {-5, 0})}, 200);
  std::vector<OrcaAgent> circle;
  for (int i = 0; i < 10; ++i) {
    const Point2 p = unit_from_angle(2 * kPi * i / 10) * 5.0;
    circle.push_back(agent(i, p, p * -1.0));
  }
  const auto [gap10, done10] = run(circle, 600);
  report(9, gap2 > 0 && done2 && gap10 > 0 && done10,
         fmt("head-on min clearance %.3g m (arrived %.0f), swap min clearance %.3g m (arrived %.0f)", gap2,
             double(done2), gap10, double(done10)));
}

void criterion_10() {
  const fs::path dir = fs::temp_directory_path() / "crowdnav_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RunConfig c = paired_config();
  c.seeds.count = 4;
  c.output_dir = (dir / "a").string();
  {
    std::ofstream(dir / "config.json") << config_to_json(c);
  }
  auto sorted_csv = [&](const std::string& sub, const std::vector<std::string>& extra) {
    std::vector<std::string> args{"bench", (dir / "config.json").string(), "--methods",
                                  "group-edge-linear,group-hull-linear,ped-linear", "--out", (dir / sub).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::ostringstream out, err;
    if (run_cli(args, out, err) != kExitOk) return std::string("error: ") + err.str();
    std::ifstream in(dir / sub / "report.csv");
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    std::sort(lines.begin(), lines.end());
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    return joined;
  };
  const auto a = sorted_csv("a", {});
  const auto b = sorted_csv("b", {});
  const auto p = sorted_csv("p", {"--parallel", "2"});
  const bool ok = a == b && a == p && a.rfind("error", 0) != 0;
  report(10, ok, ok ? "two sequential runs and one parallel run produced identical csv"
                    : "csv differs between runs");
  fs::remove_all(dir);
}

void criterion_11() {
  std::mt19937_64 rng(1111);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    std::normal_distribution<double> da(1.5 + 0.3 * u(rng), 0.1 + 0.4 * u(rng));
    std::normal_distribution<double> db(1.5 + 0.3 * u(rng), 0.1 + 0.4 * u(rng));
    std::vector<double> a(5 + rng() % 60), b(5 + rng() % 60);
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const double margin = 0.05 + 0.3 * u(rng);
    const auto r = tost_equivalence(a, b, margin);
    const auto [pl, pu] = oracle::tost(a, b, margin);
    worst = std::max({worst, std::abs(r.p_lower - pl), std::abs(r.p_upper - pu),
                      std::abs(r.p_tost - std::max(pl, pu))});
  }
  report(11, worst <= 1e-6, fmt("max p-value deviation from quadrature oracle %.2e over 20 pairs", worst));
}

}  // namespace

int main() {
  criteria_1_2_3_5();
  criterion_4();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
