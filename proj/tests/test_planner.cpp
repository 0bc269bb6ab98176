#include <doctest.h>

#include <algorithm>

#include "crowdnav/planner.hpp"

using namespace crowdnav;

namespace {

const NavigationTask kTask{{0, -5}, {0, 5}};

KeypointHistory static_history(const Group& g, Point2 robot, const GroupingParams& grouping) {
  const Keypoints kp = visible_edge_keypoints(g, robot, grouping);
  KeypointHistory h;
  h.tau_c = {kp.center};
  h.tau_l = {kp.left};
  h.tau_r = {kp.right};
  h.latest = build_pentagon(kp, robot, grouping.offset_d);
  return h;
}

Group still_group(std::vector<Point2> at) {
  Group g;
  for (std::size_t i = 0; i < at.size(); ++i)
    g.members.push_back(make_entity(at[i], {}, EntitySource::pedestrian, static_cast<int>(i)));
  return g;
}

double min_clearance(const ControlPlan& plan, const ClearanceModel& model) {
  double best = 1e300;
  for (std::size_t k = 1; k < plan.states.size(); ++k) best = std::min(best, model.clearance(k, plan.states[k].position));
  return best;
}

/// Closed loop toward kTask.goal; returns the travelled length.
template <class Planner>
double drive(Planner planner, const MpcParams& params) {
  RobotState s{kTask.start, 0.0};
  double length = 0.0;
  for (int step = 0; step < 300 && distance(s.position, kTask.goal) > 0.5; ++step) {
    const ControlPlan p = planner(s);
    const Point2 next = rollout(s, std::span(p.actions).first(1), params)[1].position;
    length += distance(s.position, next);
    s.position = next;
  }
  CHECK(distance(s.position, kTask.goal) <= 0.5);
  return length;
}

class FailingOracle final : public KeypointOracle {
 public:
  std::vector<KeypointFuture> predict(std::span<const KeypointHistory>, std::size_t, double) override {
    throw OracleUnavailable("test");
  }
};

}  // namespace

TEST_CASE("rollout") {
  MpcParams params;
  const std::vector<Action> push(3, {1.0, 0.0});
  const auto states = rollout({{0, 0}, 0}, push, params);
  REQUIRE(states.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(states[k].position.x == doctest::Approx(0.1 * k));

  params.drive_mode = DriveMode::nonholonomic;
  const auto straight = rollout({{0, 0}, kPi / 2}, std::vector<Action>(5, {1.0, 0.0}), params);
  CHECK(straight.back().position.x == doctest::Approx(0.0).scale(1));
  CHECK(straight.back().position.y == doctest::Approx(0.5));

  const auto turning = rollout({{0, 0}, 0.0}, std::vector<Action>(40, {1.0, kPi / 2}), params);
  double sum = 0.0;
  for (int k = 0; k < 40; ++k) sum += kPi / 2 * params.dt;
  CHECK(turning.back().heading == doctest::Approx(sum));
  CHECK(turning.back().heading == doctest::Approx(2 * kPi));
}

TEST_CASE("step_cost") {
  CHECK(step_cost(kTask.goal, {}, kTask, 0.5, 1.0) == 0.0);

  const std::vector<GroupSpace> square{{0, ConvexHullShape{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}}}};
  CHECK(step_cost({1, 1.5}, square, {{1, 1.5}, {1, 1.5}}, 0.3, 1.0) == doctest::Approx(0.7));
  CHECK(step_cost({0, 0}, square, kTask, 1.0, 1.0) == doctest::Approx(goal_cost({0, 0}, kTask)));
  CHECK(goal_cost({0, 0}, kTask) == doctest::Approx(0.5));
  CHECK(goal_cost({0, 100}, kTask) == 2.0);
}

TEST_CASE("sample_candidates structure") {
  MpcParams params;
  const auto cands = sample_candidates({kTask.start, 0}, kTask, params);
  REQUIRE(cands.size() == params.n_samples);
  for (const auto& c : cands) {
    CHECK(c.size() == params.horizon);
    for (const auto& a : c) CHECK(std::hypot(a.first, a.second) <= params.v_max + 1e-12);
    CHECK(rollout({kTask.start, 0}, c, params).size() == params.horizon + 1);
  }
  CHECK(cands[64] == std::vector<Action>(params.horizon, Action{0, 0}));

  params.drive_mode = DriveMode::nonholonomic;
  for (const auto& c : sample_candidates({kTask.start, 0}, kTask, params))
    for (const auto& a : c) CHECK(std::abs(a.second) <= params.omega_max + 1e-12);
}

TEST_CASE("plan without groups heads straight for the goal") {
  MpcParams params;
  GroupingParams grouping;
  const auto p = plan({kTask.start, 0}, {}, nullptr, kTask, params, grouping);
  const Action a = p.actions.front();
  const double off = std::abs(wrap_angle(std::atan2(a.second, a.first) - kPi / 2));
  CHECK(off <= 5.0 * kPi / 180.0);
  CHECK(std::hypot(a.first, a.second) == doctest::Approx(params.v_max));

  const auto e = plan_entities({kTask.start, 0}, {}, true, kTask, params);
  CHECK(e.actions == p.actions);
  CHECK(e.cost == p.cost);
}

TEST_CASE("plan avoids a group on the straight line") {
  MpcParams params;
  GroupingParams grouping;
  const RobotState s0{{0, -2.5}, 0};
  const std::vector<KeypointHistory> hs{static_history(still_group({{0, 0}, {0.4, 0.3}}), s0.position, grouping)};
  const auto chosen = plan(s0, hs, nullptr, kTask, params, grouping);
  const EdgeClearance model({}, {{0, hs[0].latest}}, grouping.offset_d);
  ControlPlan straight;
  straight.states = rollout(s0, std::vector<Action>(params.horizon, {0, params.v_max}), params);
  CHECK(min_clearance(chosen, model) > min_clearance(straight, model));
}

TEST_CASE("pure avoidance never approaches") {
  MpcParams params;
  params.lambda = 0.0;
  GroupingParams grouping;
  for (const Point2 robot : {Point2{0, -2.5}, Point2{1, -3}, Point2{-2, -1}}) {
    const std::vector<KeypointHistory> hs{static_history(still_group({{0, 0}}), robot, grouping)};
    const auto p = plan({robot, 0}, hs, nullptr, kTask, params, grouping);
    const double d0 = point_polygon_distance(robot, hs[0].latest);
    CHECK(point_polygon_distance(p.states.back().position, hs[0].latest) >= d0);
  }
}

TEST_CASE("entity detour is shorter than the group detour") {
  MpcParams params;
  GroupingParams grouping;
  const auto ped = make_entity({0.2, 0}, {}, EntitySource::pedestrian, 0);
  const std::vector<AugmentedEntity> ents{ped};
  const double entity_length =
      drive([&](const RobotState& s) { return plan_entities(s, ents, false, kTask, params); }, params);
  const Group g{0, {ped}};
  const double group_length = drive(
      [&](const RobotState& s) {
        std::vector<KeypointHistory> hs;
        std::vector<GroupSpace> fallback;
        for (const auto& sp : edge_spaces(g, s.position, grouping, fallback)) {
          const Keypoints kp = sp.keypoints();
          hs.push_back({0, {kp.center}, {kp.left}, {kp.right}, 0, *sp.pentagon()});
        }
        return plan(s, hs, nullptr, kTask, params, grouping, fallback);
      },
      params);
  CHECK(entity_length < group_length);
  CHECK(entity_length >= 10.0 - 0.5);
}

TEST_CASE("an entity running away leaves the path straight") {
  MpcParams params;
  const std::vector<AugmentedEntity> ents{make_entity({0, -3}, {0, 3.0}, EntitySource::pedestrian, 0)};
  const auto p = plan_entities({kTask.start, 0}, ents, true, kTask, params);
  const Action a = p.actions.front();
  CHECK(std::abs(wrap_angle(std::atan2(a.second, a.first) - kPi / 2)) <= 5.0 * kPi / 180.0);
}

TEST_CASE("plan is invariant under rigid transforms") {
  MpcParams params;
  GroupingParams grouping;
  const RobotState s0{{0.3, -3}, 0};
  // Moving members: a stationary egg keeps heading 0 and would not rotate.
  Group g;
  g.members = {make_entity({0.5, 0}, {0.6, 0.1}, EntitySource::pedestrian, 0),
               make_entity({-0.3, 0.4}, {0.6, 0.1}, EntitySource::pedestrian, 1)};
  const auto base = plan(s0, std::vector{static_history(g, s0.position, grouping)}, nullptr, kTask, params, grouping);
  for (const double theta : {0.4, -1.3, 2.9}) {
    const Point2 shift{4.0, -1.5};
    auto tf = [&](Point2 p) { return rotate(p, theta) + shift; };
    Group moved = g;
    for (auto& m : moved.members) m = make_entity(tf(m.position), rotate(m.velocity(), theta), m.source, m.source_id);
    const RobotState s1{tf(s0.position), 0};
    const NavigationTask task{tf(kTask.start), tf(kTask.goal)};
    const auto other = plan(s1, std::vector{static_history(moved, s1.position, grouping)}, nullptr, task, params, grouping);
    CHECK(other.candidate_index == base.candidate_index);
    CHECK(other.cost == doctest::Approx(base.cost).epsilon(1e-9));
  }
}

TEST_CASE("optimize returns the argmin, unchanged by cost scaling") {
  MpcParams params;
  GroupingParams grouping;
  const RobotState s0{{0, -2}, 0};
  const auto h = static_history(still_group({{0, 0}}), s0.position, grouping);
  const EdgeClearance model({}, {{0, h.latest}}, grouping.offset_d);
  const auto chosen = optimize(s0, kTask, params, model);
  const auto cands = sample_candidates(s0, kTask, params);
  std::vector<double> costs;
  for (const auto& c : cands) costs.push_back(rollout_cost(rollout(s0, c, params), kTask, params, model));
  const auto best = static_cast<std::size_t>(std::min_element(costs.begin(), costs.end()) - costs.begin());
  CHECK(chosen.candidate_index == best);
  for (double c : {0.01, 3.0, 1e4}) {
    std::vector<double> scaled;
    for (double x : costs) scaled.push_back(c * x);
    CHECK(static_cast<std::size_t>(std::min_element(scaled.begin(), scaled.end()) - scaled.begin()) == best);
  }
}

TEST_CASE("a small discount favours early clearance") {
  GroupingParams grouping;
  const RobotState s0{{0, -1.6}, 0};
  const auto h = static_history(still_group({{0, 0}, {0.6, 0}, {-0.6, 0}}), s0.position, grouping);
  const EdgeClearance model({}, {{0, h.latest}}, grouping.offset_d);
  MpcParams shortsighted, patient;
  shortsighted.gamma = 0.1;
  patient.gamma = 0.99;
  const auto a = optimize(s0, kTask, shortsighted, model);
  const auto b = optimize(s0, kTask, patient, model);
  CHECK(model.clearance(1, a.states[1].position) >= model.clearance(1, b.states[1].position));
}

TEST_CASE("plan is deterministic and reports oracle fallback") {
  MpcParams params;
  params.seed = 77;
  GroupingParams grouping;
  const RobotState s0{{0, -3}, 0};
  const std::vector<KeypointHistory> hs{static_history(still_group({{0.2, 0}}), s0.position, grouping)};
  LinearOracle linear;
  const auto a = plan(s0, hs, &linear, kTask, params, grouping);
  const auto b = plan(s0, hs, &linear, kTask, params, grouping);
  CHECK(a.actions == b.actions);
  CHECK(a.cost == b.cost);
  CHECK_FALSE(a.oracle_fallback);

  FailingOracle broken;
  const auto c = plan(s0, hs, &broken, kTask, params, grouping);
  const auto d = plan(s0, hs, nullptr, kTask, params, grouping);
  CHECK(c.oracle_fallback);
  CHECK(c.actions == d.actions);

  params.drive_mode = DriveMode::nonholonomic;
  const auto n1 = plan({s0.position, kPi / 2}, hs, &linear, kTask, params, grouping);
  const auto n2 = plan({s0.position, kPi / 2}, hs, &linear, kTask, params, grouping);
  CHECK(n1.actions == n2.actions);
  for (const auto& act : n1.actions) CHECK(std::abs(act.second) <= params.omega_max + 1e-12);
}
