#include "crowdnav/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crowdnav/clustering.hpp"

namespace crowdnav {

void GroupingParams::validate() const {
  if (!(group_eps > 0.0)) throw std::invalid_argument("group_eps must be > 0");
  if (!(velocity_weight >= 0.0)) throw std::invalid_argument("velocity_weight must be >= 0");
  if (min_pts < 1) throw std::invalid_argument("grouping min_pts must be >= 1");
  if (!(offset_d > 0.0)) throw std::invalid_argument("offset_d must be > 0");
  if (boundary_samples < 8) throw std::invalid_argument("boundary_samples must be >= 8");
  egg.validate();
}

std::span<const Point2> GroupSpace::outline() const {
  if (const auto* p = pentagon()) return p->outline;
  return hull()->vertices;
}

Keypoints GroupSpace::keypoints() const {
  if (const auto* p = pentagon()) return {p->left(), p->center(), p->right()};
  const Point2 c = centroid();
  return {c, c, c};
}

Point2 GroupSpace::centroid() const {
  const auto ring = outline();
  Point2 sum;
  for (const Point2& p : ring) sum += p;
  return ring.empty() ? sum : sum / static_cast<double>(ring.size());
}

double point_space_distance(Point2 p, const GroupSpace& space) { return point_polygon_distance(p, space.outline()); }

std::vector<Group> assign_groups(std::span<const AugmentedEntity> entities, const GroupingParams& params) {
  FeatureMatrix features{4, {}};
  features.data.reserve(entities.size() * 4);
  for (const auto& e : entities) {
    const Point2 v = e.velocity() * params.velocity_weight;
    features.data.insert(features.data.end(), {e.position.x, e.position.y, v.x, v.y});
  }
  const auto labels = dbscan_labels(features, params.group_eps, params.min_pts);

  std::vector<Group> groups;
  std::vector<int> cluster_to_group;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const int label = labels[i];
    if (label == kNoise) {
      groups.push_back({static_cast<int>(groups.size()), {entities[i]}});
      continue;
    }
    if (static_cast<std::size_t>(label) >= cluster_to_group.size()) cluster_to_group.resize(label + 1, -1);
    if (cluster_to_group[label] < 0) {
      cluster_to_group[label] = static_cast<int>(groups.size());
      groups.push_back({static_cast<int>(groups.size()), {}});
    }
    groups[cluster_to_group[label]].members.push_back(entities[i]);
  }
  return groups;
}

std::vector<Point2> entity_egg(const AugmentedEntity& e, const GroupingParams& params) {
  return egg_boundary(e.position, e.heading, e.speed, params.egg, params.boundary_samples);
}

namespace {

bool robot_inside_egg(const AugmentedEntity& e, Point2 robot, const GroupingParams& params) {
  const double reach = params.egg.base_radius + params.egg.front_gain * e.speed;
  if (distance(e.position, robot) > reach) return false;
  const auto egg = entity_egg(e, params);
  return point_in_polygon(robot, egg) || point_polygon_distance(robot, egg) <= kGeomEps;
}

}  // namespace

Keypoints visible_edge_keypoints(const Group& group, Point2 robot, const GroupingParams& params) {
  if (group.members.empty()) throw std::invalid_argument("empty group");
  std::vector<Point2> positions;
  positions.reserve(group.members.size());
  for (const auto& m : group.members) {
    if (robot_inside_egg(m, robot, params)) throw GroupSurroundsRobot();
    positions.push_back(m.position);
  }

  std::size_t closest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double d = distance(positions[i], robot);
    if (d < best) {
      best = d;
      closest = i;
    }
  }
  AngularExtremes extremes{closest, closest};
  if (positions.size() > 1) extremes = angular_extreme_indices(positions, robot);

  Keypoints kp;
  const auto center_egg = entity_egg(group.members[closest], params);
  best = std::numeric_limits<double>::infinity();
  for (const Point2& b : center_egg) {
    const double d = distance(b, robot);
    if (d < best) {
      best = d;
      kp.center = b;
    }
  }
  const auto left_egg = extremes.left_index == closest ? center_egg : entity_egg(group.members[extremes.left_index], params);
  kp.left = left_egg[angular_extreme_indices(left_egg, robot).left_index];
  const auto right_egg =
      extremes.right_index == closest ? center_egg : entity_egg(group.members[extremes.right_index], params);
  kp.right = right_egg[angular_extreme_indices(right_egg, robot).right_index];
  return kp;
}

namespace {

Point2 offset_away(Point2 p, Point2 robot, double offset_d) {
  const Point2 d = p - robot;
  return p + d * (offset_d / norm(d));
}

std::array<Point2, 5> raw_pentagon(const Keypoints& kp, Point2 robot, double offset_d) {
  return {kp.left, kp.center, kp.right, offset_away(kp.right, robot, offset_d), offset_away(kp.left, robot, offset_d)};
}

}  // namespace

Pentagon build_pentagon(const Keypoints& keypoints, Point2 robot, double offset_d) {
  for (const Point2 p : {keypoints.left, keypoints.center, keypoints.right}) {
    if (distance(p, robot) <= kGeomEps) throw GeometryError("degenerate key point");
  }
  if (!(offset_d >= 0.0)) throw std::invalid_argument("offset_d must be >= 0");

  Pentagon out;
  out.vertices = raw_pentagon(keypoints, robot, offset_d);
  if (is_simple_polygon(out.vertices)) {
    out.outline.assign(out.vertices.begin(), out.vertices.end());
    return out;
  }

  // Reorder the visible edge by bearing (left = largest bearing).
  std::array<Point2, 3> edge{keypoints.left, keypoints.center, keypoints.right};
  const double reference = mean_bearing(edge, robot);
  std::stable_sort(edge.begin(), edge.end(), [&](Point2 a, Point2 b) {
    return relative_bearing(a, robot, reference) > relative_bearing(b, robot, reference);
  });
  const auto reordered = raw_pentagon({edge[0], edge[1], edge[2]}, robot, offset_d);
  if (is_simple_polygon(reordered)) {
    out.vertices = reordered;
    out.outline.assign(reordered.begin(), reordered.end());
    return out;
  }
  out.outline = convex_hull(out.vertices).vertices;
  return out;
}

GroupSpace convex_hull_space(const Group& group, const GroupingParams& params) {
  if (group.members.empty()) throw std::invalid_argument("empty group");
  std::vector<Point2> samples;
  samples.reserve(group.members.size() * params.boundary_samples);
  for (const auto& m : group.members) {
    const auto egg = entity_egg(m, params);
    samples.insert(samples.end(), egg.begin(), egg.end());
  }
  return {group.id, convex_hull(samples)};
}

std::vector<GroupSpace> edge_spaces(const Group& group, Point2 robot, const GroupingParams& params,
                                    std::vector<GroupSpace>& fallback) {
  std::vector<GroupSpace> out;
  auto build = [&](const Group& g) {
    const Keypoints kp = visible_edge_keypoints(g, robot, params);
    out.push_back({g.id, build_pentagon(kp, robot, params.offset_d)});
  };
  try {
    build(group);
    return out;
  } catch (const GroupSurroundsRobot&) {
  } catch (const GeometryError&) {
  }
  for (const auto& m : group.members) {
    const Group single{group.id, {m}};
    try {
      build(single);
    } catch (const GroupSurroundsRobot&) {
      fallback.push_back(convex_hull_space(single, params));
    } catch (const GeometryError&) {
      fallback.push_back(convex_hull_space(single, params));
    }
  }
  return out;
}

}  // namespace crowdnav
