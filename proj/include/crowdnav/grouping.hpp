#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/sensing.hpp"

namespace crowdnav {

struct Group {
  int id = 0;
  std::vector<AugmentedEntity> members;
};

struct GroupingParams {
  double group_eps = 1.5;
  double velocity_weight = 1.0;  ///< seconds; maps velocity into position units
  std::size_t min_pts = 1;
  double offset_d = 1.0;
  EggParams egg;
  std::size_t boundary_samples = 36;

  void validate() const;
};

struct Keypoints {
  Point2 left;
  Point2 center;
  Point2 right;

  Point2 centroid() const { return (left + center + right) / 3.0; }
};

enum class SpaceKind { pentagon, hull };

struct GroupSpace {
  int group_id = 0;
  std::variant<Pentagon, ConvexHullShape> shape;

  SpaceKind kind() const { return shape.index() == 0 ? SpaceKind::pentagon : SpaceKind::hull; }
  /// Ring used for distance queries and export.
  std::span<const Point2> outline() const;
  const Pentagon* pentagon() const { return std::get_if<Pentagon>(&shape); }
  const ConvexHullShape* hull() const { return std::get_if<ConvexHullShape>(&shape); }
  /// Key points (left, center, right); only meaningful for pentagons.
  Keypoints keypoints() const;
  Point2 centroid() const;
};

double point_space_distance(Point2 p, const GroupSpace& space);

/// DBSCAN over (x, y, w*v*cos(theta), w*v*sin(theta)). Noise entities become
/// singleton groups. Group ids follow the index of each group's first member.
std::vector<Group> assign_groups(std::span<const AugmentedEntity> entities, const GroupingParams& params);

std::vector<Point2> entity_egg(const AugmentedEntity& e, const GroupingParams& params);

/// Closest point of the nearest member's egg and the angular extremes of the
/// leftmost/rightmost members' eggs, as seen from `robot`.
Keypoints visible_edge_keypoints(const Group& group, Point2 robot, const GroupingParams& params);

/// Offsets the left and right key points by `offset_d` away from `robot`.
/// Self-intersecting rings are repaired by reordering the visible edge by
/// bearing, and failing that, replaced by the convex hull of the five points.
Pentagon build_pentagon(const Keypoints& keypoints, Point2 robot, double offset_d);

GroupSpace convex_hull_space(const Group& group, const GroupingParams& params);

/// Pentagon space for a group. If the group wraps around the robot, each
/// member is tried as its own group; a member whose egg contains the robot
/// falls back to the hull of its egg. Hull spaces are appended to `fallback`.
std::vector<GroupSpace> edge_spaces(const Group& group, Point2 robot, const GroupingParams& params,
                                    std::vector<GroupSpace>& fallback);

}  // namespace crowdnav
