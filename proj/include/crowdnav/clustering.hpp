#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace crowdnav {

inline constexpr int kNoise = -1;

/// Row-major matrix of feature vectors with a common dimension.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Cluster assignment of a 2D point set. Clusters removed by
/// `filter_large_clusters` keep their id slot with size 0.
struct ClusterLabeling {
  std::vector<int> labels;
  std::vector<Point2> centroids;
  std::vector<std::size_t> sizes;

  std::size_t cluster_count() const { return centroids.size(); }
  std::size_t noise_count() const;
};

/// DBSCAN labels over arbitrary-dimension features (Euclidean metric).
/// Core points have at least `min_pts` neighbours within `eps`, counting
/// themselves. Points are visited in index order, so cluster ids follow
/// discovery order and border points join the first cluster reaching them.
std::vector<int> dbscan_labels(const FeatureMatrix& features, double eps, std::size_t min_pts);

ClusterLabeling dbscan(std::span<const Point2> points, double eps, std::size_t min_pts);

/// Builds centroids and sizes for `labels` over `points`.
ClusterLabeling make_labeling(std::span<const Point2> points, std::vector<int> labels);

/// Velocity per current cluster, by finite difference against the nearest
/// previous centroid. Clusters with no previous centroid within `gating_radius`
/// (and removed clusters) get zero velocity.
std::vector<Point2> associate_centroids(const ClusterLabeling& current, const ClusterLabeling& previous, double dt,
                                        double gating_radius = 1.0);

/// Relabels as noise every cluster whose bounding-box diagonal exceeds `max_extent`.
ClusterLabeling filter_large_clusters(const ClusterLabeling& labeling, std::span<const Point2> points,
                                      double max_extent);

}  // namespace crowdnav
