#include "crowdnav/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace crowdnav {

std::size_t ClusterLabeling::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Uniform grid over the first two feature coordinates. Any pair within eps
/// in the full metric is also within eps in those two coordinates, so the
/// 3x3 cell neighbourhood is a superset of the true eps-ball.
class NeighborIndex {
 public:
  NeighborIndex(const FeatureMatrix& features, double eps) : features_(features), eps_(eps) {
    if (features.dim < 2) return;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto r = features.row(i);
      cells_[key(cell_of(r[0]), cell_of(r[1]))].push_back(i);
    }
  }

  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const double eps_sq = eps_ * eps_;
    const auto ri = features_.row(i);
    if (features_.dim < 2) {
      for (std::size_t j = 0; j < features_.size(); ++j) {
        if (squared_distance(ri, features_.row(j)) <= eps_sq) out.push_back(j);
      }
      return;
    }
    const std::int64_t cx = cell_of(ri[0]);
    const std::int64_t cy = cell_of(ri[1]);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t j : it->second) {
          if (squared_distance(ri, features_.row(j)) <= eps_sq) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / eps_)); }
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xffffffffULL);
  }

  const FeatureMatrix& features_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

constexpr int kUnvisited = -2;

}  // namespace

std::vector<int> dbscan_labels(const FeatureMatrix& features, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan min_pts must be >= 1");
  const std::size_t n = features.size();
  std::vector<int> labels(n, kUnvisited);
  if (n == 0) return labels;

  const NeighborIndex index(features, eps);
  std::vector<std::size_t> neighbors;
  std::vector<std::size_t> inner;
  std::vector<std::size_t> queue;
  int next_cluster = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    index.query(i, neighbors);
    if (neighbors.size() < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    queue.assign(neighbors.begin(), neighbors.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t q = queue[head];
      if (labels[q] == kNoise) labels[q] = cluster;  // border point
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      index.query(q, inner);
      if (inner.size() >= min_pts) queue.insert(queue.end(), inner.begin(), inner.end());
    }
  }
  return labels;
}

ClusterLabeling make_labeling(std::span<const Point2> points, std::vector<int> labels) {
  ClusterLabeling out;
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  const auto k = static_cast<std::size_t>(max_label + 1);
  std::vector<Point2> sums(k);
  out.sizes.assign(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    sums[labels[i]] += points[i];
    ++out.sizes[labels[i]];
  }
  out.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (out.sizes[c] > 0) out.centroids[c] = sums[c] / static_cast<double>(out.sizes[c]);
  }
  out.labels = std::move(labels);
  return out;
}

ClusterLabeling dbscan(std::span<const Point2> points, double eps, std::size_t min_pts) {
  FeatureMatrix features{2, {}};
  features.data.reserve(points.size() * 2);
  for (const Point2& p : points) {
    features.data.push_back(p.x);
    features.data.push_back(p.y);
  }
  return make_labeling(points, dbscan_labels(features, eps, min_pts));
}

std::vector<Point2> associate_centroids(const ClusterLabeling& current, const ClusterLabeling& previous, double dt,
                                        double gating_radius) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  std::vector<Point2> velocities(current.cluster_count(), Point2{});
  for (std::size_t k = 0; k < current.cluster_count(); ++k) {
    if (current.sizes[k] == 0) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_l = 0;
    for (std::size_t l = 0; l < previous.cluster_count(); ++l) {
      if (previous.sizes[l] == 0) continue;
      const double d = distance(current.centroids[k], previous.centroids[l]);
      if (d < best) {
        best = d;
        best_l = l;
      }
    }
    if (best <= gating_radius) velocities[k] = (current.centroids[k] - previous.centroids[best_l]) / dt;
  }
  return velocities;
}

ClusterLabeling filter_large_clusters(const ClusterLabeling& labeling, std::span<const Point2> points,
                                      double max_extent) {
  if (!(max_extent > 0.0)) throw std::invalid_argument("max_extent must be > 0");
  const std::size_t k = labeling.cluster_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Point2> lo(k, {kInf, kInf});
  std::vector<Point2> hi(k, {-kInf, -kInf});
  for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
    const int c = labeling.labels[i];
    if (c < 0) continue;
    lo[c] = {std::min(lo[c].x, points[i].x), std::min(lo[c].y, points[i].y)};
    hi[c] = {std::max(hi[c].x, points[i].x), std::max(hi[c].y, points[i].y)};
  }
  ClusterLabeling out = labeling;
  std::vector<bool> removed(k, false);
  for (std::size_t c = 0; c < k; ++c) {
    if (labeling.sizes[c] == 0) continue;
    if (distance(lo[c], hi[c]) > max_extent) {
      removed[c] = true;
      out.sizes[c] = 0;
      out.centroids[c] = Point2{};
    }
  }
  for (int& l : out.labels) {
    if (l >= 0 && removed[l]) l = kNoise;
  }
  return out;
}

}  // namespace crowdnav
