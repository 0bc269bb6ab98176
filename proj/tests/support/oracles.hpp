#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except for the plain Point2 type.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace oracle {

using crowdnav::Point2;

inline double cross3(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

/// Hull vertices by the all-pairs half-plane test: (i, j) is a hull edge when
/// every other point is strictly left of it or strictly inside the segment.
inline std::set<std::pair<double, double>> brute_force_hull(const std::vector<Point2>& input) {
  std::set<std::pair<double, double>> unique;
  for (const auto& p : input) unique.insert({p.x, p.y});
  std::vector<Point2> pts;
  for (const auto& [x, y] : unique) pts.push_back({x, y});
  std::set<std::pair<double, double>> out;
  if (pts.size() <= 2) {
    for (const auto& p : pts) out.insert({p.x, p.y});
    return out;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      bool edge = true;
      for (std::size_t k = 0; k < pts.size() && edge; ++k) {
        if (k == i || k == j) continue;
        const double c = cross3(pts[i], pts[j], pts[k]);
        if (c > 0.0) continue;
        if (c < 0.0) {
          edge = false;
          continue;
        }
        const Point2 d = pts[j] - pts[i];
        const double t = crowdnav::dot(pts[k] - pts[i], d) / crowdnav::dot(d, d);
        if (!(t > 0.0 && t < 1.0)) edge = false;
      }
      if (edge) {
        out.insert({pts[i].x, pts[i].y});
        out.insert({pts[j].x, pts[j].y});
      }
    }
  }
  return out;
}

/// Even-odd ray casting.
inline bool inside_even_odd(Point2 p, const std::vector<Point2>& ring) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point2 a = ring[i];
    const Point2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

/// Distance to a polygon region by sampling `samples` points evenly along the
/// boundary (by arc length); 0 for interior points.
inline double sampled_polygon_distance(Point2 p, const std::vector<Point2>& ring, std::size_t samples) {
  if (ring.size() >= 3 && inside_even_odd(p, ring)) return 0.0;
  std::vector<double> lengths;
  double perimeter = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const double l = crowdnav::distance(ring[i], ring[(i + 1) % ring.size()]);
    lengths.push_back(l);
    perimeter += l;
  }
  double best = crowdnav::distance(p, ring.front());
  for (std::size_t s = 0; s < samples; ++s) {
    double at = perimeter * static_cast<double>(s) / static_cast<double>(samples);
    std::size_t e = 0;
    while (e + 1 < lengths.size() && at > lengths[e]) at -= lengths[e++];
    const Point2 a = ring[e];
    const Point2 b = ring[(e + 1) % ring.size()];
    const double u = lengths[e] > 0.0 ? std::min(1.0, at / lengths[e]) : 0.0;
    best = std::min(best, crowdnav::distance(p, a + (b - a) * u));
  }
  return best;
}

/// Student t density.
inline double t_pdf(double x, double df) {
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
  return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

/// Student t CDF by composite Simpson quadrature of the density from 0 to |t|.
inline double t_cdf(double t, double df) {
  const double a = std::abs(t);
  if (a == 0.0) return 0.5;
  // Simpson on [0, min(|t|, 1)]; the tail beyond 1 is integrated over u = 1/x.
  const int n = 200000;
  auto simpson = [&](auto f, double lo, double hi) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  double mass;
  if (a <= 1.0) {
    mass = simpson([&](double x) { return t_pdf(x, df); }, 0.0, a);
  } else {
    // [0, 1] directly, [1, a] via x = 1/u, dx = du / u^2, u in [1/a, 1].
    mass = simpson([&](double x) { return t_pdf(x, df); }, 0.0, 1.0) +
           simpson([&](double u) { return t_pdf(1.0 / u, df) / (u * u); }, 1.0 / a, 1.0);
  }
  return t > 0.0 ? 0.5 + mass : 0.5 - mass;
}

struct Welch {
  double diff, se, df;
};

inline Welch welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& v) {
    long double m = 0.0L;
    for (double x : v) m += x;
    m /= v.size();
    long double s = 0.0L;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair<double, double>(static_cast<double>(m), static_cast<double>(s / (v.size() - 1)));
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double qa = va / a.size();
  const double qb = vb / b.size();
  const double df = (qa + qb) * (qa + qb) / (qa * qa / (a.size() - 1) + qb * qb / (b.size() - 1));
  return {ma - mb, std::sqrt(qa + qb), df};
}

/// TOST p-values (lower, upper) for margin m.
inline std::pair<double, double> tost(const std::vector<double>& a, const std::vector<double>& b, double m) {
  const Welch w = welch(a, b);
  const double p_lower = 1.0 - t_cdf((w.diff + m) / w.se, w.df);
  const double p_upper = t_cdf((w.diff - m) / w.se, w.df);
  return {p_lower, p_upper};
}

/// Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
inline double ks_p_value(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace oracle
