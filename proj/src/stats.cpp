#include "crowdnav/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace crowdnav {

SampleSummary summarize(std::span<const double> sample) {
  if (sample.size() < 3) throw std::invalid_argument("sample needs at least 3 values");
  SampleSummary s;
  s.n = static_cast<double>(sample.size());
  for (double x : sample) {
    if (!std::isfinite(x)) throw std::invalid_argument("sample contains a non-finite value");
    s.mean += x;
  }
  s.mean /= s.n;
  for (double x : sample) s.variance += (x - s.mean) * (x - s.mean);
  s.variance /= s.n - 1.0;
  return s;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

WelchTest welch(std::span<const double> a, std::span<const double> b) {
  const SampleSummary sa = summarize(a);
  const SampleSummary sb = summarize(b);
  const double qa = sa.variance / sa.n;
  const double qb = sb.variance / sb.n;
  WelchTest w;
  w.diff = sa.mean - sb.mean;
  w.se = std::sqrt(qa + qb);
  const double denom = qa * qa / (sa.n - 1.0) + qb * qb / (sb.n - 1.0);
  w.df = denom > 0.0 ? (qa + qb) * (qa + qb) / denom : sa.n + sb.n - 2.0;
  return w;
}

namespace {

// P(T > (diff - shift) / se)
double upper_tail(const WelchTest& w, double shift) {
  if (w.se == 0.0) return w.diff > shift ? 0.0 : 1.0;
  const double t = (w.diff - shift) / w.se;
  if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(w.df), t));
}

// P(T < (diff - shift) / se)
double lower_tail(const WelchTest& w, double shift) {
  if (w.se == 0.0) return w.diff < shift ? 0.0 : 1.0;
  return student_t_cdf((w.diff - shift) / w.se, w.df);
}

}  // namespace

double welch_greater_p(std::span<const double> a, std::span<const double> b, double shift) {
  return upper_tail(welch(a, b), shift);
}

TostResult tost_equivalence(std::span<const double> a, std::span<const double> b, double margin, double alpha) {
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  const WelchTest w = welch(a, b);
  TostResult r;
  r.p_lower = upper_tail(w, -margin);
  r.p_upper = lower_tail(w, margin);
  r.p_tost = std::max(r.p_lower, r.p_upper);
  r.equivalent = r.p_tost < alpha;
  return r;
}

}  // namespace crowdnav
