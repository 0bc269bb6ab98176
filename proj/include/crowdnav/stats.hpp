#pragma once

#include <span>

namespace crowdnav {

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double n = 0.0;
};

/// Throws std::invalid_argument when n < 3 or a value is not finite.
SampleSummary summarize(std::span<const double> sample);

/// Student t CDF with real-valued degrees of freedom.
double student_t_cdf(double t, double df);

struct WelchTest {
  double diff = 0.0;  ///< mean_a - mean_b
  double se = 0.0;
  double df = 0.0;
};

WelchTest welch(std::span<const double> a, std::span<const double> b);

/// One-sided Welch p-value for H1: mean_a - mean_b > shift. With zero
/// standard error the p-value is 0 if the difference exceeds `shift`, else 1.
double welch_greater_p(std::span<const double> a, std::span<const double> b, double shift = 0.0);

struct TostResult {
  double p_lower = 1.0;  ///< H0: diff <= -margin
  double p_upper = 1.0;  ///< H0: diff >= +margin
  double p_tost = 1.0;
  bool equivalent = false;
};

TostResult tost_equivalence(std::span<const double> a, std::span<const double> b, double margin,
                            double alpha = 0.05);

}  // namespace crowdnav
