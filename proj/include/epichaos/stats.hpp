#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace epichaos::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov law
/// (Stephens' small-sample correction). Ties make it conservative.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_q(double x) noexcept;

/// Pearson chi-square goodness of fit against equal cell probabilities.
double chi_square_uniform_p(std::span<const std::int64_t> counts);

/// Pearson chi-square against given cell probabilities. Cells whose expected
/// count is below min_expected are pooled into one.
double chi_square_p(std::span<const std::int64_t> counts, std::span<const double> probabilities,
                    double min_expected = 5.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci_low = 0.0;   // 95%, Student t with n-2 dof
  double slope_ci_high = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Needs at least 3 points
/// for a finite confidence interval.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct MeanCi {
  double mean = 0.0;
  double variance = 0.0;   // unbiased
  double half_width = 0.0; // 1.96 sd / sqrt(n)
  std::size_t n = 0;
};

MeanCi mean_ci(std::span<const double> values);

}  // namespace epichaos::stats
