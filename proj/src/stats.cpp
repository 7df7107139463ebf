#include "epichaos/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace epichaos::stats {

double kolmogorov_q(double x) noexcept {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    if (term < 1e-16 * sum) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

double chi_square_uniform_p(std::span<const std::int64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square needs at least two cells");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

double chi_square_p(std::span<const std::int64_t> counts, std::span<const double> probabilities,
                    double min_expected) {
  if (counts.size() != probabilities.size()) throw std::invalid_argument("chi-square size mismatch");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  struct Cell {
    double o, e;
  };
  std::vector<Cell> cells;
  Cell pool{0.0, 0.0};
  for (std::size_t q = 0; q < counts.size(); ++q) {
    const Cell c{static_cast<double>(counts[q]), total * probabilities[q]};
    if (c.e < min_expected) {
      pool.o += c.o;
      pool.e += c.e;
    } else {
      cells.push_back(c);
    }
  }
  if (pool.e == 0.0 && pool.o > 0.0) return 0.0;
  if (pool.e > 0.0) {
    // A pool that is still too small joins the smallest regular cell.
    if (pool.e < min_expected && !cells.empty()) {
      auto smallest = std::min_element(cells.begin(), cells.end(),
                                       [](const Cell& a, const Cell& b) { return a.e < b.e; });
      smallest->o += pool.o;
      smallest->e += pool.e;
    } else {
      cells.push_back(pool);
    }
  }
  if (cells.size() < 2) return 1.0;
  double chi2 = 0.0;
  for (const Cell& c : cells) chi2 += (c.o - c.e) * (c.o - c.e) / c.e;
  const boost::math::chi_squared dist(static_cast<double>(cells.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() < 3) {
    fit.slope_se = std::numeric_limits<double>::infinity();
    fit.slope_ci_low = -fit.slope_se;
    fit.slope_ci_high = fit.slope_se;
    return fit;
  }
  double rss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  const boost::math::students_t t(n - 2.0);
  const double q = boost::math::quantile(boost::math::complement(t, 0.025));
  fit.slope_ci_low = fit.slope - q * fit.slope_se;
  fit.slope_ci_high = fit.slope + q * fit.slope_se;
  return fit;
}

MeanCi mean_ci(std::span<const double> values) {
  MeanCi out;
  out.n = values.size();
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / static_cast<double>(values.size() - 1);
    out.half_width = 1.96 * std::sqrt(out.variance / static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace epichaos::stats
