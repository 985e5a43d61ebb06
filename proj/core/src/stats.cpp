#include "retro/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>

#include "retro/errors.hpp"

namespace retro {

double Proportion::sigma() const {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

Proportion clopper_pearson(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0) throw EmptySample("clopper_pearson: no trials");
  if (k > n) throw InvalidArgument("clopper_pearson: k > n");
  using boost::math::binomial_distribution;
  const double a = (1.0 - level) / 2.0;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  Proportion r;
  r.k = k;
  r.n = n;
  r.p = kd / nd;
  r.lo = k == 0 ? 0.0
                : binomial_distribution<>::find_lower_bound_on_p(
                      nd, kd, a, binomial_distribution<>::clopper_pearson_exact_interval);
  r.hi = k == n ? 1.0
                : binomial_distribution<>::find_upper_bound_on_p(
                      nd, kd, a, binomial_distribution<>::clopper_pearson_exact_interval);
  return r;
}

double ks_uniform(std::vector<double> sample) {
  if (sample.empty()) throw EmptySample("ks_uniform: empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = sample[i];
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical(std::size_t n, double significance) {
  return std::sqrt(-0.5 * std::log(significance / 2.0)) / std::sqrt(static_cast<double>(n));
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return s / 2.0;
}

double sup_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("sup_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s = std::max(s, std::fabs(p[i] - q[i]));
  return s;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientData("loglog_slope: need at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw InsufficientData("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace retro
