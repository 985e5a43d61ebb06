#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace retro {

/// k successes out of n with an exact (Clopper-Pearson) interval.
struct Proportion {
  std::uint64_t k{0};
  std::uint64_t n{0};
  double p{0.0};
  double lo{0.0};
  double hi{1.0};
  /// Binomial standard error sqrt(p(1-p)/n).
  [[nodiscard]] double sigma() const;
};

Proportion clopper_pearson(std::uint64_t k, std::uint64_t n, double level = 0.95);

/// Kolmogorov-Smirnov distance of the sample to U[0, 1].
double ks_uniform(std::vector<double> sample);
/// Asymptotic critical value sqrt(-ln(a/2)/2)/sqrt(n).
double ks_critical(std::size_t n, double significance = 0.01);

/// Half the l1 distance; inputs are probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);
double sup_distance(std::span<const double> p, std::span<const double> q);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace retro
