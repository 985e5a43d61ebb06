#pragma once
/**
 * @file experiments.hpp
 * @brief Monte Carlo estimators for exit statistics of the retroreflecting
 * tube and their lattice-side limits.
 *
 * Every estimator is a plug-in frequency over independent samples, run in
 * fixed blocks (see parallel.hpp) so the output depends on the seed only.
 * Samples that cannot be resolved are counted in Discards and excluded
 * from the denominators.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "retro/billiard.hpp"
#include "retro/lattice.hpp"
#include "retro/rotation.hpp"
#include "retro/stats.hpp"

namespace retro {

/// Probability law of (y_in, phi) on [0, 1] x [-1/2, 1/2].
struct MeasureSpec {
  enum class Kind { uniform_omega, custom_density };
  Kind kind{Kind::uniform_omega};
  std::function<double(double y_in, double phi)> density;
  double density_max{1.0};  ///< upper bound used for rejection sampling

  static MeasureSpec uniform();
  /// Throws InvalidArgument unless the density integrates to 1 within 1e-6
  /// and is nonnegative on the quadrature nodes.
  static MeasureSpec custom(std::function<double(double, double)> density,
                            double density_max);
};

/// Tensor Gauss-Legendre integral of the density over the domain.
double integrate_density(const std::function<double(double, double)>& density);

struct Discards {
  std::uint64_t corner_hit{0};
  std::uint64_t cutoff{0};
  std::uint64_t budget_exhausted{0};
  std::uint64_t precision_loss{0};
  std::uint64_t censored{0};  ///< no exit within the return cap
  std::uint64_t degenerate_lattice{0};
  std::uint64_t resampled_direction{0};  ///< phi = 0, +-1/2 or y_in = 0 redrawn
  std::uint64_t duplicate_alpha{0};  ///< repeated alpha bit patterns within a block

  [[nodiscard]] std::uint64_t total() const {
    return corner_hit + cutoff + budget_exhausted + precision_loss + censored +
           degenerate_lattice;
  }
  Discards& operator+=(const Discards& o);
};

InitialCondition draw_initial(const MeasureSpec& measure, std::mt19937_64& rng,
                              Discards& discards);

inline constexpr std::uint64_t kMaxReturns = 1'000'000;

enum class ExitStatus { exited, censored, budget_exhausted, precision_loss };

struct SimulatedExit {
  ExitStatus status{ExitStatus::exited};
  ExitRecord record;  ///< valid when status == exited
  std::uint64_t returns{0};
};

/// Exit of one trajectory through the rotation picture.
SimulatedExit simulate_exit(const InitialCondition& ic, double epsilon,
                            std::uint64_t max_returns = kMaxReturns);

/// Q_eps alone; nullopt when Q > k_max. Throws BudgetExhausted when the
/// orbit stops returning before Q is decided.
std::optional<std::uint64_t> simulate_q(const RotationParams& params,
                                        std::uint64_t k_max);

struct RunOptions {
  std::uint64_t seed{1};
  unsigned threads{1};
  MeasureSpec measure{};
};

struct AuditStats {
  std::uint64_t checked{0};
  std::uint64_t mismatches{0};
  std::uint64_t corner_hit{0};
  std::uint64_t cutoff{0};
  Discards& fold_into(Discards& d) const;
};

struct ReversalEstimate {
  double epsilon{0.0};
  double delta{0.0};
  Proportion event;  ///< reversed and |y_out - y_in| < delta
  Proportion reversed;  ///< reversed alone, same sample set
  Discards discards;
  AuditStats audit;  ///< billiard traces on every 100th sample
};

ReversalEstimate estimate_reversal(double epsilon, double delta,
                                   std::uint64_t samples,
                                   const RunOptions& options);

/// Law of an index in {1..k_max} plus the mass beyond.
struct Pmf {
  std::vector<std::uint64_t> counts;  ///< counts[k-1]
  std::uint64_t tail{0};
  std::uint64_t n{0};
  Discards discards;

  [[nodiscard]] std::uint64_t k_max() const { return counts.size(); }
  [[nodiscard]] double p(std::uint64_t k) const;
  [[nodiscard]] double tail_mass() const;
  [[nodiscard]] Proportion interval(std::uint64_t k) const;
  /// (p(1), ..., p(k_cut), mass beyond k_cut).
  [[nodiscard]] std::vector<double> lumped(std::uint64_t k_cut) const;
};

Pmf estimate_Q_pmf(double epsilon, std::uint64_t samples, std::uint64_t k_max,
                   const RunOptions& options);

/// P{Q_limit = k} over Haar-random affine lattices.
Pmf limiting_G(std::uint64_t samples, std::uint64_t k_max, std::uint64_t seed,
               unsigned threads = 1, double y_max = kDefaultYMax);

struct PmfComparison {
  std::vector<double> p_dyn;  ///< lumped at k_cut
  std::vector<double> p_lat;
  double tv{0.0};
};

/// Total variation over {1..k_cut} with the mass beyond as one category.
PmfComparison compare_pmfs(const Pmf& dyn, const Pmf& lat, std::uint64_t k_cut);

struct TCdf {
  std::vector<double> grid;
  std::vector<std::uint64_t> below;  ///< #{eps*T < t}
  std::uint64_t n{0};  ///< exited plus censored
  Discards discards;  ///< censored mass is discards.censored

  [[nodiscard]] double cdf(std::size_t i) const;
  [[nodiscard]] double censored_mass() const;
};

TCdf estimate_T_cdf(double epsilon, std::uint64_t samples,
                    const std::vector<double>& grid, const RunOptions& options);

struct TailDiagnostic {
  std::vector<std::uint64_t> k;
  std::vector<std::uint64_t> exceed;  ///< #{N >= k}
  std::uint64_t n{0};
  std::vector<std::uint64_t> fit_k;  ///< k with exceed >= 100
  double slope{0.0};

  [[nodiscard]] double probability(std::size_t i) const;
};

/// P{N_eps(x, alpha, s) >= k} for k in [k_lo, k_hi] over uniform (x, alpha)
/// on the torus, with the log-log slope over k whose counts reach 100.
/// Throws InsufficientData when fewer than two k qualify.
TailDiagnostic tail_diagnostic(double s, double epsilon, std::uint64_t samples,
                               std::uint64_t k_lo, std::uint64_t k_hi,
                               std::uint64_t seed, unsigned threads = 1);

/// P{eps*m^k > t_k for all k} over uniform (x, alpha) on the torus.
/// Throws ArityError unless 1 <= t.size() <= 3.
Proportion joint_hit_cdf(double epsilon, std::uint64_t samples,
                         const std::vector<double>& t, std::uint64_t seed,
                         unsigned threads = 1);

/// P{#(lattice in R(t_k)) <= k - 1 for all k} over Haar-random lattices.
Proportion joint_hit_cdf_lattice(std::uint64_t samples,
                                 const std::vector<double>& t,
                                 std::uint64_t seed, unsigned threads = 1,
                                 double y_max = kDefaultYMax);

struct HitThroughput {
  double naive_hits_per_second{0.0};
  double fast_hits_per_second{0.0};
  std::uint64_t hits{0};
  bool identical{true};  ///< fast output equals naive output bit for bit
  [[nodiscard]] double speedup() const {
    return naive_hits_per_second > 0 ? fast_hits_per_second / naive_hits_per_second : 0.0;
  }
};

/// Fixed workload: `cases` uniform (x, alpha) pairs, `hits` hits each,
/// generated by both hitting-time paths.
HitThroughput measure_hit_throughput(double epsilon, std::uint64_t cases,
                                     std::uint64_t hits, std::uint64_t seed);

inline const std::vector<double> kDefaultEpsilonGrid{0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3};

struct SweepReport {
  std::vector<ReversalEstimate> rows;
  [[nodiscard]] Discards discards() const;
};

SweepReport reversal_sweep(const std::vector<double>& epsilons, double delta,
                           std::uint64_t samples, const RunOptions& options);

}  // namespace retro
