#pragma once
/**
 * @file rotation.hpp
 * @brief Circle-rotation reduction of the barrier tube.
 *
 * A particle entering at height x0 with slope s meets the barrier at abscissa
 * l (in the bi-infinite tube, after travelling horizontal distance l) exactly
 * when dist(x0 + l*s, Z) <= eps/2. With alpha = s mod 1 this is the orbit of
 * the rotation R_alpha visiting I_eps = [-eps/2, eps/2]. Hitting times m^k,
 * return times n^k = m^k - m^{k-1} and signed reflection abscissae
 * xi^k = n^1 - n^2 + ... +- n^k are the raw material of every exit statistic.
 *
 * Two generators produce identical hitting sequences:
 *   - naive: advance the orbit one step at a time;
 *   - fast : jump to the first entry with first_in_window(), then step between
 *            returns using the three-gap structure {a, b, a+b} of return times.
 * Both test membership with the same exact predicate, so agreement is
 * bit-for-bit.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "retro/phase.hpp"

namespace retro {

class RotationParams {
 public:
  /// Billiard form: x0 = entry height, slope = tan(pi*phi).
  static RotationParams from_slope(double x0, double slope, double epsilon);
  /// Rotation form: alpha is reduced mod 1 and also used as the slope.
  static RotationParams from_alpha(double x0, double alpha, double epsilon);

  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double slope() const { return slope_; }
  [[nodiscard]] double x0() const { return x0_; }

  [[nodiscard]] Phase x0_phase() const { return x0_phase_; }
  [[nodiscard]] Phase alpha_phase() const { return alpha_phase_; }
  [[nodiscard]] const ArcWindow& window() const { return window_; }

  /// dist(x0 + l*alpha, Z) <= eps/2, evaluated exactly.
  [[nodiscard]] bool hits_at(std::uint64_t l) const {
    return window_.contains(x0_phase_ + alpha_phase_.times(l));
  }

 private:
  RotationParams(double x0, double slope, double epsilon);

  double epsilon_{};
  double alpha_{};
  double slope_{};
  double x0_{};
  Phase x0_phase_{};
  Phase alpha_phase_{};
  ArcWindow window_{};
};

/// Hitting times m, relative return times n and signed abscissae xi.
struct HitSequence {
  std::vector<std::uint64_t> m;
  std::vector<std::uint64_t> n;
  std::vector<std::int64_t> xi;

  [[nodiscard]] std::size_t size() const { return m.size(); }
  [[nodiscard]] bool empty() const { return m.empty(); }

  /// Appends the next hitting time (must exceed the last one).
  void push(std::uint64_t hit);
  static HitSequence from_hits(std::span<const std::uint64_t> hits);
};

/// Lower-triangular k x k matrices with xi = A n and m = B n.
struct TransferMatrices {
  std::size_t k{0};
  std::vector<std::int64_t> a;  // row-major, A(i,j) = (-1)^(j+1) for i >= j
  std::vector<std::int64_t> b;  // row-major, B(i,j) = 1 for i >= j

  static TransferMatrices of_size(std::size_t k);
  [[nodiscard]] std::int64_t a_at(std::size_t i, std::size_t j) const {
    return a[i * k + j];
  }
  [[nodiscard]] std::int64_t b_at(std::size_t i, std::size_t j) const {
    return b[i * k + j];
  }
  [[nodiscard]] std::vector<std::int64_t> apply_a(
      std::span<const std::uint64_t> n) const;
  [[nodiscard]] std::vector<std::int64_t> apply_b(
      std::span<const std::uint64_t> n) const;
};

/// Return times to the window take values in {a, b, a+b} (three-gap
/// theorem). `times` holds the distinct candidates in increasing order.
struct GapStructure {
  std::uint64_t a{0};
  std::optional<std::uint64_t> b;
  std::uint64_t times[3]{};
  int count{0};

  /// nullopt when a cannot be resolved below kStepCap.
  static std::optional<GapStructure> compute(Phase alpha,
                                             const ArcWindow& window);
};

enum class HitMode { naive, fast };

/// Incremental generator of hitting times, lazily computing the gap
/// structure. next() returns nullopt once the step budget is exhausted.
class HitStream {
 public:
  HitStream(const RotationParams& params, HitMode mode,
            std::uint64_t step_budget = kStepCap);

  std::optional<std::uint64_t> next();

  /// Number of returns the fast path had to resolve by direct iteration.
  [[nodiscard]] std::uint64_t fallback_steps() const { return fallback_; }

 private:
  std::optional<std::uint64_t> scan_from(std::uint64_t from);
  std::optional<std::uint64_t> first_fast();
  std::optional<std::uint64_t> next_fast();

  RotationParams params_;
  HitMode mode_;
  std::uint64_t budget_;
  std::uint64_t last_{0};
  bool started_{false};
  bool gaps_ready_{false};
  std::optional<GapStructure> gaps_;
  std::uint64_t fallback_{0};
};

HitSequence hitting_times_naive(const RotationParams& params,
                                std::size_t count, std::uint64_t step_budget);

/// Same contract and output as hitting_times_naive. Throws PrecisionLoss
/// only when `strict` is set and the gap structure is unresolvable; by
/// default it falls back to direct iteration internally.
HitSequence hitting_times_fast(const RotationParams& params, std::size_t count,
                               std::uint64_t step_budget = kStepCap,
                               bool strict = false);

/// Q = (first j with n^1 - n^2 + ... +- n^j <= 0) - 1, or nullopt when no
/// prefix qualifies yet.
std::optional<std::size_t> exit_index(std::span<const std::uint64_t> n);

/// 2*sqrt(1+slope^2)*(n^1 + n^3 + ... + n^Q). Q must be odd.
double flight_time(std::span<const std::uint64_t> n, std::size_t q,
                   double slope);

/// floor(T / eps), the last rotation step inside the horizon T.
std::uint64_t horizon_steps(double horizon, double epsilon);

/// N_eps(x0, alpha, T): hits with l in (0, floor(T/eps)].
std::uint64_t visit_count(const RotationParams& params, double horizon);

/// eps*xi_eps(s): position of the constant-speed-1/eps projection.
double continuous_position(const HitSequence& hits, double epsilon, double s);

}  // namespace retro
