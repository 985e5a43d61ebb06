#pragma once
/**
 * @file phase.hpp
 * @brief Exact fixed-point arithmetic on the circle R/Z.
 *
 * A Phase stores a point of the circle as a 128-bit binary fraction, so the
 * rotation orbit x0 + l*alpha mod 1 is computed with wrapping integer
 * arithmetic and never drifts. Every finite double in [2^-75, 2^63) converts
 * to a Phase exactly (mod 1), which makes the orbit of a double-valued input
 * exact rather than merely accurate.
 *
 * The closed target arc [-eps/2, eps/2] is an ArcWindow. Membership is a
 * single wrapping add and compare.
 *
 * first_in_arc() answers "first j >= 0 with start + j*step in [lo, hi]" in
 * O(log) operations via a Euclid-style recursion on the modulus; it is the
 * engine behind the fast hitting-time path.
 */

#include <cstdint>
#include <optional>

namespace retro {

using u128 = unsigned __int128;

/// Point of R/Z as raw/2^128.
struct Phase {
  u128 raw{0};

  friend constexpr Phase operator+(Phase a, Phase b) { return {a.raw + b.raw}; }
  friend constexpr Phase operator-(Phase a, Phase b) { return {a.raw - b.raw}; }
  friend constexpr bool operator==(Phase a, Phase b) = default;

  /// k * p mod 1.
  [[nodiscard]] constexpr Phase times(std::uint64_t k) const {
    return {raw * static_cast<u128>(k)};
  }
};

/// frac(v) as a Phase. Exact when the binary expansion of v stops at or
/// above 2^-128 (every double with |v| >= 2^-75); otherwise truncated.
Phase phase_of(double v);

/// Nearest double in [0, 1).
double to_double(Phase p);

/// Distance to the nearest integer, ||p||, in raw units.
u128 circle_distance(Phase p);
double circle_distance_real(Phase p);

/// Closed arc [-half, half] around 0.
class ArcWindow {
 public:
  ArcWindow() = default;
  /// Arc of total length `length` (0 < length < 1).
  static ArcWindow of_length(double length);

  [[nodiscard]] constexpr bool contains(Phase p) const {
    return p.raw + half_ <= width();
  }
  [[nodiscard]] constexpr u128 half() const { return half_; }
  [[nodiscard]] constexpr u128 width() const { return half_ + half_; }

 private:
  explicit constexpr ArcWindow(u128 half) : half_(half) {}
  u128 half_{0};
};

/// Upper bound on every step count returned by the solvers below.
inline constexpr std::uint64_t kStepCap = std::uint64_t{1} << 62;

/// Smallest j >= 0 with start + j*step in the closed arc [lo, hi] (lo <= hi,
/// no wrap through 0). nullopt if no such j below kStepCap.
std::optional<std::uint64_t> first_in_arc(Phase start, Phase step, u128 lo,
                                          u128 hi);

/// Smallest j >= 0 with start + j*step inside the window.
std::optional<std::uint64_t> first_in_window(Phase start, Phase step,
                                             const ArcWindow& window);

}  // namespace retro
