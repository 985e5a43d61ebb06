#pragma once
/**
 * @file lattice.hpp
 * @brief Affine unimodular lattices: sampling, counting and tube points.
 *
 * A lattice is stored as a matrix M (rows r0, r1, det 1) plus shift
 * coefficients c in [0,1)^2; its points are (k + c0, l + c1) M for integer
 * k, l. Keeping c rather than v = cM avoids cancellation when M is far
 * from reduced.
 */

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace retro {

using Vec2 = std::array<double, 2>;

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a{1}, b{0}, c{0}, d{1};
  [[nodiscard]] double det() const { return a * d - b * c; }
};

class AffineLattice {
 public:
  /// |det m - 1| must be <= 1e-12; shift coefficients are reduced mod 1.
  AffineLattice(const Mat2& m, const Vec2& shift_coeffs);
  /// Lattice Z^2 m + v.
  static AffineLattice from_translation(const Mat2& m, const Vec2& v);

  [[nodiscard]] const Mat2& matrix() const { return m_; }
  [[nodiscard]] const Vec2& shift_coeffs() const { return c_; }
  /// v = c M, a point of the lattice coset in the fundamental cell of Z^2 M.
  [[nodiscard]] Vec2 translation() const;

  [[nodiscard]] Vec2 point(std::int64_t k, std::int64_t l) const;
  /// Same matrix, no shift.
  [[nodiscard]] AffineLattice linear() const { return {m_, Vec2{0, 0}}; }
  /// Same point set on a Lagrange-Gauss reduced basis.
  [[nodiscard]] AffineLattice reduced() const;

 private:
  Mat2 m_;
  Vec2 c_;
};

/// Axis-aligned box; x_lo is excluded when x_lo_open.
struct Box {
  double x_lo{0}, x_hi{0}, y_lo{0}, y_hi{0};
  bool x_lo_open{false};

  [[nodiscard]] bool contains(long double x, long double y) const {
    const bool left = x_lo_open ? x > x_lo : x >= x_lo;
    return left && x <= x_hi && y >= y_lo && y <= y_hi;
  }
  [[nodiscard]] double area() const { return (x_hi - x_lo) * (y_hi - y_lo); }
};

/// R(T) = (0, T] x [-1/2, 1/2].
Box tube_rect(double horizon);

/// Calls fn(x, y) for every lattice point in the box, in no particular order.
void for_each_point_in_box(const AffineLattice& g, const Box& box,
                           const std::function<void(long double, long double)>& fn);

std::uint64_t count_in_box(const AffineLattice& g, const Box& box);

/// F_T(g) = #(Z^2 g in R(T)).
std::uint64_t count_in_rect(const AffineLattice& g, double horizon);

inline constexpr double kDefaultYMax = 1e6;

/// Haar-random affine unimodular lattice. The shape tau is drawn from
/// dx dy / y^2 on the standard fundamental domain cut at Im tau <= y_max,
/// the rotation and the shift coefficients uniformly.
AffineLattice haar_sample(std::mt19937_64& rng, double y_max = kDefaultYMax);

/// n_-(x, alpha) Phi^t: M = [[e^{-t/2}, alpha e^{t/2}], [0, e^{t/2}]], shift
/// coefficients (0, x). Throws Overflow for t > 60.
AffineLattice geodesic_push(double x, double alpha, double t);

struct LimitProcessSample {
  std::vector<double> x;  ///< abscissae of tube points, increasing
  std::vector<double> y;
  std::vector<double> eta;  ///< eta_1 = x_1, eta_k = x_k - x_{k-1}
  std::vector<double> xi;  ///< alternating partial sums of eta
  std::optional<std::size_t> q_limit;  ///< (first j with xi_j <= 0) - 1
};

/// First `count` points of the lattice in (0, inf) x [-1/2, 1/2] by
/// abscissa. Throws DegenerateLattice for abscissae closer than 1e-12 or
/// ordinates within 1e-12 of +-1/2, BudgetExhausted when fewer than `count`
/// points lie below x_budget.
LimitProcessSample tube_points(const AffineLattice& g, std::size_t count,
                               double x_budget = 1e9);

/// Q_limit without materialising the sample; nullopt when Q_limit > k_max.
std::optional<std::uint64_t> limit_exit_index(const AffineLattice& g,
                                              std::uint64_t k_max);

}  // namespace retro
