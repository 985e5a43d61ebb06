#pragma once
/**
 * @file iet.hpp
 * @brief Three-interval exchanges of combinatorial type (3 2 1).
 *
 * Pieces are listed left to right and are left-closed, right-open, except
 * the last piece, which also owns the right end of the domain. Generic maps
 * have three pieces; degenerate ones (one or two) are flagged, not thrown.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "retro/lattice.hpp"

namespace retro {

struct Iet3 {
  double lo{0.0};
  double hi{0.0};
  std::vector<double> lengths;
  std::vector<double> translations;
  /// Return time (induced rotation) or horizontal distance psi (lattice).
  std::vector<double> labels;
  bool degenerate{false};

  [[nodiscard]] std::size_t pieces() const { return lengths.size(); }
  /// Index of the piece containing y; throws OutOfDomain.
  [[nodiscard]] std::size_t piece_of(double y) const;
  /// Left end of piece i.
  [[nodiscard]] double piece_start(std::size_t i) const;
};

/// First-return map of R_alpha to I_eps = [-eps/2, eps/2], labelled by
/// return times. With a, b the three-gap times and d_a = a*alpha,
/// -d_b = b*alpha (mod 1), the pieces in offset u = y + eps/2 are
/// [0, eps - d_a) -> a, [eps - d_a, d_b) -> a + b, [d_b, eps] -> b.
Iet3 induce_rotation(double alpha, double epsilon);

/// Throws DegenerateMap unless the map has three pieces.
void require_three_pieces(const Iet3& map);

double iet_apply(const Iet3& map, double y);
double iet_apply_inverse(const Iet3& map, double y);
/// Label of the piece containing y.
double iet_label(const Iet3& map, double y);

struct LatticeIet {
  Iet3 iet;  ///< on I = [-1/2, 1/2], labels psi
  double y0{0.0};  ///< -y0 = T^{-1}(-y1)
  double y1{0.0};
  double x1{0.0};  ///< abscissa of the first tube point
};

/// Return map of the rightward unit flow between unit vertical segments
/// centred at lattice points. The vector joining a segment to the next one
/// hit from height y is the linear lattice vector w with least w_x > 0 and
/// |y - w_y| <= 1/2; then T(y) = y - w_y and psi(y) = w_x. Throws
/// DegenerateLattice unless T has three pieces.
LatticeIet lattice_iet(const AffineLattice& g);

/// Smallest even k with v_0 - v_1 + v_2 - ... - v_{k-1} <= 0.
std::optional<std::size_t> alternating_exit(std::span<const double> values);

/// Same sum along v_i = psi(T^i(-y0)) for i < cutoff. `head` replaces v_0;
/// with head = x1 the result is exactly Q_limit + 1, while psi(-y0) >= x1
/// only bounds the crossing from above.
std::optional<std::size_t> birkhoff_exit(const Iet3& map, double y0,
                                         std::size_t cutoff,
                                         std::optional<double> head = std::nullopt);

}  // namespace retro
