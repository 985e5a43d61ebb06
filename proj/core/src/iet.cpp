#include "retro/iet.hpp"

#include <algorithm>
#include <cmath>

#include "retro/errors.hpp"
#include "retro/phase.hpp"
#include "retro/rotation.hpp"

namespace retro {
namespace {

double raw_to_real(u128 raw) { return std::ldexp(static_cast<double>(raw), -128); }

// Drops empty pieces and sets the degenerate flag.
void finish(Iet3& map) {
  Iet3 out;
  out.lo = map.lo;
  out.hi = map.hi;
  for (std::size_t i = 0; i < map.lengths.size(); ++i) {
    if (map.lengths[i] > 0.0) {
      out.lengths.push_back(map.lengths[i]);
      out.translations.push_back(map.translations[i]);
      out.labels.push_back(map.labels[i]);
    }
  }
  out.degenerate = out.lengths.size() != 3;
  map = std::move(out);
}

}  // namespace

double Iet3::piece_start(std::size_t i) const {
  double s = lo;
  for (std::size_t j = 0; j < i; ++j) s += lengths[j];
  return s;
}

std::size_t Iet3::piece_of(double y) const {
  if (!(y >= lo && y <= hi)) throw OutOfDomain("iet: point outside the domain");
  double end = lo;
  for (std::size_t i = 0; i + 1 < lengths.size(); ++i) {
    end += lengths[i];
    if (y < end) return i;
  }
  return lengths.size() - 1;
}

Iet3 induce_rotation(double alpha, double epsilon) {
  const auto params = RotationParams::from_alpha(0.0, alpha, epsilon);
  const ArcWindow& window = params.window();
  const u128 w = window.width();
  Iet3 map;
  map.lo = -epsilon / 2.0;
  map.hi = epsilon / 2.0;
  if (params.alpha_phase().raw == 0) {
    map.lengths = {epsilon};
    map.translations = {0.0};
    map.labels = {1.0};
    finish(map);
    return map;
  }
  const auto gaps = GapStructure::compute(params.alpha_phase(), window);
  if (!gaps) throw PrecisionLoss("induce_rotation: return time beyond the step cap");
  const u128 da = params.alpha_phase().times(gaps->a).raw;
  if (!gaps->b) {
    if (da != 0) throw PrecisionLoss("induce_rotation: return time beyond the step cap");
    // a*alpha = 0 mod 1: every point returns after a steps.
    map.lengths = {epsilon};
    map.translations = {0.0};
    map.labels = {static_cast<double>(gaps->a)};
    finish(map);
    return map;
  }
  const u128 db = u128{0} - params.alpha_phase().times(*gaps->b).raw;
  const auto a = static_cast<double>(gaps->a);
  const auto b = static_cast<double>(*gaps->b);
  map.lengths = {raw_to_real(w - da), raw_to_real(da + db - w), raw_to_real(w - db)};
  map.translations = {raw_to_real(da), raw_to_real(da) - raw_to_real(db), -raw_to_real(db)};
  map.labels = {a, a + b, b};
  finish(map);
  return map;
}

void require_three_pieces(const Iet3& map) {
  if (map.pieces() != 3) {
    throw DegenerateMap("interval exchange has " + std::to_string(map.pieces()) +
                        " pieces");
  }
}

double iet_apply(const Iet3& map, double y) {
  return y + map.translations[map.piece_of(y)];
}

double iet_label(const Iet3& map, double y) { return map.labels[map.piece_of(y)]; }

double iet_apply_inverse(const Iet3& map, double y) {
  if (!(y >= map.lo && y <= map.hi)) throw OutOfDomain("iet: point outside the domain");
  std::size_t best = 0;
  double best_gap = INFINITY;
  double start = map.lo;
  for (std::size_t i = 0; i < map.pieces(); ++i) {
    const double img_lo = start + map.translations[i];
    const double img_hi = img_lo + map.lengths[i];
    if (y >= img_lo && y < img_hi) return y - map.translations[i];
    const double gap = std::max(img_lo - y, y - img_hi);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
    start += map.lengths[i];
  }
  // Right end of the domain, or a rounding gap between images.
  return y - map.translations[best];
}

LatticeIet lattice_iet(const AffineLattice& g) {
  const AffineLattice lin = g.linear();
  struct Piece {
    double lo, hi, wx, wy;
  };
  std::vector<Piece> pieces;
  for (double reach = 2.0;; reach *= 2.0) {
    if (reach > 1e9) throw DegenerateLattice("lattice_iet: return map not found");
    std::vector<Vec2> vecs;
    const Box box{0.0, reach, -1.0, 1.0, true};
    for_each_point_in_box(lin, box, [&](long double x, long double y) {
      vecs.push_back({static_cast<double>(x), static_cast<double>(y)});
    });
    std::sort(vecs.begin(), vecs.end());
    // Greedy cover of I by the windows [w_y - 1/2, w_y + 1/2].
    std::vector<std::pair<double, double>> open{{-0.5, 0.5}};
    pieces.clear();
    for (const auto& w : vecs) {
      const double wlo = w[1] - 0.5, whi = w[1] + 0.5;
      std::vector<std::pair<double, double>> rest;
      for (const auto& [lo, hi] : open) {
        const double a = std::max(lo, wlo), b = std::min(hi, whi);
        if (a < b) {
          pieces.push_back({a, b, w[0], w[1]});
          if (lo < a) rest.emplace_back(lo, a);
          if (b < hi) rest.emplace_back(b, hi);
        } else {
          rest.emplace_back(lo, hi);
        }
      }
      open = std::move(rest);
      if (open.empty()) break;
    }
    if (open.empty()) break;
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& p, const Piece& q) { return p.lo < q.lo; });
  if (pieces.size() != 3) {
    throw DegenerateLattice("lattice_iet: " + std::to_string(pieces.size()) +
                            " continuity intervals");
  }
  LatticeIet out;
  out.iet.lo = -0.5;
  out.iet.hi = 0.5;
  for (const auto& p : pieces) {
    out.iet.lengths.push_back(p.hi - p.lo);
    out.iet.translations.push_back(-p.wy);
    out.iet.labels.push_back(p.wx);
  }
  const auto first = tube_points(g, 1);
  out.x1 = first.x[0];
  out.y1 = first.y[0];
  out.y0 = -iet_apply_inverse(out.iet, -out.y1);
  return out;
}

std::optional<std::size_t> alternating_exit(std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += (i % 2 == 0) ? values[i] : -values[i];
    if (i % 2 == 1 && sum <= 0.0) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> birkhoff_exit(const Iet3& map, double y0,
                                         std::size_t cutoff,
                                         std::optional<double> head) {
  double z = -y0;
  double sum = 0.0;
  for (std::size_t i = 0; i < cutoff; ++i) {
    // Rounding can leave the orbit an ulp outside the domain.
    z = std::clamp(z, map.lo, map.hi);
    const double v = (i == 0 && head) ? *head : iet_label(map, z);
    sum += (i % 2 == 0) ? v : -v;
    if (i % 2 == 1 && sum <= 0.0) return i + 1;
    z = iet_apply(map, z);
  }
  return std::nullopt;
}

}  // namespace retro
