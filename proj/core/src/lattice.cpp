#include "retro/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "retro/errors.hpp"

namespace retro {
namespace {

constexpr double kDetTolerance = 1e-12;
constexpr long double kDegenerateTolerance = 1e-12L;
// Above this many outer indices the box is enumerated on a reduced basis.
constexpr long double kOuterLimit = 1e7L;

double wrap_unit(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

struct Range {
  std::int64_t lo;
  std::int64_t hi;
  [[nodiscard]] long double size() const {
    return static_cast<long double>(hi) - static_cast<long double>(lo) + 1.0L;
  }
};

Range index_range(long double cmin, long double cmax, double shift) {
  const long double lo = std::floor(cmin - shift) - 1.0L;
  const long double hi = std::ceil(cmax - shift) + 1.0L;
  constexpr auto cap = static_cast<long double>(std::numeric_limits<std::int64_t>::max() / 4);
  if (!(std::fabs(lo) < cap && std::fabs(hi) < cap)) {
    throw Overflow("lattice enumeration: index range too large");
  }
  return {static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)};
}

}  // namespace

AffineLattice::AffineLattice(const Mat2& m, const Vec2& shift_coeffs)
    : m_(m), c_{wrap_unit(shift_coeffs[0]), wrap_unit(shift_coeffs[1])} {
  if (!(std::fabs(m.det() - 1.0) <= kDetTolerance)) {
    throw InvalidArgument("AffineLattice: det M must be 1");
  }
  if (!std::isfinite(shift_coeffs[0]) || !std::isfinite(shift_coeffs[1])) {
    throw InvalidArgument("AffineLattice: non-finite shift");
  }
}

AffineLattice AffineLattice::from_translation(const Mat2& m, const Vec2& v) {
  const double det = m.det();
  // c = v M^{-1}
  const Vec2 c{(v[0] * m.d - v[1] * m.c) / det, (-v[0] * m.b + v[1] * m.a) / det};
  return {m, c};
}

Vec2 AffineLattice::translation() const {
  return {c_[0] * m_.a + c_[1] * m_.c, c_[0] * m_.b + c_[1] * m_.d};
}

Vec2 AffineLattice::point(std::int64_t k, std::int64_t l) const {
  const long double s = static_cast<long double>(k) + c_[0];
  const long double t = static_cast<long double>(l) + c_[1];
  return {static_cast<double>(s * m_.a + t * m_.c),
          static_cast<double>(s * m_.b + t * m_.d)};
}

AffineLattice AffineLattice::reduced() const {
  // Rows u, v and the integer matrix U with (u; v) = U M.
  long double u0 = m_.a, u1 = m_.b, v0 = m_.c, v1 = m_.d;
  long double U[2][2] = {{1, 0}, {0, 1}};
  auto norm = [](long double x, long double y) { return x * x + y * y; };
  for (int iter = 0; iter < 10'000; ++iter) {
    if (norm(u0, u1) > norm(v0, v1)) {
      // (u, v) <- (v, -u) keeps det U = 1.
      std::swap(u0, v0);
      std::swap(u1, v1);
      v0 = -v0;
      v1 = -v1;
      std::swap(U[0][0], U[1][0]);
      std::swap(U[0][1], U[1][1]);
      U[1][0] = -U[1][0];
      U[1][1] = -U[1][1];
    }
    const long double mu = std::round((u0 * v0 + u1 * v1) / norm(u0, u1));
    if (mu == 0) break;
    v0 -= mu * u0;
    v1 -= mu * u1;
    U[1][0] -= mu * U[0][0];
    U[1][1] -= mu * U[0][1];
  }
  // c' = c U^{-1}, U^{-1} = [[U11, -U01], [-U10, U00]].
  const long double c0 = c_[0], c1 = c_[1];
  long double n0 = c0 * U[1][1] - c1 * U[1][0];
  long double n1 = -c0 * U[0][1] + c1 * U[0][0];
  n0 -= std::floor(n0);
  n1 -= std::floor(n1);
  // Re-normalise the determinant lost to rounding.
  const long double det = u0 * v1 - u1 * v0;
  const long double scale = 1.0L / std::sqrt(std::fabs(det));
  const Mat2 m{static_cast<double>(u0 * scale), static_cast<double>(u1 * scale),
               static_cast<double>(v0 * scale), static_cast<double>(v1 * scale)};
  return {m, Vec2{static_cast<double>(n0), static_cast<double>(n1)}};
}

Box tube_rect(double horizon) {
  return Box{0.0, horizon, -0.5, 0.5, true};
}

namespace {

void enumerate_box(const AffineLattice& g, const Box& box,
                   const std::function<void(long double, long double)>& fn,
                   bool allow_reduce) {
  if (!(box.x_hi >= box.x_lo && box.y_hi >= box.y_lo)) return;
  const Mat2& m = g.matrix();
  const Vec2& c = g.shift_coeffs();
  const long double det = static_cast<long double>(m.a) * m.d -
                          static_cast<long double>(m.b) * m.c;
  // Lattice coordinates of the corners: (s, t) = p M^{-1}.
  long double smin = INFINITY, smax = -INFINITY, tmin = INFINITY, tmax = -INFINITY;
  for (const double px : {box.x_lo, box.x_hi}) {
    for (const double py : {box.y_lo, box.y_hi}) {
      const long double s = (px * static_cast<long double>(m.d) - py * static_cast<long double>(m.c)) / det;
      const long double t = (-px * static_cast<long double>(m.b) + py * static_cast<long double>(m.a)) / det;
      smin = std::min(smin, s);
      smax = std::max(smax, s);
      tmin = std::min(tmin, t);
      tmax = std::max(tmax, t);
    }
  }
  const Range kr = index_range(smin, smax, c[0]);
  const Range lr = index_range(tmin, tmax, c[1]);
  const bool outer_is_k = kr.size() <= lr.size();
  if (allow_reduce && (outer_is_k ? kr : lr).size() > kOuterLimit) {
    enumerate_box(g.reduced(), box, fn, false);
    return;
  }
  // Outer row r_o, inner row r_i: p = (o + c_o) r_o + (i + c_i) r_i.
  const long double ro_x = outer_is_k ? m.a : m.c;
  const long double ro_y = outer_is_k ? m.b : m.d;
  const long double ri_x = outer_is_k ? m.c : m.a;
  const long double ri_y = outer_is_k ? m.d : m.b;
  const double co = outer_is_k ? c[0] : c[1];
  const double ci = outer_is_k ? c[1] : c[0];
  const Range outer = outer_is_k ? kr : lr;
  const Range inner_all = outer_is_k ? lr : kr;

  for (std::int64_t o = outer.lo; o <= outer.hi; ++o) {
    const long double s = static_cast<long double>(o) + co;
    const long double ax = s * ro_x;
    const long double ay = s * ro_y;
    long double lo = -INFINITY, hi = INFINITY;
    bool empty = false;
    auto restrict = [&](long double base, long double dir, double blo, double bhi) {
      if (dir != 0) {
        long double t1 = (blo - base) / dir;
        long double t2 = (bhi - base) / dir;
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
      } else if (base < blo - 1e-9L || base > bhi + 1e-9L) {
        empty = true;
      }
    };
    restrict(ax, ri_x, box.x_lo, box.x_hi);
    restrict(ay, ri_y, box.y_lo, box.y_hi);
    if (empty || lo > hi + 1.0L) continue;
    std::int64_t ilo = inner_all.lo, ihi = inner_all.hi;
    if (std::isfinite(lo)) ilo = std::max(ilo, static_cast<std::int64_t>(std::floor(lo - ci)) - 1);
    if (std::isfinite(hi)) ihi = std::min(ihi, static_cast<std::int64_t>(std::ceil(hi - ci)) + 1);
    for (std::int64_t i = ilo; i <= ihi; ++i) {
      // Same formula for either loop order, so membership is order-free.
      const long double sk = outer_is_k ? s : static_cast<long double>(i) + c[0];
      const long double tl = outer_is_k ? static_cast<long double>(i) + c[1] : s;
      const long double px = sk * m.a + tl * m.c;
      const long double py = sk * m.b + tl * m.d;
      if (box.contains(px, py)) fn(px, py);
    }
  }
}

}  // namespace

void for_each_point_in_box(const AffineLattice& g, const Box& box,
                           const std::function<void(long double, long double)>& fn) {
  enumerate_box(g, box, fn, true);
}

std::uint64_t count_in_box(const AffineLattice& g, const Box& box) {
  std::uint64_t n = 0;
  for_each_point_in_box(g, box, [&](long double, long double) { ++n; });
  return n;
}

std::uint64_t count_in_rect(const AffineLattice& g, double horizon) {
  if (!(horizon >= 0.0)) throw InvalidArgument("count_in_rect: T must be >= 0");
  if (horizon == 0.0) return 0;
  return count_in_box(g, tube_rect(horizon));
}

AffineLattice haar_sample(std::mt19937_64& rng, double y_max) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double y_min = std::sqrt(3.0) / 2.0;
  double x = 0, y = 0;
  do {
    // Inverse CDF of the density 1/y^2 on [y_min, y_max].
    const double w = unit(rng);
    y = 1.0 / (1.0 / y_min - w * (1.0 / y_min - 1.0 / y_max));
    x = unit(rng) - 0.5;
  } while (x * x + y * y < 1.0);
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  const double r = 1.0 / std::sqrt(y);
  // omega1 = r e^{i theta}, omega2 = tau * omega1.
  const double w1x = r * std::cos(theta), w1y = r * std::sin(theta);
  const double w2x = x * w1x - y * w1y, w2y = x * w1y + y * w1x;
  Mat2 m{w1x, w1y, w2x, w2y};
  // Remove the rounding residue of the determinant.
  const double s = 1.0 / std::sqrt(m.det());
  m = {m.a * s, m.b * s, m.c * s, m.d * s};
  const double c0 = unit(rng);
  const double c1 = unit(rng);
  return {m, Vec2{c0, c1}};
}

AffineLattice geodesic_push(double x, double alpha, double t) {
  if (!(std::fabs(t) <= 60.0)) throw Overflow("geodesic_push: |t| must be <= 60");
  const double up = std::exp(t / 2.0);
  const double down = std::exp(-t / 2.0);
  Mat2 m{down, alpha * up, 0.0, up};
  // exp(t/2) * exp(-t/2) can miss 1 by an ulp.
  m.a = 1.0 / up;
  return {m, Vec2{0.0, x}};
}

namespace {

// Streams tube points in increasing abscissa, window by window. fn returns
// false to stop.
void stream_tube_points(const AffineLattice& g, double x_budget,
                        const std::function<bool(double, double)>& fn) {
  double lo = 0.0;
  double hi = 4.0;
  double last_x = -1.0;
  std::vector<std::pair<long double, long double>> pts;
  while (true) {
    const double top = std::min(hi, x_budget);
    pts.clear();
    const Box box{lo, top, -0.5 - 1e-12, 0.5 + 1e-12, true};
    for_each_point_in_box(g, box, [&](long double px, long double py) {
      if (std::fabs(std::fabs(py) - 0.5L) < kDegenerateTolerance) {
        throw DegenerateLattice("tube point on the boundary");
      }
      if (std::fabs(py) <= 0.5L) pts.emplace_back(px, py);
    });
    std::sort(pts.begin(), pts.end());
    for (const auto& [px, py] : pts) {
      if (last_x >= 0.0 && px - last_x < kDegenerateTolerance) {
        throw DegenerateLattice("tube points share an abscissa");
      }
      last_x = static_cast<double>(px);
      if (!fn(static_cast<double>(px), static_cast<double>(py))) return;
    }
    if (top >= x_budget) {
      throw BudgetExhausted("tube points: x budget exhausted");
    }
    lo = top;
    hi = 2.0 * top;
  }
}

}  // namespace

LimitProcessSample tube_points(const AffineLattice& g, std::size_t count,
                               double x_budget) {
  if (count == 0) throw InvalidArgument("tube_points: count must be >= 1");
  LimitProcessSample out;
  double xi = 0.0;
  stream_tube_points(g, x_budget, [&](double px, double py) {
    const double prev = out.x.empty() ? 0.0 : out.x.back();
    const double eta = px - prev;
    xi += (out.x.size() % 2 == 0) ? eta : -eta;
    out.x.push_back(px);
    out.y.push_back(py);
    out.eta.push_back(eta);
    out.xi.push_back(xi);
    if (!out.q_limit && xi <= 0.0) out.q_limit = out.x.size() - 1;
    return out.x.size() < count;
  });
  return out;
}

std::optional<std::uint64_t> limit_exit_index(const AffineLattice& g,
                                              std::uint64_t k_max) {
  std::optional<std::uint64_t> q;
  std::uint64_t j = 0;
  double prev = 0.0;
  double xi = 0.0;
  stream_tube_points(g, 1e12,
                     [&](double px, double) {
                       const double eta = px - prev;
                       prev = px;
                       xi += (j % 2 == 0) ? eta : -eta;
                       ++j;
                       if (xi <= 0.0) {
                         q = j - 1;
                         return false;
                       }
                       return j <= k_max;
                     });
  return q;
}

}  // namespace retro
