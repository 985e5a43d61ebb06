#include "retro/phase.hpp"

#include <cmath>
#include <cstdlib>

#include "retro/errors.hpp"

namespace retro {
namespace {

struct U256 {
  u128 hi{0};
  u128 lo{0};
};

constexpr bool operator<(const U256& a, const U256& b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
constexpr bool operator==(const U256& a, const U256& b) {
  return a.hi == b.hi && a.lo == b.lo;
}

U256 mul_wide(u128 a, u128 b) {
  const u128 mask = (u128{1} << 64) - 1;
  const u128 a0 = a & mask, a1 = a >> 64;
  const u128 b0 = b & mask, b1 = b >> 64;
  const u128 p00 = a0 * b0;
  const u128 p01 = a0 * b1;
  const u128 p10 = a1 * b0;
  const u128 p11 = a1 * b1;
  const u128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
  U256 r;
  r.lo = (p00 & mask) | (mid << 64);
  r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
  return r;
}

U256 add(U256 a, u128 b) {
  U256 r{a.hi, a.lo + b};
  if (r.lo < a.lo) ++r.hi;
  return r;
}

long double to_long_double(const U256& v) {
  return std::ldexp(static_cast<long double>(v.hi), 128) +
         static_cast<long double>(v.lo);
}

// ceil(n / d) when it is below kStepCap.
std::optional<u128> ceil_div(const U256& n, u128 d) {
  const long double est = to_long_double(n) / static_cast<long double>(d);
  if (!(est < std::ldexp(1.0L, 63))) return std::nullopt;
  u128 q = static_cast<u128>(est);
  // The estimate is off by at most a few units; settle q = floor(n / d).
  while (q > 0 && n < mul_wide(d, q)) --q;
  while (!(n < mul_wide(d, q + 1))) ++q;
  if (!(mul_wide(d, q) == n)) ++q;
  if (q >= kStepCap) return std::nullopt;
  return q;
}

// Smallest x >= 0 with (a*x mod m) in [l, r]; m == 0 encodes 2^128.
// Requires l <= r < m and a < m.
std::optional<u128> solve(u128 a, u128 m, u128 l, u128 r) {
  if (l == 0) return u128{0};
  if (a == 0) return std::nullopt;
  const u128 m_minus_a = m - a;
  if (a > m_minus_a) {
    // a*x in [l, r]  <=>  (m - a)*x in [m - r, m - l]
    return solve(m_minus_a, m, m - r, m - l);
  }
  const u128 k = l / a + (l % a != 0 ? 1 : 0);
  if (k <= r / a) return k;
  // No multiple of a lies in [l, r]. Look for y with a*x - m*y in [l, r],
  // i.e. (-m*y) mod a in [l mod a, r mod a].
  const u128 m_mod_a = (m == 0) ? (u128{0} - a) % a : m % a;
  if (m_mod_a == 0) return std::nullopt;
  const auto y = solve(a - m_mod_a, a, l % a, r % a);
  if (!y) return std::nullopt;
  const U256 numerator = (m == 0) ? U256{*y, l} : add(mul_wide(m, *y), l);
  return ceil_div(numerator, a);
}

}  // namespace

Phase phase_of(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("phase_of: non-finite value");
  if (v == 0.0) return {};
  int exponent = 0;
  const double mantissa = std::frexp(v, &exponent);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  const auto magnitude = static_cast<u128>(std::llabs(scaled));
  const int shift = exponent - 53 + 128;
  u128 raw = 0;
  if (shift >= 128) {
    raw = 0;
  } else if (shift >= 0) {
    raw = magnitude << shift;
  } else if (shift > -64) {
    raw = magnitude >> (-shift);
  }
  if (scaled < 0) raw = u128{0} - raw;
  return {raw};
}

double to_double(Phase p) {
  double d = std::ldexp(static_cast<double>(p.raw), -128);
  // Rounding can push values just below 1 up to 1.0.
  if (d >= 1.0) d = std::nextafter(1.0, 0.0);
  return d;
}

u128 circle_distance(Phase p) {
  const u128 neg = u128{0} - p.raw;
  return p.raw < neg ? p.raw : neg;
}

double circle_distance_real(Phase p) {
  return std::ldexp(static_cast<double>(circle_distance(p)), -128);
}

ArcWindow ArcWindow::of_length(double length) {
  if (!(length > 0.0 && length < 1.0)) {
    throw InvalidArgument("ArcWindow: length must lie in (0, 1)");
  }
  // length/2 < 1/2, so the scaled value fits below 2^127.
  const double half = std::ldexp(length / 2.0, 128);
  return ArcWindow(static_cast<u128>(half));
}

std::optional<std::uint64_t> first_in_arc(Phase start, Phase step, u128 lo,
                                          u128 hi) {
  if (hi < lo) throw InvalidArgument("first_in_arc: empty arc");
  const u128 span = hi - lo;
  const u128 shifted = start.raw - lo;
  if (shifted <= span) return 0;
  // Need j with (shifted + j*step) mod 2^128 in [0, span]: equivalently
  // j*step mod 2^128 in [2^128 - shifted, 2^128 - shifted + span].
  const u128 l = u128{0} - shifted;
  const u128 r = l + span;
  const auto j = solve(step.raw, 0, l, r);
  if (!j || *j >= kStepCap) return std::nullopt;
  return static_cast<std::uint64_t>(*j);
}

std::optional<std::uint64_t> first_in_window(Phase start, Phase step,
                                             const ArcWindow& window) {
  return first_in_arc(start + Phase{window.half()}, step, 0, window.width());
}

}  // namespace retro
