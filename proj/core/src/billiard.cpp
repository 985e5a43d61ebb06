#include "retro/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "retro/errors.hpp"
#include "retro/phase.hpp"
#include "retro/rotation.hpp"

namespace retro {
namespace {

// Unfolded ordinate u = whole + frac * 2^-128. Every double y_in and slope
// is exact in this form (down to 2^-75), so stepping by the slope never
// accumulates error.
struct Unfolded {
  std::int64_t whole;
  u128 frac;
};

// Ties closer than this to a barrier tip are reported as CornerHit.
const u128 kCornerTolerance = phase_of(1e-12).raw;

long double real_of(u128 f) {
  return std::ldexp(static_cast<long double>(static_cast<std::uint64_t>(f >> 64)), -64) +
         std::ldexp(static_cast<long double>(static_cast<std::uint64_t>(f)), -128);
}

bool odd(std::int64_t v) { return (v & 1) != 0; }

}  // namespace

InitialCondition InitialCondition::from_angle(double y_in, double phi) {
  if (!(phi > -0.5 && phi < 0.5)) {
    throw InvalidArgument("InitialCondition: phi must lie in (-1/2, 1/2)");
  }
  InitialCondition ic = from_slope(y_in, std::tan(std::numbers::pi * phi));
  ic.phi = phi;
  ic.cos_dir = std::cos(std::numbers::pi * phi);
  ic.sin_dir = std::sin(std::numbers::pi * phi);
  return ic;
}

InitialCondition InitialCondition::from_slope(double y_in, double slope) {
  if (!(y_in > 0.0 && y_in < 1.0)) {
    throw InvalidArgument("InitialCondition: y_in must lie in (0, 1)");
  }
  if (!std::isfinite(slope)) {
    throw InvalidArgument("InitialCondition: slope must be finite");
  }
  InitialCondition ic;
  ic.y_in = y_in;
  ic.slope = slope;
  ic.phi = std::atan(slope) / std::numbers::pi;
  ic.cos_dir = 1.0 / std::hypot(1.0, slope);
  ic.sin_dir = slope * ic.cos_dir;
  return ic;
}

RotationParams InitialCondition::rotation(double epsilon) const {
  return RotationParams::from_slope(y_in, slope, epsilon);
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::vertical:
      return "vertical";
    case EventKind::horizontal:
      return "horizontal";
    case EventKind::exit:
      return "exit";
  }
  return "unknown";
}

double fold(double t) {
  double u = std::fmod(t, 2.0);
  if (u < 0.0) u += 2.0;
  return u <= 1.0 ? u : 2.0 - u;
}

TrajectoryRecord trace(const InitialCondition& ic, double epsilon,
                       std::uint64_t max_events) {
  TraceOptions options;
  options.max_events = max_events;
  return trace(ic, epsilon, options);
}

TrajectoryRecord trace(const InitialCondition& ic, double epsilon,
                       const TraceOptions& options) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("trace: epsilon must lie in (0, 1)");
  }
  if (!(std::fabs(ic.slope) < 0x1p62)) {
    throw InvalidArgument("trace: |slope| must be below 2^62");
  }
  TrajectoryRecord rec;
  const double slope = ic.slope;
  const u128 half = phase_of(epsilon / 2.0).raw;
  const u128 y_raw = phase_of(ic.y_in).raw;
  // slope = slope_whole + slope_frac * 2^-128 with slope_frac in [0, 2^128).
  const auto slope_whole = static_cast<std::int64_t>(std::floor(slope));
  const u128 slope_frac = phase_of(slope).raw;
  // |slope| in raw units, meaningful only when |slope| < 1.
  const u128 abs_slope = slope > 0 ? slope_frac : u128{0} - slope_frac;
  const bool shallow = slope != 0 && std::fabs(slope) < 1.0;
  // Time per unit of horizontal travel.
  const long double pace = std::hypot(1.0L, static_cast<long double>(slope));
  const double speed_x = ic.cos_dir;
  const double speed_y = std::fabs(ic.sin_dir);

  auto dist = [](u128 f) { return std::min(f, u128{0} - f); };
  auto y_folded = [](const Unfolded& u) {
    const auto f = static_cast<double>(real_of(u.frac));
    return odd(u.whole) ? 1.0 - f : f;
  };

  std::int64_t x = 0;
  int dir = 1;
  // Folded vertical direction: +1 up, -1 down.
  int vdir = slope > 0 ? 1 : (slope < 0 ? -1 : 0);
  std::uint64_t crossings = 0;
  Unfolded prev{0, y_raw};
  if (slope == 0 && dist(y_raw) > half + kCornerTolerance) {
    return rec;  // horizontal ray between the barriers: never returns
  }

  auto emit = [&](EventKind kind, long double ex, double ey, long double s) {
    ++rec.event_count;
    if (!options.record_events) return;
    rec.events.push_back({kind, static_cast<double>(ex), ey,
                          static_cast<double>(s * pace), dir * speed_x,
                          vdir * speed_y});
  };

  for (std::uint64_t s = 1; s <= options.max_steps; ++s) {
    Unfolded cur{prev.whole + slope_whole, prev.frac + slope_frac};
    cur.whole += cur.frac < prev.frac ? 1 : 0;
    // Horizontal walls: integers passed by u on (s-1, s].
    if (slope != 0) {
      std::int64_t first = 0;
      std::int64_t count = 0;
      if (slope > 0) {
        first = prev.whole + 1;
        count = cur.whole - prev.whole;
      } else {
        first = prev.frac > 0 ? prev.whole : prev.whole - 1;
        const std::int64_t last = cur.frac > 0 ? cur.whole + 1 : cur.whole;
        count = first - last + 1;
      }
      if (count > 0) {
        const auto n = static_cast<std::uint64_t>(count);
        if (n > options.max_events - rec.event_count) {
          rec.event_count = options.max_events;
          return rec;
        }
        crossings += n;
        if (!options.record_events) {
          rec.event_count += n;
          if (n % 2 == 1) vdir = -vdir;
        } else {
          for (std::int64_t i = 0; i < count; ++i) {
            const std::int64_t j = slope > 0 ? first + i : first - i;
            const long double sj =
                (static_cast<long double>(j) - static_cast<long double>(ic.y_in)) /
                static_cast<long double>(slope);
            const long double ex = static_cast<long double>(x) +
                                   dir * (sj - static_cast<long double>(s - 1));
            vdir = -vdir;
            emit(EventKind::horizontal, ex, odd(j) ? 1.0 : 0.0, sj);
          }
        }
      }
    }
    prev = cur;
    x += dir;
    if (x == 0) {
      ExitRecord out;
      out.q = rec.vertical_x.size();
      out.t = static_cast<double>(static_cast<long double>(s) * pace);
      out.zeta_bar = static_cast<double>(static_cast<long double>(cur.whole) + real_of(cur.frac));
      out.h_count = crossings;
      out.y_out = y_folded(cur);
      out.reversed = (dir < 0) && (crossings % 2 == 1);
      // z = (zeta_bar + y_in) / 2 mod 1, formed exactly.
      u128 z = (cur.frac >> 1) + (y_raw >> 1) + (cur.frac & y_raw & 1);
      if (odd(cur.whole)) z += u128{1} << 127;
      out.z_dist = static_cast<double>(real_of(dist(z)));
      if (rec.event_count >= options.max_events) return rec;
      emit(EventKind::exit, 0.0L, out.y_out, static_cast<long double>(s));
      rec.exit = out;
      return rec;
    }
    const u128 d = dist(cur.frac);
    if ((d > half ? d - half : half - d) < kCornerTolerance) {
      throw CornerHit("trace: ray passes a barrier tip at x = " +
                      std::to_string(x));
    }
    if (d <= half) {
      if (rec.event_count >= options.max_events) return rec;
      dir = -dir;
      rec.vertical_x.push_back(x);
      emit(EventKind::vertical, static_cast<long double>(x), y_folded(cur),
           static_cast<long double>(s));
      continue;
    }
    // Free flight: with |slope| < 1 the ray stays inside the current gap,
    // clear of the corner tolerance, for k more steps.
    if (options.skip_free_flight && shallow) {
      const u128 room = slope > 0 ? (u128{0} - half) - cur.frac : cur.frac - half;
      if (room > kCornerTolerance + abs_slope) {
        u128 k = (room - kCornerTolerance) / abs_slope;
        if (dir < 0) k = std::min<u128>(k, static_cast<u128>(x - 1));
        k = std::min<u128>(k, options.max_steps - s);
        if (k > 0) {
          const auto steps = static_cast<std::uint64_t>(k);
          s += steps;
          x += dir * static_cast<std::int64_t>(steps);
          prev.frac = slope > 0 ? cur.frac + k * abs_slope : cur.frac - k * abs_slope;
        }
      }
    }
  }
  return rec;
}

ExitRecord exit_record_from_returns(const InitialCondition& ic,
                                    double epsilon,
                                    std::span<const std::uint64_t> n,
                                    std::size_t q) {
  const double t = flight_time(n, q, ic.slope);
  std::uint64_t rightward = 0;
  for (std::size_t j = 0; j < q; j += 2) rightward += n[j];

  const RotationParams params = ic.rotation(epsilon);
  const Phase y_phase = params.x0_phase();
  const Phase z_phase = y_phase + params.alpha_phase().times(rightward);
  const u128 f = z_phase.raw;
  const u128 y = y_phase.raw;

  // floor(2*frac(z) - y_in) in {-1, 0, 1}, decided exactly on raw values.
  int low_floor = 0;
  const bool twice_wraps = f >= (u128{1} << 127);
  const u128 twice = f << 1;  // 2f mod 2^128
  if (!twice_wraps) {
    low_floor = twice < y ? -1 : 0;
  } else {
    low_floor = twice < y ? 0 : 1;
  }

  const long double z_approx =
      static_cast<long double>(ic.y_in) +
      static_cast<long double>(ic.slope) * static_cast<long double>(rightward);
  if (!(std::fabs(z_approx) < 0x1p62L)) {
    throw PrecisionLoss("exit_record_from_returns: |z| too large");
  }
  const long double frac_approx = std::ldexp(static_cast<long double>(f), -128);
  const auto whole = static_cast<long long>(std::llround(z_approx - frac_approx));

  const long double low =
      2.0L * frac_approx - static_cast<long double>(ic.y_in);
  ExitRecord out;
  out.q = q;
  out.t = t;
  out.zeta_bar = static_cast<double>(2.0L * static_cast<long double>(whole) + low);
  const long long floor_zeta = 2 * whole + low_floor;
  out.h_count = static_cast<std::uint64_t>(floor_zeta < 0 ? -floor_zeta : floor_zeta);
  out.y_out = fold(static_cast<double>(low));
  out.reversed = (q % 2 == 1) && (out.h_count % 2 == 1);
  out.z_dist = circle_distance_real(z_phase);
  return out;
}

bool reversal_sufficient(const InitialCondition& ic, double epsilon,
                         std::uint64_t q) {
  return epsilon * static_cast<double>(q) < std::min(ic.y_in, 1.0 - ic.y_in);
}

}  // namespace retro
