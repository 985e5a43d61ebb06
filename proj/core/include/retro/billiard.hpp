#pragma once
/**
 * @file billiard.hpp
 * @brief Event-driven simulation of the barrier tube and exit bookkeeping.
 *
 * The tube is [0, inf) x [0, 1] with zero-thickness barriers
 * {n} x [0, eps/2] and {n} x [1 - eps/2, 1] for n >= 1; x = 0 is open.
 * trace() follows the ray in the vertically unfolded plane, where it is the
 * straight line u(s) = y_in + slope * s in the total horizontal distance s.
 * It shares no arithmetic with rotation_core and serves as its oracle.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace retro {

class RotationParams;

struct InitialCondition {
  double y_in{0.5};
  double phi{0.0};  ///< direction angle in units of pi, in (-1/2, 1/2)
  double slope{0.0};  ///< tan(pi*phi); authoritative for all dynamics
  double cos_dir{1.0};
  double sin_dir{0.0};

  static InitialCondition from_angle(double y_in, double phi);
  /// Keeps `slope` bit-exact; phi is derived.
  static InitialCondition from_slope(double y_in, double slope);

  [[nodiscard]] RotationParams rotation(double epsilon) const;
};

struct ExitRecord {
  std::uint64_t q{0};
  double t{0.0};
  double y_out{0.0};
  double zeta_bar{0.0};
  std::uint64_t h_count{0};
  bool reversed{false};
  double z_dist{0.0};
};

enum class EventKind { vertical, horizontal, exit };

const char* to_string(EventKind kind);

struct TraceEvent {
  EventKind kind{EventKind::vertical};
  double x{0.0};
  double y{0.0};  ///< folded ordinate in [0, 1]
  double t{0.0};
  double vx{0.0};  ///< velocity after the event
  double vy{0.0};
};

struct TraceOptions {
  std::uint64_t max_events{10'000'000};
  /// Unit horizontal steps before a Cutoff; bounds trajectories with no
  /// events at all (phi = 0).
  std::uint64_t max_steps{1'000'000'000};
  bool record_events{true};
  /// Jump over runs of steps on which |slope| < 1 keeps the ray inside a
  /// gap; the result is identical with or without it.
  bool skip_free_flight{true};
};

struct TrajectoryRecord {
  std::vector<TraceEvent> events;
  std::vector<std::int64_t> vertical_x;  ///< barrier abscissae, in order
  std::optional<ExitRecord> exit;  ///< empty on Cutoff
  std::uint64_t event_count{0};

  [[nodiscard]] bool cutoff() const { return !exit.has_value(); }
};

/// Throws CornerHit when the ray passes within 1e-12 of a barrier tip.
TrajectoryRecord trace(const InitialCondition& ic, double epsilon,
                       const TraceOptions& options);
TrajectoryRecord trace(const InitialCondition& ic, double epsilon,
                       std::uint64_t max_events = 10'000'000);

/// (t mod 2) folded by the tent map onto [0, 1].
double fold(double t);

/// Exit data from the rotation picture. q must be odd and n.size() >= q.
/// frac(z) and the parity of floor(zeta_bar) are exact; h_count counts
/// horizontal-wall crossings, |floor(zeta_bar)|.
ExitRecord exit_record_from_returns(const InitialCondition& ic,
                                    double epsilon,
                                    std::span<const std::uint64_t> n,
                                    std::size_t q);

/// eps*Q < min(y_in, 1 - y_in); implies reversal.
bool reversal_sufficient(const InitialCondition& ic, double epsilon,
                         std::uint64_t q);

}  // namespace retro
