#pragma once
/**
 * @file serialize.hpp
 * @brief Locale-independent CSV and JSON writers.
 *
 * Floats are written with 17 significant digits and '.' as the decimal
 * separator, so every value round-trips exactly.
 */

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "retro/billiard.hpp"
#include "retro/experiments.hpp"
#include "retro/iet.hpp"
#include "retro/rotation.hpp"

namespace retro {

std::string format_double(double v);

void write_hits_csv(std::ostream& out, const HitSequence& hits);
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
void write_pmf_csv(std::ostream& out, const Pmf& pmf);
/// Columns k, p_dyn, ci bounds, p_lat, ci bounds; the last row is
/// "tv_distance,<value>" over k <= k_cut with the mass beyond lumped.
void write_comparison_csv(std::ostream& out, const Pmf& dyn, const Pmf& lat,
                          std::uint64_t k_cut);
void write_cdf_csv(std::ostream& out, const TCdf& cdf);
void write_tail_csv(std::ostream& out, const TailDiagnostic& tail);
void write_sweep_csv(std::ostream& out, const SweepReport& report);

std::string exit_json(const ExitRecord& record);
std::string trajectory_json(const InitialCondition& ic, double epsilon,
                            const TrajectoryRecord& record);
std::string iet_json(const Iet3& map);

/// Run metadata written next to every artifact.
struct Manifest {
  std::string command;
  std::string version;
  std::uint64_t seed{0};
  std::uint64_t samples{0};
  unsigned threads{1};
  bool deterministic{true};
  std::string config_hash;
  double wall_seconds{0.0};
  Discards discards;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::pair<std::string, double>> results;
  std::vector<std::string> artifacts;
};

std::string manifest_json(const Manifest& manifest);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace retro
