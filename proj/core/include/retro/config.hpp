#pragma once
/**
 * @file config.hpp
 * @brief Run configuration and its key = value file grammar.
 *
 * One setting per line, `key = value`. Blank lines and lines starting
 * with '#' are ignored; a '#' after a value starts a comment. Keys accept
 * '-' or '_' interchangeably. Lists are comma separated. Recognised keys:
 *
 *   command, epsilon, epsilon_grid, delta, samples, seed, k_max, t_grid,
 *   out, format, threads, deterministic, y_in, phi, slope, alpha, s, k_lo,
 *   k_hi, times, measure, hits
 *
 * Unknown keys and malformed or out-of-range values raise ConfigError
 * naming the line and key.
 */

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace retro {

inline const std::vector<std::string> kSubcommands{
    "trace", "exitstats", "lattice-gk", "compare", "tail", "iet", "bench"};

struct RunConfig {
  std::string command;
  std::vector<double> epsilons{0.01};
  double delta{0.1};
  std::uint64_t samples{100000};
  std::uint64_t seed{1};
  std::uint64_t k_max{1000};
  std::vector<double> t_grid;
  std::string out{"."};
  std::string format{"csv"};
  unsigned threads{1};
  bool deterministic{false};
  std::optional<double> y_in;
  std::optional<double> phi;
  std::optional<double> slope;
  std::optional<double> alpha;
  double s{1.0};
  std::uint64_t k_lo{8};
  std::uint64_t k_hi{64};
  std::vector<double> times;
  std::string measure{"uniform-omega"};
  std::uint64_t hits{1000};

  /// Every field as sorted key = value lines; input of the config hash.
  [[nodiscard]] std::string canonical() const;
  /// Worker count after applying `deterministic`.
  [[nodiscard]] unsigned effective_threads() const { return deterministic ? 1u : threads; }
};

/// Sets one key; `line` (0 for command-line flags) is used in diagnostics.
void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value, std::size_t line = 0);

RunConfig parse_config(std::istream& in, RunConfig base = {});

/// Range checks shared by the file and the flags.
void validate(const RunConfig& config);

std::vector<double> parse_list(const std::string& text);

}  // namespace retro
