#include "retro/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "retro/errors.hpp"
#include "retro/serialize.hpp"

namespace retro {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& key, std::size_t line) {
  return line == 0 ? "option '" + key + "'" : "line " + std::to_string(line) + ", key '" + key + "'";
}

double to_real(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not a number: '" + t + "'");
  }
  return v;
}

std::uint64_t to_count(const std::string& text) {
  const double v = to_real(text);
  // Accepts 1e6-style counts; rejects fractions and negatives.
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
    throw ConfigError("not a nonnegative integer: '" + trim(text) + "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::uint64_t to_seed(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not a 64-bit seed: '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: '" + t + "'");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_real(item));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value,
                   std::size_t line) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(value);
  try {
    if (key == "command") {
      if (std::find(kSubcommands.begin(), kSubcommands.end(), v) == kSubcommands.end()) {
        throw ConfigError("unknown subcommand '" + v + "'");
      }
      c.command = v;
    } else if (key == "epsilon") {
      c.epsilons = {to_real(v)};
    } else if (key == "epsilon_grid") {
      c.epsilons = parse_list(v);
    } else if (key == "delta") {
      c.delta = to_real(v);
    } else if (key == "samples") {
      c.samples = to_count(v);
    } else if (key == "seed") {
      c.seed = to_seed(v);
    } else if (key == "k_max") {
      c.k_max = to_count(v);
    } else if (key == "t_grid") {
      c.t_grid = parse_list(v);
    } else if (key == "out") {
      c.out = v;
    } else if (key == "format") {
      c.format = v;
    } else if (key == "threads") {
      c.threads = static_cast<unsigned>(to_count(v));
    } else if (key == "deterministic") {
      c.deterministic = to_bool(v);
    } else if (key == "y_in") {
      c.y_in = to_real(v);
    } else if (key == "phi") {
      c.phi = to_real(v);
    } else if (key == "slope") {
      c.slope = to_real(v);
    } else if (key == "alpha") {
      c.alpha = to_real(v);
    } else if (key == "s") {
      c.s = to_real(v);
    } else if (key == "k_lo") {
      c.k_lo = to_count(v);
    } else if (key == "k_hi") {
      c.k_hi = to_count(v);
    } else if (key == "times") {
      c.times = parse_list(v);
    } else if (key == "measure") {
      c.measure = v;
    } else if (key == "hits") {
      c.hits = to_count(v);
    } else {
      throw ConfigError("unknown key");
    }
  } catch (const ConfigError& e) {
    throw ConfigError(where(trim(raw_key), line) + ": " + e.what());
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.erase(hash);
    if (trim(text).empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    apply_setting(base, text.substr(0, eq), text.substr(eq + 1), line);
  }
  if (in.bad()) throw IoError("failed reading the configuration");
  return base;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("out of range: " + what); };
  for (double e : c.epsilons) {
    if (!(e > 0.0 && e < 1.0)) fail("epsilon must lie in (0, 1)");
  }
  if (!(c.delta > 0.0 && c.delta <= 1.0)) fail("delta must lie in (0, 1]");
  if (c.samples == 0) fail("samples must be >= 1");
  if (c.k_max == 0) fail("k_max must be >= 1");
  if (c.k_lo == 0 || c.k_hi < c.k_lo) fail("need 1 <= k_lo <= k_hi");
  if (!(c.s > 0.0)) fail("s must be > 0");
  if (c.format != "csv" && c.format != "json") fail("format must be csv or json");
  if (c.measure != "uniform-omega") fail("measure must be uniform-omega");
  if (!std::is_sorted(c.t_grid.begin(), c.t_grid.end())) fail("t_grid must be nondecreasing");
  if (c.times.size() > 3) fail("at most three times");
  if (c.y_in && !(*c.y_in > 0.0 && *c.y_in < 1.0)) fail("y_in must lie in (0, 1)");
  if (c.phi && !(*c.phi > -0.5 && *c.phi < 0.5)) fail("phi must lie in (-1/2, 1/2)");
  if (c.phi && c.slope) fail("give phi or slope, not both");
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"command", command},
      {"epsilon_grid", join(epsilons)},
      {"delta", format_double(delta)},
      {"samples", std::to_string(samples)},
      {"seed", std::to_string(seed)},
      {"k_max", std::to_string(k_max)},
      {"t_grid", join(t_grid)},
      {"format", format},
      {"s", format_double(s)},
      {"k_lo", std::to_string(k_lo)},
      {"k_hi", std::to_string(k_hi)},
      {"times", join(times)},
      {"measure", measure},
      {"hits", std::to_string(hits)},
  };
  if (y_in) kv["y_in"] = format_double(*y_in);
  if (phi) kv["phi"] = format_double(*phi);
  if (slope) kv["slope"] = format_double(*slope);
  if (alpha) kv["alpha"] = format_double(*alpha);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace retro
