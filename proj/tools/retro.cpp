// Command-line front end: one subcommand per experiment, each writing its
// data files plus a JSON manifest into --out.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "retro/billiard.hpp"
#include "retro/config.hpp"
#include "retro/errors.hpp"
#include "retro/experiments.hpp"
#include "retro/iet.hpp"
#include "retro/serialize.hpp"

#ifndef RETRO_VERSION
#define RETRO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace retro;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Context {
  RunConfig cfg;
  Manifest manifest;
  std::chrono::steady_clock::time_point start{std::chrono::steady_clock::now()};
};

std::ofstream open_out(Context& ctx, const std::string& name) {
  const fs::path path = fs::path(ctx.cfg.out) / name;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  ctx.manifest.artifacts.push_back(name);
  return f;
}

void write_manifest(Context& ctx) {
  auto& m = ctx.manifest;
  m.command = ctx.cfg.command;
  m.version = RETRO_VERSION;
  m.seed = ctx.cfg.seed;
  if (m.samples == 0) m.samples = ctx.cfg.samples;
  m.threads = ctx.cfg.effective_threads();
  m.deterministic = ctx.cfg.deterministic;
  m.config_hash = fnv1a_hex(ctx.cfg.canonical());
  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  std::istringstream lines(ctx.cfg.canonical());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    m.params.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  const fs::path path = fs::path(ctx.cfg.out) / (ctx.cfg.command + ".manifest.json");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << manifest_json(m) << '\n';
}

RunOptions run_options(const RunConfig& cfg, std::uint64_t seed_offset = 0) {
  RunOptions o;
  o.seed = cfg.seed + seed_offset;
  o.threads = cfg.effective_threads();
  return o;
}

int cmd_trace(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.y_in || (!cfg.phi && !cfg.slope)) {
    throw ConfigError("trace needs y_in and one of phi, slope");
  }
  const double eps = cfg.epsilons.front();
  const auto ic = cfg.slope ? InitialCondition::from_slope(*cfg.y_in, *cfg.slope)
                            : InitialCondition::from_angle(*cfg.y_in, *cfg.phi);
  const auto rec = trace(ic, eps);
  if (cfg.format == "json") {
    open_out(ctx, "trace.json") << trajectory_json(ic, eps, rec) << '\n';
  } else {
    auto f = open_out(ctx, "trace.csv");
    write_trajectory_csv(f, rec);
  }
  std::cout << trajectory_json(ic, eps, rec) << '\n';
  ctx.manifest.samples = 1;
  if (rec.cutoff()) {
    ctx.manifest.discards.cutoff = 1;
    write_manifest(ctx);
    std::cerr << "trace: cutoff before exit\n";
    return kExitBudget;
  }
  ctx.manifest.results = {{"Q", static_cast<double>(rec.exit->q)},
                          {"y_out", rec.exit->y_out},
                          {"reversed", rec.exit->reversed ? 1.0 : 0.0}};
  write_manifest(ctx);
  return kExitOk;
}

int cmd_exitstats(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto sweep = reversal_sweep(cfg.epsilons, cfg.delta, cfg.samples, run_options(cfg));
  {
    auto f = open_out(ctx, "exitstats.csv");
    write_sweep_csv(f, sweep);
  }
  ctx.manifest.discards = sweep.discards();
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    const auto tag = std::to_string(i);
    const auto pmf = estimate_Q_pmf(cfg.epsilons[i], cfg.samples, cfg.k_max,
                                    run_options(cfg, 1000 + i));
    auto f = open_out(ctx, "exitstats_pmf_" + tag + ".csv");
    write_pmf_csv(f, pmf);
    ctx.manifest.discards += pmf.discards;
    if (!cfg.t_grid.empty()) {
      const auto cdf = estimate_T_cdf(cfg.epsilons[i], cfg.samples, cfg.t_grid,
                                      run_options(cfg, 2000 + i));
      auto g = open_out(ctx, "exitstats_cdf_" + tag + ".csv");
      write_cdf_csv(g, cdf);
      ctx.manifest.discards += cdf.discards;
    }
    ctx.manifest.results.emplace_back("reversal_" + tag, sweep.rows[i].event.p);
  }
  write_manifest(ctx);
  return kExitOk;
}

int cmd_lattice_gk(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto pmf = limiting_G(cfg.samples, cfg.k_max, cfg.seed, cfg.effective_threads());
  {
    auto f = open_out(ctx, "lattice-gk.csv");
    write_pmf_csv(f, pmf);
  }
  ctx.manifest.discards = pmf.discards;
  ctx.manifest.params.emplace_back("y_max", format_double(kDefaultYMax));
  ctx.manifest.results.emplace_back("tail", pmf.tail_mass());
  if (!cfg.times.empty()) {
    const auto joint = joint_hit_cdf_lattice(cfg.samples, cfg.times, cfg.seed + 1,
                                             cfg.effective_threads());
    ctx.manifest.results.emplace_back("joint_lattice", joint.p);
  }
  write_manifest(ctx);
  return kExitOk;
}

int cmd_compare(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double eps = cfg.epsilons.front();
  constexpr std::uint64_t kCut = 20;
  const std::uint64_t k_max = std::max(cfg.k_max, kCut);
  const auto dyn = estimate_Q_pmf(eps, cfg.samples, k_max, run_options(cfg));
  const auto lat = limiting_G(cfg.samples, k_max, cfg.seed + 1, cfg.effective_threads());
  {
    auto f = open_out(ctx, "compare.csv");
    write_comparison_csv(f, dyn, lat, kCut);
  }
  const auto cmp = compare_pmfs(dyn, lat, kCut);
  ctx.manifest.discards = dyn.discards;
  ctx.manifest.discards += lat.discards;
  ctx.manifest.params.emplace_back("y_max", format_double(kDefaultYMax));
  ctx.manifest.results.emplace_back("tv_distance", cmp.tv);
  std::cout << "tv_distance " << format_double(cmp.tv) << '\n';
  write_manifest(ctx);
  return kExitOk;
}

int cmd_tail(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto tail = tail_diagnostic(cfg.s, cfg.epsilons.front(), cfg.samples, cfg.k_lo,
                                    cfg.k_hi, cfg.seed, cfg.effective_threads());
  {
    auto f = open_out(ctx, "tail.csv");
    write_tail_csv(f, tail);
  }
  ctx.manifest.results.emplace_back("slope", tail.slope);
  std::cout << "slope " << format_double(tail.slope) << '\n';
  write_manifest(ctx);
  return kExitOk;
}

int cmd_iet(Context& ctx) {
  const auto& cfg = ctx.cfg;
  double alpha = 0.0;
  if (cfg.alpha) {
    alpha = *cfg.alpha;
  } else if (cfg.slope) {
    alpha = RotationParams::from_slope(0.0, *cfg.slope, cfg.epsilons.front()).alpha();
  } else {
    throw ConfigError("iet needs alpha or slope");
  }
  const auto map = induce_rotation(alpha, cfg.epsilons.front());
  open_out(ctx, "iet.json") << iet_json(map) << '\n';
  std::cout << iet_json(map) << '\n';
  ctx.manifest.samples = 1;
  ctx.manifest.results.emplace_back("pieces", static_cast<double>(map.pieces()));
  write_manifest(ctx);
  return kExitOk;
}

int cmd_bench(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto cases = std::min<std::uint64_t>(cfg.samples, 10);
  const auto r = measure_hit_throughput(cfg.epsilons.front(), cases, cfg.hits, cfg.seed);
  {
    auto f = open_out(ctx, "bench.csv");
    f << "path,hits_per_second\n"
      << "naive," << format_double(r.naive_hits_per_second) << '\n'
      << "fast," << format_double(r.fast_hits_per_second) << '\n';
  }
  std::cout << "naive " << format_double(r.naive_hits_per_second) << " hits/s\n"
            << "fast " << format_double(r.fast_hits_per_second) << " hits/s\n"
            << "speedup " << format_double(r.speedup()) << '\n'
            << "identical " << (r.identical ? "yes" : "no") << '\n';
  ctx.manifest.samples = cases;
  ctx.manifest.results = {{"naive_hits_per_second", r.naive_hits_per_second},
                          {"fast_hits_per_second", r.fast_hits_per_second},
                          {"speedup", r.speedup()}};
  write_manifest(ctx);
  return r.identical ? kExitOk : kExitFailure;
}

// Per-command defaults, applied before the config file and the flags.
void command_defaults(RunConfig& cfg) {
  if (cfg.command == "bench") cfg.epsilons = {1e-5};
  if (cfg.command == "compare") cfg.epsilons = {1e-3};
  if (cfg.command == "tail") cfg.epsilons = {1e-3};
  if (cfg.command == "exitstats") cfg.epsilons = kDefaultEpsilonGrid;
}

const std::vector<std::pair<std::string, std::string>> kFlags{
    {"epsilon", "Obstacle size"},
    {"epsilon-grid", "Comma-separated obstacle sizes"},
    {"delta", "Position tolerance of the reversal event"},
    {"samples", "Monte Carlo sample count"},
    {"seed", "64-bit seed"},
    {"k-max", "Largest tabulated exit index"},
    {"t-grid", "Comma-separated flight-time grid"},
    {"out", "Output directory"},
    {"format", "csv or json"},
    {"threads", "Worker threads"},
    {"y-in", "Entry height"},
    {"phi", "Entry angle in units of pi"},
    {"slope", "Entry slope"},
    {"alpha", "Rotation number"},
    {"s", "Horizon of the tail diagnostic"},
    {"k-lo", "Smallest k of the tail diagnostic"},
    {"k-hi", "Largest k of the tail diagnostic"},
    {"times", "Comma-separated joint hit times"},
    {"hits", "Hits per benchmark case"},
};

int run(int argc, char** argv) {
  if (argc > 1 && argv[1][0] != '-' &&
      std::find(kSubcommands.begin(), kSubcommands.end(), argv[1]) == kSubcommands.end()) {
    throw ConfigError(std::string("unknown subcommand '") + argv[1] + "'");
  }
  CLI::App app{"Retroreflecting tube simulator"};
  app.set_version_flag("--version", RETRO_VERSION);
  app.require_subcommand(1);
  std::map<std::string, std::string> raw;
  std::string config_path;
  bool deterministic = false;
  for (const auto& name : kSubcommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const auto& [flag, help] : kFlags) sub->add_option("--" + flag, raw[flag], help);
    sub->add_flag("--deterministic", deterministic, "Single worker; bit-reproducible");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Context ctx;
  ctx.cfg.command = app.get_subcommands().front()->get_name();
  command_defaults(ctx.cfg);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot read " + config_path);
    const std::string command = ctx.cfg.command;
    ctx.cfg = parse_config(in, ctx.cfg);
    if (ctx.cfg.command != command) {
      throw ConfigError("config names command '" + ctx.cfg.command + "' but '" + command +
                        "' was invoked");
    }
  }
  for (const auto& [flag, value] : raw) {
    if (!value.empty()) apply_setting(ctx.cfg, flag, value);
  }
  if (deterministic) ctx.cfg.deterministic = true;
  validate(ctx.cfg);
  fs::create_directories(ctx.cfg.out);

  const auto& c = ctx.cfg.command;
  if (c == "trace") return cmd_trace(ctx);
  if (c == "exitstats") return cmd_exitstats(ctx);
  if (c == "lattice-gk") return cmd_lattice_gk(ctx);
  if (c == "compare") return cmd_compare(ctx);
  if (c == "tail") return cmd_tail(ctx);
  if (c == "iet") return cmd_iet(ctx);
  return cmd_bench(ctx);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
