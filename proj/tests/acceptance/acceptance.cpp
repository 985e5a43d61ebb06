// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion; the
// arguments select criteria by number (all when none are given).
// `--manifest <path>` writes the measured values as JSON.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "retro/billiard.hpp"
#include "retro/errors.hpp"
#include "retro/experiments.hpp"
#include "retro/iet.hpp"
#include "retro/lattice.hpp"
#include "retro/parallel.hpp"
#include "retro/rotation.hpp"
#include "retro/stats.hpp"

using namespace retro;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

nlohmann::ordered_json g_manifest = nlohmann::ordered_json::object();

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunOptions opts(std::uint64_t seed) {
  RunOptions o;
  o.seed = seed;
  o.threads = 0;  // results do not depend on the worker count
  return o;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::exp(std::log(lo) + unit(rng) * std::log(hi / lo));
}

// Unfolded height fold(y_in + slope * m), with frac taken exactly from phases.
double predicted_height(const InitialCondition& ic, const RotationParams& p, std::uint64_t m) {
  const Phase f = p.x0_phase() + p.alpha_phase().times(m);
  const long double frac = std::ldexp(static_cast<long double>(f.raw), -128);
  const long double u = static_cast<long double>(ic.y_in) +
                        static_cast<long double>(ic.slope) * static_cast<long double>(m);
  const long long whole = std::llround(u - frac);
  const long double y = (whole % 2 == 0) ? frac : 1.0L - frac;
  return static_cast<double>(y);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Billiard traces against the rotation reduction.
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t compared = 0, mismatches = 0, corner = 0, cutoff = 0;
  double worst = 0.0;
  const int pairs = 10000;
  for (int i = 0; i < pairs; ++i) {
    double y = unit(rng), phi = unit(rng) - 0.5;
    while (y == 0.0 || phi == 0.0 || phi == -0.5) {
      y = unit(rng);
      phi = unit(rng) - 0.5;
    }
    const auto ic = InitialCondition::from_angle(y, phi);
    for (const double eps : {0.3, 0.1, 0.03}) {
      TraceOptions o;
      o.max_events = 200'000;
      TrajectoryRecord rec;
      try {
        rec = trace(ic, eps, o);
        if (rec.cutoff()) {
          o.record_events = false;
          o.max_events = 10'000'000;
          rec = trace(ic, eps, o);
        }
      } catch (const CornerHit&) {
        ++corner;
        continue;
      }
      if (rec.cutoff()) {
        ++cutoff;
        continue;
      }
      const auto params = ic.rotation(eps);
      HitStream stream(params, HitMode::fast);
      HitSequence seq;
      while (seq.empty() || seq.xi.back() > 0) seq.push(*stream.next());
      const auto q = exit_index(seq.n);
      bool ok = q && *q == rec.exit->q;
      ok = ok && std::vector<std::int64_t>(seq.xi.begin(), seq.xi.begin() + *q) == rec.vertical_x;
      if (ok) {
        const auto er = exit_record_from_returns(ic, eps, seq.n, *q);
        const double dy = std::fabs(er.y_out - rec.exit->y_out);
        worst = std::max(worst, dy);
        ok = dy <= 1e-9 && er.reversed == rec.exit->reversed;
        std::size_t k = 0;
        for (const auto& ev : rec.events) {
          if (ev.kind != EventKind::vertical) continue;
          const double d = std::fabs(ev.y - predicted_height(ic, params, seq.m[k++]));
          worst = std::max(worst, d);
          ok = ok && d <= 1e-9;
        }
      }
      ++compared;
      mismatches += !ok;
    }
  }
  const double secs = seconds_since(t0);
  g_manifest["c1"] = {{"compared", compared}, {"mismatches", mismatches},
                      {"corner_hit", corner}, {"cutoff", cutoff}, {"max_position_error", worst},
                      {"seconds", secs}};
  return {mismatches == 0 && compared > 0 && secs <= 120.0,
          fmt("%llu trajectories, %llu mismatches, max position error %.3g, discarded %llu corner / %llu cutoff, %.0f s (limit 120)",
              (unsigned long long)compared, (unsigned long long)mismatches, worst,
              (unsigned long long)corner, (unsigned long long)cutoff, secs)};
}

// 2. Fast hitting times are the naive ones; throughput at eps = 1e-5.
Outcome criterion2() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t differ = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = unit(rng), alpha = unit(rng);
    const auto p = RotationParams::from_alpha(x, alpha, log_uniform(rng, 1e-4, 0.5));
    const auto naive = hitting_times_naive(p, 1000, kStepCap);
    const auto fast = hitting_times_fast(p, 1000);
    differ += naive.m != fast.m || naive.size() != 1000;
  }
  const auto bench = measure_hit_throughput(1e-5, 10, 1000, 7);
  g_manifest["c2"] = {{"triples", 1000}, {"differing", differ},
                      {"naive_hits_per_second", bench.naive_hits_per_second},
                      {"fast_hits_per_second", bench.fast_hits_per_second},
                      {"speedup", bench.speedup()}};
  return {differ == 0 && bench.identical && bench.speedup() >= 20.0,
          fmt("1000 triples x 1000 hits, %llu differ; speedup %.0fx at eps=1e-5 (target >= 20x)",
              (unsigned long long)differ, bench.speedup())};
}

// 3. Three-gap theorem, with return times observed by direct iteration.
Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t violations = 0, three = 0;
  for (int i = 0; i < 1000; ++i) {
    const double alpha = unit(rng);
    const double eps = log_uniform(rng, 1e-3, 0.5);
    const auto map = induce_rotation(alpha, eps);
    std::set<double> labels(map.labels.begin(), map.labels.end());
    bool ok = labels.size() <= 3;
    if (labels.size() == 3) {
      ++three;
      const auto it = labels.begin();
      ok = ok && *std::prev(labels.end()) == *it + *std::next(it);
    }
    // Observed first-return times from 200 window points.
    for (int j = 0; j < 200 && ok; ++j) {
      const double y = (unit(rng) - 0.5) * eps;
      const auto p = RotationParams::from_alpha(y < 0 ? y + 1.0 : y, alpha, eps);
      const auto hits = hitting_times_naive(p, 1, kStepCap);
      ok = hits.size() == 1 && labels.count(static_cast<double>(hits.m[0])) == 1;
    }
    violations += !ok;
  }
  const double secs = seconds_since(t0);
  g_manifest["c3"] = {{"pairs", 1000}, {"three_valued", three}, {"violations", violations},
                      {"seconds", secs}};
  return {violations == 0 && secs <= 60.0,
          fmt("1000 (alpha, eps), %llu with three return times, %llu violations, %.1f s (limit 60)",
              (unsigned long long)three, (unsigned long long)violations, secs)};
}

// 4. Exit certificates on 1e6 rotation-path exits at eps = 1e-2.
Outcome criterion4() {
  const double eps = 1e-2;
  const std::uint64_t samples = 1'000'000;
  struct Tally {
    std::uint64_t exits{0}, z{0}, y{0}, parity{0}, sufficient{0}, zeta{0};
    Discards d;
  };
  auto block = [&](std::mt19937_64& rng, std::uint64_t b, std::uint64_t e) {
    Tally t;
    for (auto i = b; i < e; ++i) {
      const auto ic = draw_initial(MeasureSpec::uniform(), rng, t.d);
      const auto sim = simulate_exit(ic, eps);
      if (sim.status == ExitStatus::censored) { ++t.d.censored; continue; }
      if (sim.status == ExitStatus::budget_exhausted) { ++t.d.budget_exhausted; continue; }
      if (sim.status == ExitStatus::precision_loss) { ++t.d.precision_loss; continue; }
      const auto& r = sim.record;
      const double q = static_cast<double>(r.q);
      ++t.exits;
      t.z += !(r.z_dist <= eps * q / 2.0);
      t.y += !(std::fabs(r.y_out - ic.y_in) <= eps * q);
      t.parity += r.reversed != (r.q % 2 == 1 && r.h_count % 2 == 1);
      // floor(zeta_bar) recomputed from the double value where unambiguous.
      const double zb = r.zeta_bar;
      if (std::fabs(zb - std::round(zb)) > 1e-6) {
        const auto fl = static_cast<long long>(std::floor(zb));
        t.zeta += static_cast<std::uint64_t>(std::llabs(fl)) != r.h_count;
      }
      t.sufficient += reversal_sufficient(ic, eps, r.q) && !r.reversed;
    }
    return t;
  };
  auto merge = [](Tally& a, const Tally& b) {
    a.exits += b.exits; a.z += b.z; a.y += b.y; a.parity += b.parity;
    a.sufficient += b.sufficient; a.zeta += b.zeta; a.d += b.d;
  };
  const auto t = run_blocks(samples, 404, 0, Tally{}, block, merge);
  const auto bad = t.z + t.y + t.parity + t.sufficient + t.zeta;
  g_manifest["c4"] = {{"exits", t.exits}, {"norm_z", t.z}, {"displacement", t.y},
                      {"parity", t.parity}, {"zeta_floor", t.zeta}, {"sufficient", t.sufficient},
                      {"censored", t.d.censored}, {"budget_exhausted", t.d.budget_exhausted},
                      {"precision_loss", t.d.precision_loss}};
  return {bad == 0 && t.exits > 0,
          fmt("%llu exits; violations |z|:%llu |dy|:%llu parity:%llu floor:%llu sufficient:%llu; "
              "discarded %llu censored, %llu budget, %llu precision",
              (unsigned long long)t.exits, (unsigned long long)t.z, (unsigned long long)t.y,
              (unsigned long long)t.parity, (unsigned long long)t.zeta,
              (unsigned long long)t.sufficient, (unsigned long long)t.d.censored,
              (unsigned long long)t.d.budget_exhausted, (unsigned long long)t.d.precision_loss)};
}

// 5. Reversal probability trend over the default grid.
Outcome criterion5() {
  constexpr double kThreshold = 0.95;  // fixed from a 2e4-sample pilot (0.9996)
  const auto sweep = reversal_sweep(kDefaultEpsilonGrid, 0.1, 100'000, opts(505));
  bool monotone = true;
  std::string values;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const auto& r = sweep.rows[i];
    values += fmt("%s%g:%.4f", i ? " " : "", r.epsilon, r.event.p);
    rows.push_back({{"epsilon", r.epsilon}, {"p", r.event.p}, {"ci_low", r.event.lo},
                    {"ci_high", r.event.hi}, {"n", r.event.n},
                    {"censored", r.discards.censored}, {"audit_mismatches", r.audit.mismatches}});
    if (i > 0) {
      const auto& prev = sweep.rows[i - 1];
      const double sigma = std::hypot(prev.event.sigma(), r.event.sigma());
      monotone = monotone && r.event.p >= prev.event.p - 3.0 * sigma;
    }
  }
  std::uint64_t audit_bad = 0;
  for (const auto& r : sweep.rows) audit_bad += r.audit.mismatches;
  const double last = sweep.rows.back().event.p;
  g_manifest["c5"] = {{"threshold", kThreshold}, {"rows", rows}};
  return {monotone && last >= kThreshold && audit_bad == 0,
          fmt("%s; nondecreasing within 3 sigma: %s; p(1e-3)=%.4f vs threshold %.2f; audit mismatches %llu",
              values.c_str(), monotone ? "yes" : "no", last, kThreshold,
              (unsigned long long)audit_bad)};
}

// Shared by criteria 6 and 7.
struct QLaws {
  Pmf dyn, lat;
};

const QLaws& q_laws() {
  static const QLaws laws{estimate_Q_pmf(1e-3, 1'000'000, 1000, opts(606)),
                          limiting_G(1'000'000, 1000, 607, 0)};
  return laws;
}

// 6. Dynamical Q law against the lattice limit.
Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& laws = q_laws();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto cmp = compare_pmfs(laws.dyn, laws.lat, 20);
  g_manifest["c6"] = {{"tv_distance", cmp.tv}, {"seconds", secs},
                      {"dyn_budget_exhausted", laws.dyn.discards.budget_exhausted},
                      {"lat_degenerate", laws.lat.discards.degenerate_lattice},
                      {"p_dyn", cmp.p_dyn}, {"p_lat", cmp.p_lat}};
  return {cmp.tv <= 0.02 && secs <= 900.0,
          fmt("TV over k<=20 (mass beyond lumped) = %.5f (limit 0.02), %.0f s", cmp.tv, secs)};
}

// 7. Tightness of both laws at k = 1000.
Outcome criterion7() {
  const auto& laws = q_laws();
  const double dyn_mass = 1.0 - laws.dyn.tail_mass();
  const double lat_tail = laws.lat.tail_mass();
  const auto dyn_ci = clopper_pearson(laws.dyn.n - laws.dyn.tail, laws.dyn.n);
  const auto lat_ci = clopper_pearson(laws.lat.tail, laws.lat.n);
  g_manifest["c7"] = {{"dyn_mass_k_le_1000", dyn_mass}, {"dyn_ci", {dyn_ci.lo, dyn_ci.hi}},
                      {"lat_tail_k_gt_1000", lat_tail}, {"lat_ci", {lat_ci.lo, lat_ci.hi}}};
  return {dyn_mass >= 0.99 && lat_tail < 0.005,
          fmt("sum_{k<=1000} pmf = %.4f [%.4f, %.4f] (need >= 0.99); lattice tail = %.4f [%.4f, %.4f] (need < 0.005)",
              dyn_mass, dyn_ci.lo, dyn_ci.hi, lat_tail, lat_ci.lo, lat_ci.hi)};
}

// 8. Siegel mean on three regions; lattice counts equal visit counts.
Outcome criterion8() {
  const std::vector<Box> regions{{0.0, 1.0, 0.0, 2.0, false},
                                 {2.0, 4.0, -0.5, 0.5, false},
                                 {-3.0, -1.0, 1.0, 2.0, false}};
  const std::uint64_t n = 100'000;
  using Sums = std::vector<double>;  // (sum, sum of squares) per region
  auto block = [&](std::mt19937_64& rng, std::uint64_t b, std::uint64_t e) {
    Sums s(2 * regions.size(), 0.0);
    for (auto i = b; i < e; ++i) {
      const auto g = haar_sample(rng);
      for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto c = static_cast<double>(count_in_box(g, regions[r]));
        s[2 * r] += c;
        s[2 * r + 1] += c * c;
      }
    }
    return s;
  };
  auto merge = [](Sums& a, const Sums& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  const auto sums = run_blocks(n, 808, 0, Sums(2 * regions.size(), 0.0), block, merge);
  bool siegel = true;
  std::string text;
  auto means = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const double area = regions[r].area();
    const double mean = sums[2 * r] / static_cast<double>(n);
    const double var = sums[2 * r + 1] / static_cast<double>(n) - mean * mean;
    const double sigma = std::sqrt(var / static_cast<double>(n));
    siegel = siegel && std::fabs(mean - area) <= 0.01 * area;
    text += fmt("%s%.4f (area %g, 3sigma %.4f)", r ? ", " : "", mean, area, 3 * sigma);
    means.push_back({{"mean", mean}, {"area", area}, {"sigma", sigma}});
  }

  std::mt19937_64 rng(809);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t mismatch = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = unit(rng), alpha = unit(rng);
    const double eps = log_uniform(rng, 1e-4, 0.3);
    const double T = 5.0 * unit(rng);
    const auto g = geodesic_push(x, alpha, -2.0 * std::log(eps));
    mismatch += count_in_rect(g, T) != visit_count(RotationParams::from_alpha(x, alpha, eps), T);
  }
  g_manifest["c8"] = {{"means", means}, {"identity_mismatches", mismatch}};
  return {siegel && mismatch == 0,
          fmt("mean counts %s; count/visit identity: %llu mismatches in 10000", text.c_str(),
              (unsigned long long)mismatch)};
}

// 9. Tail of the visit count.
Outcome criterion9() {
  const auto tail = tail_diagnostic(1.0, 1e-3, 10'000'000, 8, 64, 909, 0);
  g_manifest["c9"] = {{"slope", tail.slope}, {"fit_k_min", tail.fit_k.front()},
                      {"fit_k_max", tail.fit_k.back()}, {"exceed", tail.exceed}};
  return {tail.slope <= -2.5,
          fmt("slope %.3f over k in [%llu, %llu] (counts >= 100), need <= -2.5", tail.slope,
              (unsigned long long)tail.fit_k.front(), (unsigned long long)tail.fit_k.back())};
}

// 10. Flight-time CDF.
Outcome criterion10() {
  std::vector<double> grid{0.0};
  for (int j = -8; j <= 28; ++j) grid.push_back(std::pow(10.0, j / 4.0));
  const auto fine = estimate_T_cdf(1e-3, 1'000'000, grid, opts(1010));
  const auto coarse = estimate_T_cdf(1e-2, 1'000'000, grid, opts(1011));
  bool monotone = fine.cdf(0) == 0.0;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a.push_back(fine.cdf(i));
    b.push_back(coarse.cdf(i));
    if (i > 0) monotone = monotone && a[i] >= a[i - 1];
  }
  const double top = a.back();
  const double sup = sup_distance(a, b);
  g_manifest["c10"] = {{"grid", grid}, {"cdf_1e-3", a}, {"cdf_1e-2", b},
                       {"censored_1e-3", fine.censored_mass()},
                       {"censored_1e-2", coarse.censored_mass()}, {"sup_distance", sup}};
  return {monotone && top >= 0.99 && sup <= 0.03,
          fmt("monotone: %s; CDF at t=1e7: %.4f (censored %.4f); sup distance to eps=1e-2: %.4f",
              monotone ? "yes" : "no", top, fine.censored_mass(), sup)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"oracle equivalence", criterion1},      {"fast-path fidelity", criterion2},
    {"three-gap invariant", criterion3},     {"exit certificates", criterion4},
    {"reversal trend", criterion5},          {"limit-law cross-check", criterion6},
    {"tightness", criterion7},               {"sampler validity", criterion8},
    {"tail bound", criterion9},              {"flight-time CDF", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> chosen;
  std::string manifest_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--manifest" && i + 1 < argc) {
      manifest_path = argv[++i];
    } else {
      chosen.push_back(std::atoi(arg.c_str()));
    }
  }
  if (chosen.empty()) {
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) chosen.push_back(i);
  }
  int failed = 0;
  for (const int c : chosen) {
    if (c < 1 || c > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", c);
      return 2;
    }
    const auto& [name, fn] = kCriteria[static_cast<std::size_t>(c - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c, name.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  if (!manifest_path.empty()) {
    std::ofstream(manifest_path) << g_manifest.dump(2) << '\n';
  }
  return failed == 0 ? 0 : 1;
}
