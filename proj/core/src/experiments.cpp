#include "retro/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "retro/errors.hpp"
#include "retro/parallel.hpp"
#include "retro/rotation.hpp"

namespace retro {
namespace {

constexpr std::uint64_t kAuditStride = 100;
constexpr std::uint64_t kAuditMaxEvents = 10'000'000;

std::uint64_t count_duplicates(std::vector<std::uint64_t>& bits) {
  std::sort(bits.begin(), bits.end());
  std::uint64_t dup = 0;
  for (std::size_t i = 1; i < bits.size(); ++i) dup += bits[i] == bits[i - 1];
  return dup;
}

void check_samples(std::uint64_t samples) {
  if (samples == 0) throw EmptySample("no samples requested");
}

// Uniform on [0, 1) x [0, 1): the torus coordinates (x, alpha).
std::pair<double, double> draw_torus(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x = unit(rng);
  return {x, unit(rng)};
}

}  // namespace

MeasureSpec MeasureSpec::uniform() { return {}; }

double integrate_density(const std::function<double(double, double)>& density) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  constexpr int kPanels = 32;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double y_lo = static_cast<double>(i) / kPanels;
    const double y_hi = static_cast<double>(i + 1) / kPanels;
    total += Rule::integrate(
        [&](double y) {
          double inner = 0.0;
          for (int j = 0; j < kPanels; ++j) {
            const double p_lo = -0.5 + static_cast<double>(j) / kPanels;
            const double p_hi = -0.5 + static_cast<double>(j + 1) / kPanels;
            inner += Rule::integrate([&](double phi) { return density(y, phi); }, p_lo, p_hi);
          }
          return inner;
        },
        y_lo, y_hi);
  }
  return total;
}

MeasureSpec MeasureSpec::custom(std::function<double(double, double)> density,
                                double density_max) {
  if (!density) throw InvalidArgument("MeasureSpec: empty density");
  if (!(density_max > 0.0)) throw InvalidArgument("MeasureSpec: density_max must be > 0");
  bool negative = false;
  const double mass = integrate_density([&](double y, double phi) {
    const double v = density(y, phi);
    negative = negative || v < 0.0 || v > density_max;
    return v;
  });
  if (negative) throw InvalidArgument("MeasureSpec: density outside [0, density_max]");
  if (std::fabs(mass - 1.0) > 1e-6) {
    throw InvalidArgument("MeasureSpec: density integrates to " + std::to_string(mass));
  }
  MeasureSpec m;
  m.kind = Kind::custom_density;
  m.density = std::move(density);
  m.density_max = density_max;
  return m;
}

Discards& Discards::operator+=(const Discards& o) {
  corner_hit += o.corner_hit;
  cutoff += o.cutoff;
  budget_exhausted += o.budget_exhausted;
  precision_loss += o.precision_loss;
  censored += o.censored;
  degenerate_lattice += o.degenerate_lattice;
  resampled_direction += o.resampled_direction;
  duplicate_alpha += o.duplicate_alpha;
  return *this;
}

Discards& AuditStats::fold_into(Discards& d) const {
  d.corner_hit += corner_hit;
  d.cutoff += cutoff;
  return d;
}

InitialCondition draw_initial(const MeasureSpec& measure, std::mt19937_64& rng,
                              Discards& discards) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double y = unit(rng);
    const double phi = unit(rng) - 0.5;
    if (measure.kind == MeasureSpec::Kind::custom_density &&
        unit(rng) * measure.density_max >= measure.density(y, phi)) {
      continue;
    }
    if (y == 0.0 || phi == 0.0 || phi == -0.5) {
      ++discards.resampled_direction;
      continue;
    }
    return InitialCondition::from_angle(y, phi);
  }
}

SimulatedExit simulate_exit(const InitialCondition& ic, double epsilon,
                            std::uint64_t max_returns) {
  HitStream stream(ic.rotation(epsilon), HitMode::fast);
  std::vector<std::uint64_t> n;
  std::uint64_t last = 0;
  std::int64_t xi = 0;
  SimulatedExit out;
  for (std::uint64_t j = 1;; ++j) {
    if (j > max_returns + 1) {
      out.status = ExitStatus::censored;
      out.returns = n.size();
      return out;
    }
    const auto hit = stream.next();
    if (!hit) {
      out.status = ExitStatus::budget_exhausted;
      out.returns = n.size();
      return out;
    }
    const std::uint64_t gap = *hit - last;
    last = *hit;
    n.push_back(gap);
    xi += (j % 2 == 1) ? static_cast<std::int64_t>(gap) : -static_cast<std::int64_t>(gap);
    if (xi <= 0) break;
  }
  out.returns = n.size();
  try {
    out.record = exit_record_from_returns(ic, epsilon, n, n.size() - 1);
  } catch (const PrecisionLoss&) {
    out.status = ExitStatus::precision_loss;
  }
  return out;
}

std::optional<std::uint64_t> simulate_q(const RotationParams& params,
                                        std::uint64_t k_max) {
  HitStream stream(params, HitMode::fast);
  std::uint64_t last = 0;
  std::int64_t xi = 0;
  for (std::uint64_t j = 1; j <= k_max + 1; ++j) {
    const auto hit = stream.next();
    if (!hit) throw BudgetExhausted("simulate_q: orbit stopped returning");
    const auto gap = static_cast<std::int64_t>(*hit - last);
    last = *hit;
    xi += (j % 2 == 1) ? gap : -gap;
    if (xi <= 0) return j - 1;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- reversal

namespace {

struct ReversalPartial {
  std::uint64_t n{0}, event{0}, reversed{0};
  Discards discards;
  AuditStats audit;
};

bool audit_matches(const InitialCondition& ic, double epsilon, const ExitRecord& rec,
                   AuditStats& audit) {
  TraceOptions opts;
  opts.max_events = kAuditMaxEvents;
  opts.record_events = false;
  TrajectoryRecord tr;
  try {
    tr = trace(ic, epsilon, opts);
  } catch (const CornerHit&) {
    ++audit.corner_hit;
    return true;
  }
  if (tr.cutoff()) {
    ++audit.cutoff;
    return true;
  }
  ++audit.checked;
  const ExitRecord& e = *tr.exit;
  return e.q == rec.q && e.reversed == rec.reversed && std::fabs(e.y_out - rec.y_out) < 1e-9;
}

}  // namespace

ReversalEstimate estimate_reversal(double epsilon, double delta, std::uint64_t samples,
                                   const RunOptions& options) {
  check_samples(samples);
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("estimate_reversal: delta outside (0, 1]");
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    ReversalPartial part;
    std::vector<std::uint64_t> alphas;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto ic = draw_initial(options.measure, rng, part.discards);
      alphas.push_back(std::bit_cast<std::uint64_t>(ic.rotation(epsilon).alpha()));
      const auto sim = simulate_exit(ic, epsilon);
      switch (sim.status) {
        case ExitStatus::censored: ++part.discards.censored; continue;
        case ExitStatus::budget_exhausted: ++part.discards.budget_exhausted; continue;
        case ExitStatus::precision_loss: ++part.discards.precision_loss; continue;
        case ExitStatus::exited: break;
      }
      ++part.n;
      const auto& rec = sim.record;
      if (rec.reversed) {
        ++part.reversed;
        if (std::fabs(rec.y_out - ic.y_in) < delta) ++part.event;
      }
      if (i % kAuditStride == 0 && !audit_matches(ic, epsilon, rec, part.audit)) {
        ++part.audit.mismatches;
      }
    }
    part.discards.duplicate_alpha += count_duplicates(alphas);
    return part;
  };
  auto merge = [](ReversalPartial& acc, const ReversalPartial& p) {
    acc.n += p.n;
    acc.event += p.event;
    acc.reversed += p.reversed;
    acc.discards += p.discards;
    acc.audit.checked += p.audit.checked;
    acc.audit.mismatches += p.audit.mismatches;
    acc.audit.corner_hit += p.audit.corner_hit;
    acc.audit.cutoff += p.audit.cutoff;
  };
  const auto total =
      run_blocks(samples, options.seed, options.threads, ReversalPartial{}, block, merge);
  if (total.n == 0) throw EmptySample("estimate_reversal: every sample was discarded");
  ReversalEstimate est;
  est.epsilon = epsilon;
  est.delta = delta;
  est.event = clopper_pearson(total.event, total.n);
  est.reversed = clopper_pearson(total.reversed, total.n);
  est.discards = total.discards;
  est.audit = total.audit;
  return est;
}

SweepReport reversal_sweep(const std::vector<double>& epsilons, double delta,
                           std::uint64_t samples, const RunOptions& options) {
  SweepReport report;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    RunOptions opts = options;
    opts.seed = options.seed + i;
    report.rows.push_back(estimate_reversal(epsilons[i], delta, samples, opts));
  }
  return report;
}

Discards SweepReport::discards() const {
  Discards d;
  for (const auto& r : rows) d += r.discards;
  return d;
}

// --------------------------------------------------------------------- pmf

double Pmf::p(std::uint64_t k) const {
  if (k == 0 || k > counts.size() || n == 0) return 0.0;
  return static_cast<double>(counts[k - 1]) / static_cast<double>(n);
}

double Pmf::tail_mass() const {
  return n == 0 ? 0.0 : static_cast<double>(tail) / static_cast<double>(n);
}

Proportion Pmf::interval(std::uint64_t k) const {
  if (k == 0 || k > counts.size()) throw InvalidArgument("Pmf::interval: k out of range");
  return clopper_pearson(counts[k - 1], n);
}

std::vector<double> Pmf::lumped(std::uint64_t k_cut) const {
  if (k_cut > counts.size()) throw InvalidArgument("Pmf::lumped: k_cut beyond k_max");
  std::vector<double> out;
  std::uint64_t beyond = tail;
  for (std::uint64_t k = 1; k <= counts.size(); ++k) {
    if (k <= k_cut) {
      out.push_back(p(k));
    } else {
      beyond += counts[k - 1];
    }
  }
  out.push_back(n == 0 ? 0.0 : static_cast<double>(beyond) / static_cast<double>(n));
  return out;
}

namespace {

Pmf empty_pmf(std::uint64_t k_max) {
  Pmf p;
  p.counts.assign(k_max, 0);
  return p;
}

void merge_pmf(Pmf& acc, const Pmf& p) {
  for (std::size_t i = 0; i < acc.counts.size(); ++i) acc.counts[i] += p.counts[i];
  acc.tail += p.tail;
  acc.n += p.n;
  acc.discards += p.discards;
}

void record_index(Pmf& pmf, std::optional<std::uint64_t> q) {
  ++pmf.n;
  // Q = 0 cannot occur: the first alternating sum is n^1 > 0.
  if (q && *q >= 1) {
    ++pmf.counts[*q - 1];
  } else {
    ++pmf.tail;
  }
}

}  // namespace

Pmf estimate_Q_pmf(double epsilon, std::uint64_t samples, std::uint64_t k_max,
                   const RunOptions& options) {
  check_samples(samples);
  if (k_max == 0) throw InvalidArgument("estimate_Q_pmf: k_max must be >= 1");
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    Pmf part = empty_pmf(k_max);
    std::vector<std::uint64_t> alphas;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto ic = draw_initial(options.measure, rng, part.discards);
      const auto params = ic.rotation(epsilon);
      alphas.push_back(std::bit_cast<std::uint64_t>(params.alpha()));
      try {
        record_index(part, simulate_q(params, k_max));
      } catch (const BudgetExhausted&) {
        ++part.discards.budget_exhausted;
      }
    }
    part.discards.duplicate_alpha += count_duplicates(alphas);
    return part;
  };
  auto out = run_blocks(samples, options.seed, options.threads, empty_pmf(k_max), block, merge_pmf);
  if (out.n == 0) throw EmptySample("estimate_Q_pmf: every sample was discarded");
  return out;
}

Pmf limiting_G(std::uint64_t samples, std::uint64_t k_max, std::uint64_t seed,
               unsigned threads, double y_max) {
  check_samples(samples);
  if (k_max == 0) throw InvalidArgument("limiting_G: k_max must be >= 1");
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    Pmf part = empty_pmf(k_max);
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto g = haar_sample(rng, y_max);
      try {
        record_index(part, limit_exit_index(g, k_max));
      } catch (const DegenerateLattice&) {
        ++part.discards.degenerate_lattice;
      } catch (const BudgetExhausted&) {
        ++part.discards.budget_exhausted;
      }
    }
    return part;
  };
  auto out = run_blocks(samples, seed, threads, empty_pmf(k_max), block, merge_pmf);
  if (out.n == 0) throw EmptySample("limiting_G: every sample was discarded");
  return out;
}

PmfComparison compare_pmfs(const Pmf& dyn, const Pmf& lat, std::uint64_t k_cut) {
  PmfComparison c;
  c.p_dyn = dyn.lumped(k_cut);
  c.p_lat = lat.lumped(k_cut);
  c.tv = total_variation(c.p_dyn, c.p_lat);
  return c;
}

// ------------------------------------------------------------- flight time

double TCdf::cdf(std::size_t i) const {
  return n == 0 ? 0.0 : static_cast<double>(below.at(i)) / static_cast<double>(n);
}

double TCdf::censored_mass() const {
  return n == 0 ? 0.0 : static_cast<double>(discards.censored) / static_cast<double>(n);
}

TCdf estimate_T_cdf(double epsilon, std::uint64_t samples, const std::vector<double>& grid,
                    const RunOptions& options) {
  check_samples(samples);
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw InvalidArgument("estimate_T_cdf: grid must be nondecreasing");
  }
  TCdf init;
  init.grid = grid;
  init.below.assign(grid.size(), 0);
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    TCdf part = init;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto ic = draw_initial(options.measure, rng, part.discards);
      const auto sim = simulate_exit(ic, epsilon);
      switch (sim.status) {
        case ExitStatus::censored:
          // Counted in n: an exit beyond the cap is not below any grid point
          // we can certify, so the CDF is a lower bound.
          ++part.discards.censored;
          ++part.n;
          continue;
        case ExitStatus::budget_exhausted: ++part.discards.budget_exhausted; continue;
        case ExitStatus::precision_loss: ++part.discards.precision_loss; continue;
        case ExitStatus::exited: break;
      }
      ++part.n;
      const double scaled = epsilon * sim.record.t;
      const auto first = std::upper_bound(part.grid.begin(), part.grid.end(), scaled);
      for (auto it = first; it != part.grid.end(); ++it) {
        ++part.below[static_cast<std::size_t>(it - part.grid.begin())];
      }
    }
    return part;
  };
  auto merge = [](TCdf& acc, const TCdf& p) {
    for (std::size_t i = 0; i < acc.below.size(); ++i) acc.below[i] += p.below[i];
    acc.n += p.n;
    acc.discards += p.discards;
  };
  auto out = run_blocks(samples, options.seed, options.threads, init, block, merge);
  if (out.n == 0) throw EmptySample("estimate_T_cdf: every sample was discarded");
  return out;
}

// -------------------------------------------------------------------- tail

double TailDiagnostic::probability(std::size_t i) const {
  return n == 0 ? 0.0 : static_cast<double>(exceed.at(i)) / static_cast<double>(n);
}

TailDiagnostic tail_diagnostic(double s, double epsilon, std::uint64_t samples,
                               std::uint64_t k_lo, std::uint64_t k_hi,
                               std::uint64_t seed, unsigned threads) {
  check_samples(samples);
  if (k_lo == 0 || k_hi < k_lo) throw InvalidArgument("tail_diagnostic: bad k range");
  const std::uint64_t last = horizon_steps(s, epsilon);
  // hist[c] = #{N = c} for c < k_hi, hist[k_hi] = #{N >= k_hi}.
  using Hist = std::vector<std::uint64_t>;
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    Hist hist(k_hi + 1, 0);
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto [x, alpha] = draw_torus(rng);
      std::uint64_t count = 0;
      if (last > 0) {
        HitStream stream(RotationParams::from_alpha(x, alpha, epsilon), HitMode::fast, last);
        while (count < k_hi && stream.next()) ++count;
      }
      ++hist[count];
    }
    return hist;
  };
  auto merge = [](Hist& acc, const Hist& p) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  };
  const Hist hist = run_blocks(samples, seed, threads, Hist(k_hi + 1, 0), block, merge);

  TailDiagnostic out;
  out.n = samples;
  std::vector<double> fx, fy;
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    std::uint64_t e = 0;
    for (std::uint64_t c = k; c <= k_hi; ++c) e += hist[c];
    out.k.push_back(k);
    out.exceed.push_back(e);
    if (e >= 100) {
      out.fit_k.push_back(k);
      fx.push_back(static_cast<double>(k));
      fy.push_back(static_cast<double>(e) / static_cast<double>(samples));
    }
  }
  if (fx.size() < 2) {
    throw InsufficientData("tail_diagnostic: fewer than two k with 100 exceedances");
  }
  out.slope = loglog_slope(fx, fy);
  return out;
}

// ------------------------------------------------------------- joint hits

namespace {

void check_arity(const std::vector<double>& t) {
  if (t.empty() || t.size() > 3) {
    throw ArityError("joint hit law supports 1 to 3 times, got " + std::to_string(t.size()));
  }
}

struct Tally {
  std::uint64_t k{0}, n{0};
};

}  // namespace

Proportion joint_hit_cdf(double epsilon, std::uint64_t samples, const std::vector<double>& t,
                         std::uint64_t seed, unsigned threads) {
  check_arity(t);
  check_samples(samples);
  std::vector<std::uint64_t> steps;
  for (double tk : t) steps.push_back(tk <= 0.0 ? 0 : horizon_steps(tk, epsilon));
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    Tally part;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto [x, alpha] = draw_torus(rng);
      HitStream stream(RotationParams::from_alpha(x, alpha, epsilon), HitMode::fast);
      // eps*m^k > t_k  <=>  m^k > floor(t_k / eps).
      bool ok = true;
      for (std::size_t k = 0; k < steps.size() && ok; ++k) {
        const auto m = stream.next();
        ok = !m || *m > steps[k];
        if (!m) break;
      }
      part.k += ok;
      ++part.n;
    }
    return part;
  };
  auto merge = [](Tally& acc, const Tally& p) {
    acc.k += p.k;
    acc.n += p.n;
  };
  const auto tally = run_blocks(samples, seed, threads, Tally{}, block, merge);
  return clopper_pearson(tally.k, tally.n);
}

Proportion joint_hit_cdf_lattice(std::uint64_t samples, const std::vector<double>& t,
                                 std::uint64_t seed, unsigned threads, double y_max) {
  check_arity(t);
  check_samples(samples);
  auto block = [&](std::mt19937_64& rng, std::uint64_t begin, std::uint64_t end) {
    Tally part;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto g = haar_sample(rng, y_max);
      bool ok = true;
      for (std::size_t k = 0; k < t.size() && ok; ++k) {
        ok = t[k] <= 0.0 || count_in_rect(g, t[k]) <= k;
      }
      part.k += ok;
      ++part.n;
    }
    return part;
  };
  auto merge = [](Tally& acc, const Tally& p) {
    acc.k += p.k;
    acc.n += p.n;
  };
  const auto tally = run_blocks(samples, seed, threads, Tally{}, block, merge);
  return clopper_pearson(tally.k, tally.n);
}

// -------------------------------------------------------------- throughput

HitThroughput measure_hit_throughput(double epsilon, std::uint64_t cases, std::uint64_t hits,
                                     std::uint64_t seed) {
  check_samples(cases);
  auto rng = block_rng(seed, 0);
  std::vector<RotationParams> params;
  for (std::uint64_t i = 0; i < cases; ++i) {
    const auto [x, alpha] = draw_torus(rng);
    params.push_back(RotationParams::from_alpha(x, alpha, epsilon));
  }
  using clock = std::chrono::steady_clock;
  HitThroughput out;
  std::vector<HitSequence> naive, fast;
  const auto t0 = clock::now();
  for (const auto& p : params) naive.push_back(hitting_times_naive(p, hits, kStepCap));
  const auto t1 = clock::now();
  for (const auto& p : params) fast.push_back(hitting_times_fast(p, hits));
  const auto t2 = clock::now();
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.hits += naive[i].size();
    out.identical = out.identical && naive[i].m == fast[i].m;
  }
  const double dn = std::chrono::duration<double>(t1 - t0).count();
  const double df = std::chrono::duration<double>(t2 - t1).count();
  const auto h = static_cast<double>(out.hits);
  out.naive_hits_per_second = dn > 0 ? h / dn : 0.0;
  out.fast_hits_per_second = df > 0 ? h / df : h / 1e-9;
  return out;
}

}  // namespace retro
