#include "retro/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "retro/errors.hpp"

namespace retro {

RotationParams::RotationParams(double x0, double slope, double epsilon)
    : epsilon_(epsilon), slope_(slope), x0_(x0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("RotationParams: epsilon must lie in (0, 1)");
  }
  if (!(x0 >= 0.0 && x0 < 1.0)) {
    throw InvalidArgument("RotationParams: x0 must lie in [0, 1)");
  }
  if (!std::isfinite(slope) || std::fabs(slope) >= 0x1p62) {
    throw InvalidArgument("RotationParams: slope must be finite");
  }
  alpha_ = slope - std::floor(slope);
  if (alpha_ >= 1.0) alpha_ = 0.0;
  x0_phase_ = phase_of(x0);
  alpha_phase_ = phase_of(slope);
  window_ = ArcWindow::of_length(epsilon);
}

RotationParams RotationParams::from_slope(double x0, double slope,
                                          double epsilon) {
  return RotationParams(x0, slope, epsilon);
}

RotationParams RotationParams::from_alpha(double x0, double alpha,
                                          double epsilon) {
  RotationParams p(x0, alpha, epsilon);
  p.slope_ = p.alpha_;
  return p;
}

void HitSequence::push(std::uint64_t hit) {
  const std::uint64_t prev = m.empty() ? 0 : m.back();
  if (hit <= prev) throw InvalidArgument("HitSequence: hits must increase");
  const std::uint64_t gap = hit - prev;
  const auto signed_gap = static_cast<std::int64_t>(gap);
  const std::int64_t prev_xi = xi.empty() ? 0 : xi.back();
  // Odd-numbered returns move right, even-numbered ones move left.
  xi.push_back(m.size() % 2 == 0 ? prev_xi + signed_gap : prev_xi - signed_gap);
  m.push_back(hit);
  n.push_back(gap);
}

HitSequence HitSequence::from_hits(std::span<const std::uint64_t> hits) {
  HitSequence seq;
  for (auto h : hits) seq.push(h);
  return seq;
}

TransferMatrices TransferMatrices::of_size(std::size_t k) {
  TransferMatrices t;
  t.k = k;
  t.a.assign(k * k, 0);
  t.b.assign(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      // 1-based j: (-1)^(j+1) is +1 for odd j, i.e. even 0-based index.
      t.a[i * k + j] = (j % 2 == 0) ? 1 : -1;
      t.b[i * k + j] = 1;
    }
  }
  return t;
}

std::vector<std::int64_t> TransferMatrices::apply_a(
    std::span<const std::uint64_t> n) const {
  if (n.size() != k) throw InvalidArgument("TransferMatrices: size mismatch");
  std::vector<std::int64_t> out(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out[i] += a[i * k + j] * static_cast<std::int64_t>(n[j]);
    }
  }
  return out;
}

std::vector<std::int64_t> TransferMatrices::apply_b(
    std::span<const std::uint64_t> n) const {
  if (n.size() != k) throw InvalidArgument("TransferMatrices: size mismatch");
  std::vector<std::int64_t> out(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out[i] += b[i * k + j] * static_cast<std::int64_t>(n[j]);
    }
  }
  return out;
}

std::optional<GapStructure> GapStructure::compute(Phase alpha,
                                                  const ArcWindow& window) {
  // a: first n >= 1 with n*alpha in [0, W]; b: first n >= 1 with n*alpha in
  // [-W, -1/2^128]. A point u of the window (shifted to [0, W]) returns after
  // a if it lands going forward, after b if it lands going backward, and
  // after a+b otherwise.
  const u128 w = window.width();
  const auto a0 = first_in_arc(alpha, alpha, 0, w);
  if (!a0) return std::nullopt;
  GapStructure g;
  g.a = *a0 + 1;
  const auto b0 = first_in_arc(alpha, alpha, u128{0} - w, u128{0} - 1);
  if (b0 && *b0 + 1 < kStepCap / 2) g.b = *b0 + 1;
  g.times[g.count++] = g.a;
  if (g.b) {
    if (*g.b != g.a) g.times[g.count++] = *g.b;
    g.times[g.count++] = g.a + *g.b;
  }
  std::sort(g.times, g.times + g.count);
  return g;
}

HitStream::HitStream(const RotationParams& params, HitMode mode,
                     std::uint64_t step_budget)
    : params_(params), mode_(mode), budget_(std::min(step_budget, kStepCap)) {}

std::optional<std::uint64_t> HitStream::scan_from(std::uint64_t from) {
  const Phase step = params_.alpha_phase();
  const ArcWindow& window = params_.window();
  Phase p = params_.x0_phase() + step.times(from);
  for (std::uint64_t l = from + 1; l <= budget_; ++l) {
    p = p + step;
    if (window.contains(p)) return l;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> HitStream::first_fast() {
  const Phase step = params_.alpha_phase();
  const auto j =
      first_in_window(params_.x0_phase() + step, step, params_.window());
  if (!j || *j + 1 > budget_) return std::nullopt;
  return *j + 1;
}

std::optional<std::uint64_t> HitStream::next_fast() {
  if (!gaps_ready_) {
    gaps_ = GapStructure::compute(params_.alpha_phase(), params_.window());
    gaps_ready_ = true;
  }
  if (gaps_) {
    const Phase here = params_.x0_phase() + params_.alpha_phase().times(last_);
    for (int i = 0; i < gaps_->count; ++i) {
      const std::uint64_t t = gaps_->times[i];
      if (params_.window().contains(here + params_.alpha_phase().times(t))) {
        if (t > budget_ - last_) return std::nullopt;
        return last_ + t;
      }
    }
  }
  const auto hit = scan_from(last_);
  if (hit) fallback_ += 1;
  return hit;
}

std::optional<std::uint64_t> HitStream::next() {
  if (started_ && last_ == 0) return std::nullopt;  // exhausted earlier
  std::optional<std::uint64_t> hit;
  if (mode_ == HitMode::naive) {
    hit = scan_from(last_);
  } else {
    hit = started_ ? next_fast() : first_fast();
  }
  started_ = true;
  if (!hit) {
    last_ = 0;
    return std::nullopt;
  }
  last_ = *hit;
  return hit;
}

namespace {

HitSequence collect(const RotationParams& params, std::size_t count,
                    std::uint64_t step_budget, HitMode mode) {
  HitSequence seq;
  if (count == 0) return seq;
  seq.m.reserve(count);
  seq.n.reserve(count);
  seq.xi.reserve(count);
  HitStream stream(params, mode, step_budget);
  while (seq.size() < count) {
    const auto hit = stream.next();
    if (!hit) {
      throw BudgetExhausted("hitting times: only " +
                            std::to_string(seq.size()) + " of " +
                            std::to_string(count) + " hits within budget");
    }
    seq.push(*hit);
  }
  return seq;
}

}  // namespace

HitSequence hitting_times_naive(const RotationParams& params,
                                std::size_t count, std::uint64_t step_budget) {
  return collect(params, count, step_budget, HitMode::naive);
}

HitSequence hitting_times_fast(const RotationParams& params, std::size_t count,
                               std::uint64_t step_budget, bool strict) {
  if (strict && count > 1 &&
      !GapStructure::compute(params.alpha_phase(), params.window())) {
    throw PrecisionLoss("hitting_times_fast: gap structure unresolved");
  }
  return collect(params, count, step_budget, HitMode::fast);
}

std::optional<std::size_t> exit_index(std::span<const std::uint64_t> n) {
  if (n.empty()) throw InvalidArgument("exit_index: empty return-time list");
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    const auto v = static_cast<std::int64_t>(n[j]);
    sum += (j % 2 == 0) ? v : -v;
    if (sum <= 0) return j;  // (j + 1) - 1
  }
  return std::nullopt;
}

double flight_time(std::span<const std::uint64_t> n, std::size_t q,
                   double slope) {
  if (q % 2 == 0) {
    throw ParityError("flight_time: exit index must be odd, got " +
                      std::to_string(q));
  }
  if (n.size() < q) throw InvalidArgument("flight_time: too few return times");
  std::uint64_t rightward = 0;
  for (std::size_t j = 0; j < q; j += 2) rightward += n[j];
  return 2.0 * std::sqrt(1.0 + slope * slope) * static_cast<double>(rightward);
}

std::uint64_t horizon_steps(double horizon, double epsilon) {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  const double steps = std::floor(horizon / epsilon);
  if (steps >= static_cast<double>(kStepCap)) {
    throw InvalidArgument("horizon exceeds the step cap");
  }
  return static_cast<std::uint64_t>(steps);
}

std::uint64_t visit_count(const RotationParams& params, double horizon) {
  const std::uint64_t last = horizon_steps(horizon, params.epsilon());
  if (last == 0) return 0;
  HitStream stream(params, HitMode::fast, last);
  std::uint64_t count = 0;
  while (stream.next()) ++count;
  return count;
}

double continuous_position(const HitSequence& hits, double epsilon, double s) {
  if (s < 0.0) throw InvalidArgument("continuous_position: s must be >= 0");
  if (hits.empty() || s >= epsilon * static_cast<double>(hits.m.back())) {
    throw HorizonExceeded("continuous_position: s beyond the last hit");
  }
  const double first = epsilon * static_cast<double>(hits.m.front());
  if (s < first) return s;
  // Largest k with eps*m^k <= s.
  std::size_t k = 0;
  while (k + 1 < hits.size() &&
         epsilon * static_cast<double>(hits.m[k + 1]) <= s) {
    ++k;
  }
  const double base = epsilon * static_cast<double>(hits.xi[k]);
  const double since = s - epsilon * static_cast<double>(hits.m[k]);
  // 0-based k is hit number k+1, whose leg carries sign (-1)^(k+1).
  return (k % 2 == 0) ? base - since : base + since;
}

}  // namespace retro
