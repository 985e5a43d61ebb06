#include "retro/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "retro/errors.hpp"

namespace retro {
namespace {

using nlohmann::ordered_json;

// Non-finite values are not representable in JSON numbers.
ordered_json number(double v) {
  if (!std::isfinite(v)) return ordered_json(format_double(v));
  return ordered_json(v);
}

ordered_json discards_json(const Discards& d) {
  return ordered_json{{"corner_hit", d.corner_hit},
                      {"cutoff", d.cutoff},
                      {"budget_exhausted", d.budget_exhausted},
                      {"precision_loss", d.precision_loss},
                      {"censored", d.censored},
                      {"degenerate_lattice", d.degenerate_lattice},
                      {"resampled_direction", d.resampled_direction},
                      {"duplicate_alpha", d.duplicate_alpha}};
}

ordered_json exit_object(const ExitRecord& r) {
  return ordered_json{{"Q", r.q},
                      {"T", number(r.t)},
                      {"y_out", number(r.y_out)},
                      {"zeta_bar", number(r.zeta_bar)},
                      {"h_count", r.h_count},
                      {"reversed", r.reversed},
                      {"z_distance", number(r.z_dist)}};
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

void write_hits_csv(std::ostream& out, const HitSequence& hits) {
  out << "k,m,n,xi\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    out << i + 1 << ',' << hits.m[i] << ',' << hits.n[i] << ',' << hits.xi[i] << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << "event,kind,x,y,t\n";
  for (std::size_t i = 0; i < record.events.size(); ++i) {
    const auto& e = record.events[i];
    out << i + 1 << ',' << to_string(e.kind) << ',' << format_double(e.x) << ','
        << format_double(e.y) << ',' << format_double(e.t) << '\n';
  }
}

void write_pmf_csv(std::ostream& out, const Pmf& pmf) {
  out << "k,p,ci_low,ci_high\n";
  for (std::uint64_t k = 1; k <= pmf.k_max(); ++k) {
    const auto ci = pmf.interval(k);
    out << k << ',' << format_double(ci.p) << ',' << format_double(ci.lo) << ','
        << format_double(ci.hi) << '\n';
  }
  const auto tail = clopper_pearson(pmf.tail, pmf.n);
  out << "tail," << format_double(tail.p) << ',' << format_double(tail.lo) << ','
      << format_double(tail.hi) << '\n';
}

void write_comparison_csv(std::ostream& out, const Pmf& dyn, const Pmf& lat,
                          std::uint64_t k_cut) {
  const auto cmp = compare_pmfs(dyn, lat, k_cut);
  out << "k,p_dyn,dyn_ci_low,dyn_ci_high,p_lat,lat_ci_low,lat_ci_high\n";
  for (std::uint64_t k = 1; k <= k_cut; ++k) {
    const auto a = dyn.interval(k), b = lat.interval(k);
    out << k << ',' << format_double(a.p) << ',' << format_double(a.lo) << ','
        << format_double(a.hi) << ',' << format_double(b.p) << ',' << format_double(b.lo)
        << ',' << format_double(b.hi) << '\n';
  }
  out << "tv_distance," << format_double(cmp.tv) << '\n';
}

void write_cdf_csv(std::ostream& out, const TCdf& cdf) {
  out << "t,p,ci_low,ci_high\n";
  for (std::size_t i = 0; i < cdf.grid.size(); ++i) {
    const auto ci = clopper_pearson(cdf.below[i], cdf.n);
    out << format_double(cdf.grid[i]) << ',' << format_double(ci.p) << ','
        << format_double(ci.lo) << ',' << format_double(ci.hi) << '\n';
  }
  out << "censored," << format_double(cdf.censored_mass()) << ",,\n";
}

void write_tail_csv(std::ostream& out, const TailDiagnostic& tail) {
  out << "k,p,ci_low,ci_high\n";
  for (std::size_t i = 0; i < tail.k.size(); ++i) {
    const auto ci = clopper_pearson(tail.exceed[i], tail.n);
    out << tail.k[i] << ',' << format_double(ci.p) << ',' << format_double(ci.lo) << ','
        << format_double(ci.hi) << '\n';
  }
  out << "slope," << format_double(tail.slope) << ",,\n";
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "epsilon,delta,p,ci_low,ci_high,p_reversed,n,censored,budget_exhausted,"
         "precision_loss,audit_checked,audit_mismatches\n";
  for (const auto& r : report.rows) {
    out << format_double(r.epsilon) << ',' << format_double(r.delta) << ','
        << format_double(r.event.p) << ',' << format_double(r.event.lo) << ','
        << format_double(r.event.hi) << ',' << format_double(r.reversed.p) << ','
        << r.event.n << ',' << r.discards.censored << ',' << r.discards.budget_exhausted
        << ',' << r.discards.precision_loss << ',' << r.audit.checked << ','
        << r.audit.mismatches << '\n';
  }
}

std::string exit_json(const ExitRecord& record) { return exit_object(record).dump(2); }

std::string trajectory_json(const InitialCondition& ic, double epsilon,
                            const TrajectoryRecord& record) {
  ordered_json j;
  j["y_in"] = number(ic.y_in);
  j["phi"] = number(ic.phi);
  j["slope"] = number(ic.slope);
  j["epsilon"] = number(epsilon);
  j["event_count"] = record.event_count;
  j["cutoff"] = record.cutoff();
  j["exit"] = record.exit ? exit_object(*record.exit) : ordered_json(nullptr);
  // Top-level copies of the headline values.
  if (record.exit) {
    j["Q"] = record.exit->q;
    j["reversed"] = record.exit->reversed;
    j["y_out"] = number(record.exit->y_out);
  }
  j["vertical_x"] = record.vertical_x;
  return j.dump(2);
}

std::string iet_json(const Iet3& map) {
  ordered_json pieces = ordered_json::array();
  for (std::size_t i = 0; i < map.pieces(); ++i) {
    pieces.push_back({{"start", number(map.piece_start(i))},
                      {"length", number(map.lengths[i])},
                      {"translation", number(map.translations[i])},
                      {"label", number(map.labels[i])}});
  }
  ordered_json j{{"lo", number(map.lo)},
                 {"hi", number(map.hi)},
                 {"degenerate", map.degenerate},
                 {"pieces", pieces}};
  return j.dump(2);
}

std::string manifest_json(const Manifest& m) {
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  ordered_json results = ordered_json::object();
  for (const auto& [k, v] : m.results) results[k] = number(v);
  ordered_json j{{"command", m.command},
                 {"version", m.version},
                 {"seed", m.seed},
                 {"samples", m.samples},
                 {"threads", m.threads},
                 {"deterministic", m.deterministic},
                 {"config_hash", m.config_hash},
                 {"wall_seconds", number(m.wall_seconds)},
                 {"discards", discards_json(m.discards)},
                 {"params", params},
                 {"results", results},
                 {"artifacts", m.artifacts}};
  return j.dump(2);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace retro
