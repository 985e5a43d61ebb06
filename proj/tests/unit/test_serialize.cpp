#include <charconv>
#include <cmath>
#include <cstring>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "retro/config.hpp"
#include "retro/errors.hpp"
#include "retro/serialize.hpp"

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("doubles round-trip through their text form") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    const auto bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const auto text = retro::format_double(v);
    double back = 0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(std::memcmp(&v, &back, sizeof v) == 0);
  }
  CHECK(retro::format_double(0.5) == "0.5");
  CHECK(retro::format_double(1e-300).find(',') == std::string::npos);
}

TEST_CASE("CSV writers emit the documented columns") {
  const auto hits = retro::HitSequence::from_hits(std::vector<std::uint64_t>{2, 3, 7});
  std::ostringstream h;
  retro::write_hits_csv(h, hits);
  CHECK(lines_of(h.str()) == std::vector<std::string>{"k,m,n,xi", "1,2,2,2", "2,3,1,1", "3,7,4,5"});

  retro::Pmf pmf;
  pmf.counts = {6, 0, 3};
  pmf.tail = 1;
  pmf.n = 10;
  std::ostringstream p;
  retro::write_pmf_csv(p, pmf);
  const auto rows = lines_of(p.str());
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "k,p,ci_low,ci_high");
  CHECK(rows[1].rfind("1,0.59999999999999998,", 0) == 0);
  CHECK(rows[4].rfind("tail,0.10000000000000001,", 0) == 0);

  std::ostringstream c;
  retro::write_comparison_csv(c, pmf, pmf, 2);
  const auto crow = lines_of(c.str());
  CHECK(crow.front() == "k,p_dyn,dyn_ci_low,dyn_ci_high,p_lat,lat_ci_low,lat_ci_high");
  CHECK(crow.back() == "tv_distance,0");
}

TEST_CASE("trajectory and manifest JSON") {
  const auto ic = retro::InitialCondition::from_slope(0.9, 0.2);
  const auto rec = retro::trace(ic, 0.3);
  const auto j = nlohmann::json::parse(retro::trajectory_json(ic, 0.3, rec));
  CHECK(j["Q"] == 1);
  CHECK(j["reversed"] == true);
  CHECK(j["y_out"].get<double>() == doctest::Approx(0.7));

  retro::Manifest m;
  m.command = "compare";
  m.seed = 18446744073709551615ULL;
  m.discards.censored = 4;
  m.params = {{"epsilon_grid", "0.001"}};
  m.results = {{"tv_distance", 0.01}};
  const auto mj = nlohmann::json::parse(retro::manifest_json(m));
  CHECK(mj["seed"].get<std::uint64_t>() == m.seed);
  CHECK(mj["discards"]["censored"] == 4);
  CHECK(mj["results"]["tv_distance"] == 0.01);

  const auto map = retro::induce_rotation(std::sqrt(2.0) - 1.0, 0.5);
  const auto ij = nlohmann::json::parse(retro::iet_json(map));
  CHECK(ij["pieces"].size() == 3);
}

TEST_CASE("config grammar") {
  std::istringstream in(
      "# comment\n"
      "command = exitstats\n"
      "epsilon-grid = 0.3, 0.1,0.01   # trailing comment\n"
      "\n"
      "samples = 1e5\n"
      "seed = 18446744073709551615\n"
      "deterministic = true\n");
  const auto cfg = retro::parse_config(in);
  CHECK(cfg.command == "exitstats");
  CHECK(cfg.epsilons == std::vector<double>{0.3, 0.1, 0.01});
  CHECK(cfg.samples == 100000);
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK(cfg.effective_threads() == 1);
  CHECK_NOTHROW(retro::validate(cfg));
}

TEST_CASE("config errors name the line and key") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      retro::validate(retro::parse_config(in));
    } catch (const retro::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("samples = 3\nbogus = 1\n") == "line 2, key 'bogus': unknown key");
  CHECK(error_of("delta = abc\n").find("line 1, key 'delta'") == 0);
  CHECK(error_of("samples = 2.5\n").find("nonnegative integer") != std::string::npos);
  CHECK(error_of("command = fly\n").find("unknown subcommand") != std::string::npos);
  CHECK(error_of("no equals sign\n") == "line 1: expected 'key = value'");
  CHECK(error_of("epsilon = 1.5\n").find("out of range") != std::string::npos);
  CHECK(error_of("delta = 0\n").find("out of range") != std::string::npos);
  CHECK(error_of("measure = gaussian\n").find("out of range") != std::string::npos);
  CHECK(error_of("times = 1,2,3,4\n").find("out of range") != std::string::npos);
}

TEST_CASE("config hash ignores the worker count") {
  retro::RunConfig a, b;
  b.threads = 8;
  b.out = "elsewhere";
  CHECK(retro::fnv1a_hex(a.canonical()) == retro::fnv1a_hex(b.canonical()));
  b.seed = 2;
  CHECK(retro::fnv1a_hex(a.canonical()) != retro::fnv1a_hex(b.canonical()));
  CHECK(retro::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(retro::fnv1a_hex("a") == "af63dc4c8601ec8c");
}
