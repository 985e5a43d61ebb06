#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "retro/errors.hpp"
#include "retro/iet.hpp"
#include "retro/lattice.hpp"

using retro::Iet3;

namespace {

// First return of y under R_alpha to [-eps/2, eps/2], in long double.
std::pair<long double, int> first_return(long double y, long double alpha,
                                         long double eps) {
  for (int n = 1; n < 10'000'000; ++n) {
    long double p = y + n * alpha;
    p -= std::floor(p + 0.5L);  // representative in [-1/2, 1/2)
    if (std::fabs(p) <= eps / 2) return {p, n};
  }
  return {0.0L, -1};
}

void check_tiling(const Iet3& map) {
  double total = 0;
  std::vector<std::pair<double, double>> images;
  double start = map.lo;
  for (std::size_t i = 0; i < map.pieces(); ++i) {
    CHECK(map.lengths[i] > 0);
    total += map.lengths[i];
    images.emplace_back(start + map.translations[i],
                        start + map.translations[i] + map.lengths[i]);
    start += map.lengths[i];
  }
  CHECK(std::fabs(total - (map.hi - map.lo)) < 1e-12);
  std::sort(images.begin(), images.end());
  CHECK(std::fabs(images.front().first - map.lo) < 1e-12);
  CHECK(std::fabs(images.back().second - map.hi) < 1e-12);
  for (std::size_t i = 1; i < images.size(); ++i) {
    CHECK(std::fabs(images[i].first - images[i - 1].second) < 1e-12);
  }
}

}  // namespace

TEST_CASE("induced rotation examples") {
  const auto golden = retro::induce_rotation(std::sqrt(2.0) - 1.0, 0.5);
  REQUIRE(golden.pieces() == 3);
  CHECK_FALSE(golden.degenerate);
  std::vector<double> labels = golden.labels;
  std::sort(labels.begin(), labels.end());
  CHECK(labels == std::vector<double>{1, 2, 3});

  const auto wide = retro::induce_rotation(1.0 / M_PI, 0.9);
  CHECK(*std::min_element(wide.labels.begin(), wide.labels.end()) == 1.0);
  check_tiling(golden);
  check_tiling(wide);
}

TEST_CASE("degenerate induced maps are flagged") {
  const auto half = retro::induce_rotation(0.5, 0.2);
  CHECK(half.degenerate);
  CHECK(half.pieces() == 1);
  CHECK(half.labels[0] == 2.0);
  CHECK_THROWS_AS(retro::require_three_pieces(half), retro::DegenerateMap);
  const auto zero = retro::induce_rotation(0.0, 0.2);
  CHECK(zero.degenerate);
  CHECK(retro::iet_apply(zero, 0.05) == 0.05);
}

TEST_CASE("induced map equals first return pointwise") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double alpha = unit(rng);
    const double eps = std::exp(std::log(1e-3) + unit(rng) * std::log(900.0));
    const auto map = retro::induce_rotation(alpha, eps);
    check_tiling(map);
    for (int i = 0; i < 1000; ++i) {
      const double y = (unit(rng) - 0.5) * eps;
      const auto [expected, n] = first_return(y, alpha, eps);
      REQUIRE(n > 0);
      CHECK(std::fabs(retro::iet_apply(map, y) - static_cast<double>(expected)) < 1e-9);
      CHECK(retro::iet_label(map, y) == static_cast<double>(n));
    }
  }
}

TEST_CASE("iet_apply boundary convention and domain") {
  Iet3 map;
  map.lo = 0.0;
  map.hi = 1.0;
  map.lengths = {0.2, 0.3, 0.5};
  map.translations = {0.8, 0.3, -0.5};
  map.labels = {1, 2, 3};
  CHECK(retro::iet_apply(map, 0.1) == doctest::Approx(0.9));
  CHECK(retro::iet_apply(map, 0.2) == doctest::Approx(0.5));  // left-closed
  CHECK(retro::iet_apply(map, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(retro::iet_apply(map, 1.5), retro::OutOfDomain);
  CHECK(retro::iet_apply_inverse(map, 0.9) == doctest::Approx(0.1));
  CHECK(retro::iet_apply_inverse(map, 0.25) == doctest::Approx(0.75));
}

TEST_CASE("alternating exit") {
  const std::vector<double> v{3, 1, 2, 4, 9, 9};
  CHECK(retro::alternating_exit(v) == std::optional<std::size_t>{4});
  const std::vector<double> flat{2, 2, 2, 2};
  CHECK(retro::alternating_exit(flat) == std::optional<std::size_t>{2});
  const std::vector<double> never{5, 1, 1, 1};
  CHECK_FALSE(retro::alternating_exit(never).has_value());
}

TEST_CASE("lattice exchange of the shifted integer lattice is degenerate") {
  const auto g = retro::AffineLattice::from_translation(retro::Mat2{}, {0.3, 0.2});
  CHECK_THROWS_AS(retro::lattice_iet(g), retro::DegenerateLattice);
}

TEST_CASE("lattice exchange reproduces the tube ordinates") {
  std::mt19937_64 rng(14);
  int three = 0;
  const int n = 300;
  for (int s = 0; s < n; ++s) {
    const auto g = retro::haar_sample(rng);
    retro::LatticeIet li;
    try {
      li = retro::lattice_iet(g);
    } catch (const retro::DegenerateLattice&) {
      continue;
    }
    ++three;
    check_tiling(li.iet);
    for (double psi : li.iet.labels) CHECK(psi > 0);
    const auto pts = retro::tube_points(g, 1000);
    double z = -pts.y[0];
    int bad = 0;
    for (std::size_t k = 0; k + 1 < pts.y.size(); ++k) {
      bad += std::fabs(-z - pts.y[k]) > 1e-9;
      bad += std::fabs(retro::iet_label(li.iet, z) - (pts.x[k + 1] - pts.x[k])) > 1e-9;
      z = std::clamp(retro::iet_apply(li.iet, z), -0.5, 0.5);
    }
    CHECK(bad == 0);
    CHECK(li.x1 == pts.x[0]);
    // The point before x1 on the ray: psi(-y0) = x1 - x0 >= x1.
    CHECK(retro::iet_label(li.iet, -li.y0) >= li.x1);
    const auto q = retro::limit_exit_index(g, 5000);
    const auto k = retro::birkhoff_exit(li.iet, li.y0, 5002, li.x1);
    const auto raw = retro::birkhoff_exit(li.iet, li.y0, 5002);
    if (q) {
      REQUIRE(k.has_value());
      CHECK(*k == *q + 1);
      // psi(-y0) >= x1 delays the crossing, possibly past the cutoff.
      if (raw) CHECK(*raw >= *k);
    }
  }
  CHECK(three == n);
}
