#include <doctest.h>

#include <cmath>
#include <random>

#include "lbsolve/error.hpp"
#include "lbsolve/fmm.hpp"

using namespace lbs;

namespace {

double scaled_error(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return err / scale;
}

std::vector<Complex> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> z(n);
  for (auto& v : z) v = {u(rng), u(rng)};
  return z;
}

}  // namespace

TEST_CASE("expansion order") {
  CHECK(expansion_order(1e-14) == 49);
  CHECK(expansion_order(0.5) == 4);
  CHECK(expansion_order(1e-300) == 60);
}

TEST_CASE("self-interaction sum matches direct summation") {
  const auto z = random_points(4000, 1);
  const auto q = random_points(4000, 2);
  CHECK(scaled_error(cauchy_sum(z, q, {}, 1e-14, true), cauchy_sum_direct(z, q, {}, true)) < 1e-12);
}

TEST_CASE("separate targets match direct summation") {
  const auto z = random_points(2000, 3);
  const auto q = random_points(2000, 4);
  auto t = random_points(1500, 5);
  for (auto& v : t) v *= 1.3;
  CHECK(scaled_error(cauchy_sum(z, q, t, 1e-14, false), cauchy_sum_direct(z, q, t, false)) < 1e-12);
}

TEST_CASE("clustered points build a deep tree and stay accurate") {
  // stereographic images of points near the south pole cluster at 0
  std::vector<Complex> z;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) z.push_back(std::polar(std::pow(10.0, -6.0 * u(rng)), kTwoPi * u(rng)));
  const auto q = random_points(3000, 6);
  CauchyFmm fmm(z);
  CHECK(fmm.tree().depth() >= 12);
  CHECK(scaled_error(fmm.evaluate(q), cauchy_sum_direct(z, q, {}, true)) < 1e-12);
  CHECK(fmm.stats().levels_used == fmm.tree().depth() + 1);
}

TEST_CASE("tree invariants") {
  const auto z = random_points(5000, 7);
  const auto tree = build_tree(z, 30, 30);
  std::size_t in_leaves = 0;
  for (const auto& b : tree.boxes)
    if (b.leaf()) {
      CHECK(b.sources() <= 30);
      in_leaves += b.sources();
    }
  CHECK(in_leaves == z.size());
  CHECK_FALSE(tree.overflow);
}

TEST_CASE("fmm errors") {
  const auto z = random_points(100, 8);
  CauchyFmm fmm(z);
  CHECK_THROWS_AS(fmm.stats(), Error);
  std::vector<Complex> t{z[4]};
  const auto q = random_points(100, 9);
  CHECK_THROWS_AS(cauchy_sum(z, q, t, 1e-14, false), Error);
}
