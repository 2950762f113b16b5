#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lbsolve/error.hpp"
#include "lbsolve/kernels.hpp"
#include "lbsolve/system.hpp"

using namespace lbs;
using namespace fixtures;

namespace {

double oracle_gap(const IslandDomain& d) {
  double worst = 0.0;
  std::vector<SphereSamples> s;
  for (const auto& c : d.curves) s.push_back(sphere_samples(c));
  for (std::size_t a = 0; a < d.islands(); ++a)
    for (std::size_t i = 0; i < d.curves[a].size(); ++i)
      for (std::size_t b = 0; b < d.islands(); ++b)
        for (std::size_t j = 0; j < d.curves[b].size(); ++j) {
          const auto& cb = d.curves[b];
          double plane, sphere;
          if (a == b && i == j) {
            plane = dlp_kernel_diag(cb.nodes[j], cb.d_nodes[j], cb.curvatures[j]);
            sphere = diag_oracle(s[b].x[j], s[b].xa[j], s[b].xaa[j]);
          } else {
            plane = dlp_kernel(d.curves[a].nodes[i], cb.nodes[j], cb.d_nodes[j]);
            sphere = dlp_kernel_sphere_oracle(s[a].x[i], s[b].x[j], s[b].xa[j]);
          }
          worst = std::max(worst, std::abs(plane - sphere));
        }
  return worst;
}

}  // namespace

TEST_CASE("plane kernel equals the R^3 double-layer kernel") {
  CHECK(oracle_gap(*equator(64)) < 1e-12);
  CHECK(oracle_gap(*south_cap(64)) < 1e-12);
  CHECK(oracle_gap(*north_cap(64)) < 1e-12);
  CHECK(oracle_gap(*plane_ellipse(128)) < 1e-12);
  CHECK(oracle_gap(*polygon(128)) < 1e-12);
  CHECK(oracle_gap(*mix(128)) < 1e-12);
}

TEST_CASE("diagonal on a latitude circle equals the sphere-side limit") {
  // colatitude t, traversed with increasing longitude: x_a.(x_aa x x)/(4 pi |x_a|^2) = cos(t)/(4 pi)
  const double t = 0.25 * kPi;
  const auto d = make({make_cap_circle(SpherePoint(0, 0, -1), kPi - t, 64)}, false);
  const auto& c = d->curves[0];
  for (std::size_t j = 0; j < c.size(); ++j)
    CHECK(std::abs(dlp_kernel_diag(c.nodes[j], c.d_nodes[j], c.curvatures[j]) - std::cos(t) / (2.0 * kTwoPi)) < 1e-12);
}

TEST_CASE("diagonal equals the extrapolated off-diagonal limit") {
  const double r = 2.0, a0 = 0.7;
  const Complex x = std::polar(r, a0);
  auto k = [&](double h) {
    const Complex z = std::polar(r, a0 + h), dz = Complex(0, 1) * z;
    return dlp_kernel(x, z, dz);
  };
  auto sym = [&](double h) { return 0.5 * (k(h) + k(-h)); };
  const double h = 1e-2;
  const double limit = (4.0 * sym(0.5 * h) - sym(h)) / 3.0;
  CHECK(std::abs(dlp_kernel_diag(x, Complex(0, 1) * x, 1.0 / r) - limit) < 1e-8);
}

TEST_CASE("kernel tends to zero along a great circle") {
  // the unit circle is the projected equator
  const Complex x = std::polar(1.0, 0.3);
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const Complex z = std::polar(1.0, 0.3 + h);
    CHECK(std::abs(dlp_kernel(x, z, Complex(0, 1) * z)) < 1e-11);
  }
}

TEST_CASE("equator kernel vanishes identically") {
  const Eigen::MatrixXd k = kernel_matrix(*equator(64));
  CHECK(k.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("green_plane equals green_sphere") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    const Vec3 x = Vec3(g(rng), g(rng), g(rng)).normalized(), y = Vec3(g(rng), g(rng), g(rng)).normalized();
    const double a = green_sphere(SpherePoint(x), SpherePoint(y));
    const double b = green_plane(stereo_project(SpherePoint(x)), stereo_project(SpherePoint(y)));
    CHECK(std::abs(a - b) < 1e-13 * (1.0 + std::abs(a)));
  }
  CHECK_THROWS_AS(green_plane({0.1, 0.2}, {0.1, 0.2}), Error);
}

TEST_CASE("green function has Laplace-Beltrami -1/4pi away from the source") {
  // Delta_S = (1+|xi|^2)^2 / 4 * Delta_plane
  const Complex eta(0.3, -0.4), xi(-0.8, 0.5);
  const double h = 1e-3;
  const double lap = (green_plane(xi + h, eta) + green_plane(xi - h, eta) + green_plane(xi + Complex(0, h), eta) +
                      green_plane(xi - Complex(0, h), eta) - 4.0 * green_plane(xi, eta)) /
                     (h * h);
  const double s = 1.0 + std::norm(xi);
  CHECK(std::abs(0.25 * s * s * lap - 1.0 / (2.0 * kTwoPi)) < 1e-6);
}

TEST_CASE("correction term of a southern cap is its area over 4 pi") {
  const double r = 0.7;
  const auto v = identity_values(*south_cap(64), 0);
  CHECK(std::abs(v.correction - 0.5 * (1.0 - std::cos(r))) < 1e-14);
}

TEST_CASE("constant density identities") {
  const auto d = three_caps(256);
  for (std::size_t k = 0; k < d->islands(); ++k) {
    const auto v = identity_values(*d, k);
    const double s = d->is_outer(k) ? 1.0 : -1.0;
    CHECK(std::abs(v.inside - (s + v.correction)) < 1e-10);
    CHECK(std::abs(v.boundary - (0.5 * s + v.correction)) < 1e-10);
    CHECK(std::abs(v.outside - v.correction) < 1e-10);
  }
}

TEST_CASE("off-boundary evaluation refuses boundary targets") {
  const auto d = south_cap(32);
  std::vector<double> sigma(32, 1.0);
  std::vector<Complex> t{d->curves[0].nodes[3]};
  CHECK_THROWS_AS(dlp_apply_direct(*d, sigma, t), Error);
  std::vector<double> wrong(5, 1.0);
  CHECK_THROWS_AS(dlp_apply_on_boundary(*d, wrong), Error);
}
