#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Geometry>

#include "lbsolve/geometry.hpp"
#include "lbsolve/spectral.hpp"

namespace fixtures {

using namespace lbs;

inline SpherePoint spherical(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline std::shared_ptr<const IslandDomain> make(std::vector<BoundaryCurve> curves, bool north) {
  IslandDomain d;
  d.curves = std::move(curves);
  d.north_pole_island = north;
  return std::make_shared<const IslandDomain>(orient_and_validate(std::move(d)));
}

inline std::shared_ptr<const IslandDomain> equator(std::size_t n) {
  return make({make_cap_circle(SpherePoint(0, 0, -1), 0.5 * kPi, n)}, false);
}

inline std::shared_ptr<const IslandDomain> south_cap(std::size_t n) {
  return make({make_cap_circle(SpherePoint(0, 0, -1), 0.7, n)}, false);
}

inline std::shared_ptr<const IslandDomain> north_cap(std::size_t n) {
  return make({make_cap_circle(SpherePoint(0, 0, 1), 1.0, n)}, true);
}

inline std::shared_ptr<const IslandDomain> plane_ellipse(std::size_t n) {
  return make({make_plane_ellipse({0.0, 0.0}, 2.0, 1.0, 0.0, n)}, false);
}

inline std::vector<Complex> gon(std::size_t sides, double radius, Complex centre) {
  std::vector<Complex> v;
  for (std::size_t i = 0; i < sides; ++i) v.push_back(centre + std::polar(radius, kTwoPi * static_cast<double>(i) / static_cast<double>(sides)));
  return v;
}

inline std::shared_ptr<const IslandDomain> polygon(std::size_t n) {
  const auto v = gon(64, 0.8, {0.2, -0.1});
  return make({resample_polyline(std::span<const Complex>(v), n)}, false);
}

// Outer cap around the north pole, a sphere ellipse and a resampled polygon.
inline std::shared_ptr<const IslandDomain> mix(std::size_t n) {
  std::vector<SpherePoint> v;
  const Vec3 c = spherical(1.8, 2.8).vec();
  const Vec3 e1 = c.cross(Vec3(0, 0, 1)).normalized(), e2 = c.cross(e1);
  for (int i = 0; i < 48; ++i) {
    const double t = kTwoPi * i / 48.0;
    v.emplace_back((c + 0.35 * (std::cos(t) * e1 + std::sin(t) * e2)).normalized());
  }
  return make({make_cap_circle(spherical(0.2, 0.0), 0.7, n), make_sphere_ellipse(spherical(2.3, 0.4), 0.45, 0.25, 0.6, n),
               resample_polyline(std::span<const SpherePoint>(v), n)},
              true);
}

// Three caps; the first covers the north pole.
inline std::shared_ptr<const IslandDomain> three_caps(std::size_t n) {
  return make({make_cap_circle(spherical(0.3, 0.0), 0.6, n), make_cap_circle(spherical(2.2, 0.5), 0.5, n),
               make_cap_circle(spherical(1.9, 3.0), 0.4, n)},
              true);
}

// Four islands for operator comparisons.
inline std::shared_ptr<const IslandDomain> four(std::size_t n) {
  return make({make_cap_circle(spherical(0.1, 0.0), 0.5, n), make_cap_circle(spherical(2.4, 0.5), 0.4, n),
               make_cap_circle(spherical(1.7, 2.5), 0.35, n), make_sphere_ellipse(spherical(1.4, -1.2), 0.4, 0.2, 0.3, n)},
              true);
}

// Sphere-space oracle for the diagonal: the limit of the R^3 kernel as the
// target approaches the source along the curve.
inline double diag_oracle(const Vec3& x, const Vec3& xa, const Vec3& xaa) {
  return xa.dot(xaa.cross(x)) / (2.0 * kTwoPi * xa.squaredNorm());
}

// Sphere points of a curve and their parameter derivatives, by the chain
// rule through x = (2 xi, |xi|^2 - 1) / (1 + |xi|^2).
struct SphereSamples {
  std::vector<Vec3> x, xa, xaa;
};

inline SphereSamples sphere_samples(const BoundaryCurve& c) {
  const auto d2 = spectral_derivative(c.d_nodes, 1);
  SphereSamples s;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const Complex z = c.nodes[j], z1 = c.d_nodes[j], z2 = d2[j];
    const double r = std::norm(z), w = 1.0 + r;
    const double r1 = 2.0 * std::real(std::conj(z) * z1);
    const double r2 = 2.0 * std::real(std::conj(z) * z2) + 2.0 * std::norm(z1);
    const Complex p = 2.0 * z / w;
    const Complex p1 = 2.0 * z1 / w - 2.0 * z * r1 / (w * w);
    const Complex p2 = 2.0 * z2 / w - 4.0 * z1 * r1 / (w * w) - 2.0 * z * r2 / (w * w) + 4.0 * z * r1 * r1 / (w * w * w);
    s.x.emplace_back(p.real(), p.imag(), 1.0 - 2.0 / w);
    s.xa.emplace_back(p1.real(), p1.imag(), 2.0 * r1 / (w * w));
    s.xaa.emplace_back(p2.real(), p2.imag(), 2.0 * r2 / (w * w) - 4.0 * r1 * r1 / (w * w * w));
  }
  return s;
}

}  // namespace fixtures
