#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace lbs {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Point on the unit sphere S^2 in R^3.
struct SpherePoint {
  double x1 = 0.0, x2 = 0.0, x3 = 1.0;

  SpherePoint() = default;
  SpherePoint(double a, double b, double c) : x1(a), x2(b), x3(c) {}
  explicit SpherePoint(const Vec3& v) : x1(v[0]), x2(v[1]), x3(v[2]) {}

  Vec3 vec() const { return {x1, x2, x3}; }
};

}  // namespace lbs
