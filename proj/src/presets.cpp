#include "lbsolve/presets.hpp"

#include <cmath>
#include <random>

#include <Eigen/Geometry>

namespace lbs {

namespace {

struct EllipseSpec {
  double x, y, a, b, rotation;
};

constexpr EllipseSpec kInner[] = {
    {-2.0, -1.1, 0.3012, 0.2260, 0.4325}, {-2.0, 0.0, 0.3449, 0.1749, 1.2700},
    {-2.0, 1.1, 0.3328, 0.1827, 1.6488},  {-1.0, -1.1, 0.2528, 0.2103, 1.6144},
    {-1.0, 0.0, 0.2830, 0.2131, 0.9096},  {-1.0, 1.1, 0.2953, 0.1607, 1.2093},
    {0.0, -1.1, 0.2703, 0.1710, 2.2511},  {0.0, 0.0, 0.2780, 0.1888, 2.9422},
    {0.0, 1.1, 0.3462, 0.2080, 1.6237},   {1.0, -1.1, 0.2777, 0.1629, 2.9098},
    {1.0, 0.0, 0.3016, 0.1593, 1.8705},   {1.0, 1.1, 0.3277, 0.1990, 2.7519},
    {2.0, -1.1, 0.2540, 0.1923, 1.3780},  {2.0, 0.0, 0.2562, 0.2013, 2.5579},
};

}  // namespace

std::shared_ptr<const IslandDomain> ellipse_field(std::size_t n) {
  IslandDomain d;
  d.curves.push_back(make_plane_ellipse({0.1, 0.05}, 4.0, 3.0, 0.1, n, true));
  d.anchors.push_back({6.0, 0.0});
  for (const auto& e : kInner) {
    d.curves.push_back(make_plane_ellipse({e.x, e.y}, e.a, e.b, e.rotation, n));
    d.anchors.push_back({e.x, e.y});
  }
  return std::make_shared<const IslandDomain>(orient_and_validate(std::move(d)));
}

std::shared_ptr<const IslandDomain> ellipse_array(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> centres;
  for (std::size_t i = 0; i < m; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(m);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    centres.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  const Eigen::Matrix3d rot = rotation_to_north(SpherePoint(centres[0]));
  const double spacing = std::sqrt(4.0 * kPi / static_cast<double>(m));
  IslandDomain d;
  for (std::size_t i = 0; i < m; ++i) {
    Vec3 c = rot * centres[i];
    if (i == 0) c = Vec3(0, 0, 1);
    const double a = spacing * (0.18 + 0.12 * unit(rng));
    const double b = a * (0.4 + 0.6 * unit(rng));
    const double turn = kPi * unit(rng);
    d.curves.push_back(make_sphere_ellipse(SpherePoint(c), a, b, turn, n));
  }
  d.north_pole_island = true;
  return std::make_shared<const IslandDomain>(orient_and_validate(std::move(d)));
}

}  // namespace lbs
