#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lbsolve/types.hpp"

namespace lbs {

// Stereographic projection from the north pole (0,0,1) onto the equatorial
// plane. Throws NorthPoleSingular within 1e-13 of the pole.
Complex stereo_project(const SpherePoint& x);
SpherePoint stereo_inverse(Complex xi);

// Push-forward of a plane velocity dxi at xi to the tangent space of S^2.
Vec3 stereo_pushforward(Complex xi, Complex dxi);

// Rotation taking `pole` to the north pole; used to re-centre input data.
Eigen::Matrix3d rotation_to_north(const SpherePoint& pole);

enum class Orientation { positive, negative };

// Closed curve in the stereographic plane sampled at N equispaced parameter
// values alpha_j = 2 pi j / N.
struct BoundaryCurve {
  std::vector<Complex> nodes;
  std::vector<Complex> d_nodes;    // d xi / d alpha
  std::vector<double> curvatures;  // signed plane curvature, > 0 when CCW
  Orientation orientation = Orientation::positive;

  std::size_t size() const { return nodes.size(); }
  double mesh_width() const { return kTwoPi / static_cast<double>(nodes.size()); }
  double signed_area() const;
  BoundaryCurve reversed() const;
};

// Builds a curve from samples; orientation is taken from the signed area.
BoundaryCurve make_curve(std::vector<Complex> nodes, std::vector<Complex> d_nodes,
                         std::vector<double> curvatures);

// Boundary of the spherical cap {x : angle(x, center) < radius}, sampled
// equispaced in the cap angle. The island is the cap itself, so the plane
// curve is clockwise when the cap covers the north pole.
BoundaryCurve make_cap_circle(const SpherePoint& center, double radius, std::size_t n);

// Plane ellipse, counterclockwise unless `exterior` (island outside it).
BoundaryCurve make_plane_ellipse(Complex center, double a, double b, double rotation,
                                 std::size_t n, bool exterior = false);

// Curve on S^2 whose gnomonic image about `center` is an ellipse with
// angular semi-axes a, b. Same orientation rule as make_cap_circle.
BoundaryCurve make_sphere_ellipse(const SpherePoint& center, double a, double b,
                                  double rotation, std::size_t n);

// Resamples a closed polygon (first vertex not repeated) to n nodes after
// truncating its arclength Fourier series to the lowest ceil(2n/3) modes.
BoundaryCurve resample_polyline(std::span<const Complex> vertices, std::size_t n);
BoundaryCurve resample_polyline(std::span<const SpherePoint> vertices, std::size_t n);

struct CurveDerivatives {
  std::vector<Complex> d_nodes;
  std::vector<double> curvatures;
};

// Spectral first and second derivatives of periodic samples (n even).
CurveDerivatives curve_derivatives(std::span<const Complex> nodes);

// Multiply-connected domain on S^2: the complement of M islands. Curve k
// bounds island k; when north_pole_island is set, curves[0] bounds the
// island containing the north pole and its plane interior is the domain.
struct IslandDomain {
  std::vector<BoundaryCurve> curves;
  std::vector<Complex> anchors;
  bool north_pole_island = true;

  std::size_t islands() const { return curves.size(); }
  std::size_t total_nodes() const;
  std::size_t offset(std::size_t k) const;
  bool is_outer(std::size_t k) const { return north_pole_island && k == 0; }
};

// Orients curves (north-pole curve clockwise, others counterclockwise),
// checks disjointness, nesting and anchors. Throws on violation.
IslandDomain orient_and_validate(IslandDomain domain);

// Flattened node data of a domain, in curve order.
struct NodeSet {
  std::vector<Complex> z;
  std::vector<Complex> dz;
  std::vector<double> kappa;
  std::vector<double> weight;  // trapezoid weight h_k of the owning curve
  std::vector<std::size_t> curve;
  std::vector<std::size_t> offsets;  // size M + 1

  std::size_t size() const { return z.size(); }
};

NodeSet flatten(const IslandDomain& domain);

// Winding number of the node polygon of `curve` about p.
int winding_number(const BoundaryCurve& curve, Complex p);

// Index of the island containing p, or nullopt when p lies in the domain.
std::optional<std::size_t> island_containing(const IslandDomain& domain, Complex p);

// A point well inside the bounded plane region of the curve.
Complex interior_point(const BoundaryCurve& curve);

// Plane image of the spherical centroid of the island bounded by `curve`.
// Falls back to interior_point / a far exterior point when the centroid is
// not a valid anchor.
Complex default_anchor(const BoundaryCurve& curve, bool outer);

double geodesic_distance(Complex a, Complex b);

}  // namespace lbs
