#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lbsolve/geometry.hpp"
#include "lbsolve/types.hpp"

namespace lbs {

// Double-layer kernel per unit parameter, written as
//   (1/2pi) [ sign_cauchy * Im(dxi'/(xi - xi')) - sign_correction * Im(conj(xi') dxi'/(1+|xi'|^2)) ]
// with the diagonal Cauchy limit diag_curv_coeff * kappa |dxi|.
struct KernelConvention {
  static constexpr double sign_cauchy = 1.0;
  static constexpr double sign_correction = -1.0;
  static constexpr double diag_curv_coeff = -0.5;
};

// Laplace-Beltrami Green's function on S^2 (zero mean).
double green_sphere(const SpherePoint& x, const SpherePoint& y);
// The same function in stereographic coordinates.
double green_plane(Complex xi, Complex eta);

// Im(conj(xi) dxi / (1 + |xi|^2)): the target-independent part of the kernel.
double correction_density(Complex xi, Complex dxi);

double dlp_kernel(Complex target, Complex source, Complex d_source);
double dlp_kernel_diag(Complex node, Complex d_node, double curvature);

// Same kernel evaluated in R^3: (1/2pi) (x - x').(x' x t') / |x - x'|^2,
// with t' = dx'/dalpha; x' x t' is the normal pointing away from the island.
double dlp_kernel_sphere_oracle(const Vec3& target, const Vec3& source, const Vec3& d_source);

// Trapezoid-rule double-layer potential at targets off the boundary.
// Throws TargetOnBoundary within 1e-10 of a node.
std::vector<double> dlp_apply_direct(const IslandDomain& domain, std::span<const double> sigma,
                                     std::span<const Complex> targets);

// Limit from the domain side at every node: sigma/2 + principal value.
std::vector<double> dlp_apply_on_boundary(const IslandDomain& domain,
                                          std::span<const double> sigma);

}  // namespace lbs
