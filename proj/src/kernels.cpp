#include "lbsolve/kernels.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "lbsolve/error.hpp"
#include "lbsolve/parallel.hpp"

namespace lbs {

namespace {

constexpr double kInv2Pi = 1.0 / kTwoPi;
constexpr double kInv4Pi = 1.0 / (2.0 * kTwoPi);

}  // namespace

double green_sphere(const SpherePoint& x, const SpherePoint& y) {
  const double d = (x.vec() - y.vec()).norm();
  if (d == 0.0) throw Error(ErrorCode::CoincidentPoints, "Green's function at coincident points");
  return -kInv2Pi * std::log(d) + kInv4Pi * std::log(2.0);
}

double green_plane(Complex xi, Complex eta) {
  const double d2 = std::norm(xi - eta);
  if (d2 == 0.0) throw Error(ErrorCode::CoincidentPoints, "Green's function at coincident points");
  return -kInv4Pi * std::log(2.0 * d2 / ((1.0 + std::norm(xi)) * (1.0 + std::norm(eta))));
}

double correction_density(Complex xi, Complex dxi) {
  return std::imag(std::conj(xi) * dxi) / (1.0 + std::norm(xi));
}

double dlp_kernel(Complex target, Complex source, Complex d_source) {
  if (target == source) throw Error(ErrorCode::CoincidentPoints, "kernel at coincident points");
  return kInv2Pi * (KernelConvention::sign_cauchy * std::imag(d_source / (target - source)) -
                    KernelConvention::sign_correction * correction_density(source, d_source));
}

double dlp_kernel_diag(Complex node, Complex d_node, double curvature) {
  return kInv2Pi * (KernelConvention::diag_curv_coeff * curvature * std::abs(d_node) -
                    KernelConvention::sign_correction * correction_density(node, d_node));
}

double dlp_kernel_sphere_oracle(const Vec3& target, const Vec3& source, const Vec3& d_source) {
  const Vec3 r = target - source;
  const double r2 = r.squaredNorm();
  if (r2 == 0.0) throw Error(ErrorCode::CoincidentPoints, "kernel at coincident points");
  return kInv2Pi * r.dot(source.cross(d_source)) / r2;
}

std::vector<double> dlp_apply_direct(const IslandDomain& domain, std::span<const double> sigma,
                                     std::span<const Complex> targets) {
  const NodeSet nodes = flatten(domain);
  if (sigma.size() != nodes.size()) throw Error(ErrorCode::DimensionMismatch, "density length mismatch");
  std::vector<double> out(targets.size(), 0.0);
  parallel_for(targets.size(), [&](std::size_t t) {
    const Complex x = targets[t];
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (std::abs(x - nodes.z[j]) < 1e-10)
        throw Error(ErrorCode::TargetOnBoundary, "target lies on a boundary node");
      s += nodes.weight[j] * sigma[j] * dlp_kernel(x, nodes.z[j], nodes.dz[j]);
    }
    out[t] = s;
  });
  return out;
}

std::vector<double> dlp_apply_on_boundary(const IslandDomain& domain, std::span<const double> sigma) {
  const NodeSet nodes = flatten(domain);
  if (sigma.size() != nodes.size()) throw Error(ErrorCode::DimensionMismatch, "density length mismatch");
  std::vector<double> out(nodes.size(), 0.0);
  parallel_for(nodes.size(), [&](std::size_t i) {
    double s = 0.5 * sigma[i];
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double k = i == j ? dlp_kernel_diag(nodes.z[i], nodes.dz[i], nodes.kappa[i])
                              : dlp_kernel(nodes.z[i], nodes.z[j], nodes.dz[j]);
      s += nodes.weight[j] * sigma[j] * k;
    }
    out[i] = s;
  });
  return out;
}

}  // namespace lbs
