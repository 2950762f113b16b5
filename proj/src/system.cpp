#include "lbsolve/system.hpp"

#include <cmath>

#include "lbsolve/error.hpp"
#include "lbsolve/kernels.hpp"
#include "lbsolve/parallel.hpp"

namespace lbs {

namespace {

constexpr double kInv2Pi = 1.0 / kTwoPi;

}  // namespace

DiscreteSystem::DiscreteSystem(std::shared_ptr<const IslandDomain> domain, std::span<const double> g,
                               const AssemblyOptions& options)
    : domain_(std::move(domain)), options_(options), nodes_(flatten(*domain_)) {
  n_ = nodes_.size();
  m_ = domain_->islands();
  if (g.size() != n_) throw Error(ErrorCode::DimensionMismatch, "boundary data length differs from node count");
  rhs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_ + m_));
  for (std::size_t i = 0; i < n_; ++i) rhs_[static_cast<Eigen::Index>(i)] = 2.0 * g[i];

  E_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(m_));
  parallel_for(n_, [&](std::size_t i) {
    for (std::size_t k = 0; k < m_; ++k)
      E_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = 2.0 * green_plane(nodes_.z[i], domain_->anchors[k]);
  });

  diag_.resize(static_cast<Eigen::Index>(n_));
  corr_.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    diag_[ii] = nodes_.weight[i] * KernelConvention::diag_curv_coeff * nodes_.kappa[i] * std::abs(nodes_.dz[i]);
    corr_[ii] = nodes_.weight[i] * correction_density(nodes_.z[i], nodes_.dz[i]);
  }
  if (options_.mode == ApplyMode::fmm) fmm_ = std::make_unique<CauchyFmm>(nodes_.z, options_.fmm);
}

Eigen::MatrixXd DiscreteSystem::F() const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    if (nodes_.curve[i] > 0) f(static_cast<Eigen::Index>(nodes_.curve[i]), static_cast<Eigen::Index>(i)) = 1.0;
  return f;
}

Eigen::MatrixXd DiscreteSystem::D() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
  d.row(0).setOnes();
  return d;
}

Eigen::VectorXd DiscreteSystem::apply_F(const Eigen::Ref<const Eigen::VectorXd>& sigma) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
  for (std::size_t k = 1; k < m_; ++k) {
    const auto b = static_cast<Eigen::Index>(nodes_.offsets[k]);
    const auto e = static_cast<Eigen::Index>(nodes_.offsets[k + 1]);
    out[static_cast<Eigen::Index>(k)] = sigma.segment(b, e - b).sum();
  }
  return out;
}

Eigen::VectorXd DiscreteSystem::apply_kernel(const Eigen::Ref<const Eigen::VectorXd>& sigma) const {
  if (static_cast<std::size_t>(sigma.size()) != n_) throw Error(ErrorCode::DimensionMismatch, "density length mismatch");
  const double total = -KernelConvention::sign_correction * corr_.dot(sigma);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_));
  if (options_.mode == ApplyMode::fmm) {
    std::vector<Complex> q(n_);
    for (std::size_t j = 0; j < n_; ++j) q[j] = nodes_.weight[j] * sigma[static_cast<Eigen::Index>(j)] * nodes_.dz[j];
    const auto u = fmm_->evaluate(q);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out[ii] = kInv2Pi * (KernelConvention::sign_cauchy * u[i].imag() + diag_[ii] * sigma[ii] + total);
    }
    return out;
  }
  parallel_for(n_, [&](std::size_t i) {
    const Complex z = nodes_.z[i];
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      s += nodes_.weight[j] * sigma[static_cast<Eigen::Index>(j)] * std::imag(nodes_.dz[j] / (z - nodes_.z[j]));
    }
    const auto ii = static_cast<Eigen::Index>(i);
    out[ii] = kInv2Pi * (KernelConvention::sign_cauchy * s + diag_[ii] * sigma[ii] + total);
  });
  return out;
}

Eigen::VectorXd apply_operator(const DiscreteSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (static_cast<std::size_t>(v.size()) != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  const auto n = static_cast<Eigen::Index>(sys.densities());
  const auto m = static_cast<Eigen::Index>(sys.islands());
  const auto sigma = v.head(n);
  const auto a = v.tail(m);
  Eigen::VectorXd out(n + m);
  out.head(n) = sigma + 2.0 * sys.apply_kernel(sigma) + sys.E() * a;
  out.tail(m) = sys.apply_F(sigma);
  out[n] += a.sum();
  return out;
}

Eigen::MatrixXd kernel_matrix(const IslandDomain& domain) {
  const NodeSet nodes = flatten(domain);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd k(n, n);
  parallel_for(nodes.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double v = i == j ? dlp_kernel_diag(nodes.z[i], nodes.dz[i], nodes.kappa[i])
                              : dlp_kernel(nodes.z[i], nodes.z[j], nodes.dz[j]);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = nodes.weight[j] * v;
    }
  });
  return k;
}

Eigen::MatrixXd unaugmented_matrix(const IslandDomain& domain) {
  Eigen::MatrixXd a = 2.0 * kernel_matrix(domain);
  a.diagonal().array() += 1.0;
  return a;
}

IdentityValues identity_values(const IslandDomain& domain, std::size_t k) {
  if (k >= domain.islands()) throw Error(ErrorCode::InvalidArgument, "curve index out of range");
  const auto& curve = domain.curves[k];
  std::vector<double> zeta(domain.total_nodes(), 0.0);
  const std::size_t off = domain.offset(k);
  for (std::size_t j = 0; j < curve.size(); ++j) zeta[off + j] = 1.0;

  IdentityValues v;
  double corr = 0.0;
  for (std::size_t j = 0; j < curve.size(); ++j) corr += correction_density(curve.nodes[j], curve.d_nodes[j]);
  v.correction = -KernelConvention::sign_correction * kInv2Pi * curve.mesh_width() * corr;

  const Complex inside = interior_point(curve);
  double radius = 0.0;
  for (auto z : curve.nodes) radius = std::max(radius, std::abs(z - inside));
  const Complex outside = inside + 3.0 * radius;
  const std::vector<Complex> probes{inside, outside};
  const auto vals = dlp_apply_direct(domain, zeta, probes);
  v.inside = vals[0];
  v.outside = vals[1];
  v.boundary = dlp_apply_on_boundary(domain, zeta)[off] - 0.5;
  v.domain_side = domain.is_outer(k) ? v.inside : v.outside;
  return v;
}

Eigen::VectorXd homogeneous_density(const IslandDomain& domain, std::size_t i) {
  if (domain.islands() < 2 || i == 0 || i >= domain.islands())
    throw Error(ErrorCode::InvalidArgument, "homogeneous solutions exist for islands 1..M-1");
  auto lambda = [&](std::size_t k) {
    const auto v = identity_values(domain, k);
    return v.correction + (domain.is_outer(k) ? 1.0 : 0.0);
  };
  const double ratio = lambda(0) / lambda(i);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.total_nodes()));
  s.segment(0, static_cast<Eigen::Index>(domain.curves[0].size())).setOnes();
  s.segment(static_cast<Eigen::Index>(domain.offset(i)), static_cast<Eigen::Index>(domain.curves[i].size()))
      .setConstant(-ratio);
  return s;
}

double homogeneous_residual(const IslandDomain& domain, std::size_t i) {
  const Eigen::VectorXd s = homogeneous_density(domain, i);
  const auto r = dlp_apply_on_boundary(domain, std::span<const double>(s.data(), static_cast<std::size_t>(s.size())));
  double rmax = 0.0;
  for (double x : r) rmax = std::max(rmax, std::abs(x));
  return rmax / s.cwiseAbs().maxCoeff();
}

}  // namespace lbs
