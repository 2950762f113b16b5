#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "lbsolve/fmm.hpp"
#include "lbsolve/geometry.hpp"

namespace lbs {

enum class ApplyMode { direct, fmm };

struct AssemblyOptions {
  ApplyMode mode = ApplyMode::fmm;
  FmmOptions fmm;
};

// Nystrom system for the augmented double-layer formulation. Unknowns are
// the densities on all nodes followed by one source strength per island:
//   sigma_i + 2 h sum_j K_ij sigma_j + sum_k E_ik A_k = 2 g_i
//   sum_{j in C_k} sigma_j = 0   (k >= 2),   sum_k A_k = 0
class DiscreteSystem {
 public:
  DiscreteSystem(std::shared_ptr<const IslandDomain> domain, std::span<const double> g,
                 const AssemblyOptions& options = {});

  const IslandDomain& domain() const { return *domain_; }
  std::shared_ptr<const IslandDomain> domain_ptr() const { return domain_; }
  const NodeSet& nodes() const { return nodes_; }
  const AssemblyOptions& options() const { return options_; }

  std::size_t dim() const { return n_ + m_; }
  std::size_t densities() const { return n_; }
  std::size_t islands() const { return m_; }

  const Eigen::VectorXd& rhs() const { return rhs_; }
  const Eigen::MatrixXd& E() const { return E_; }
  Eigen::MatrixXd F() const;
  Eigen::MatrixXd D() const;

  Eigen::VectorXd apply_F(const Eigen::Ref<const Eigen::VectorXd>& sigma) const;
  // sum_j w_j K_ij sigma_j over all nodes, w the trapezoid weights.
  Eigen::VectorXd apply_kernel(const Eigen::Ref<const Eigen::VectorXd>& sigma) const;

 private:
  std::shared_ptr<const IslandDomain> domain_;
  AssemblyOptions options_;
  NodeSet nodes_;
  std::size_t n_ = 0, m_ = 0;
  Eigen::VectorXd rhs_;
  Eigen::MatrixXd E_;
  Eigen::VectorXd diag_;  // Cauchy diagonal limit times weight
  Eigen::VectorXd corr_;  // correction density times weight
  std::unique_ptr<CauchyFmm> fmm_;
};

// Full operator of the augmented system.
Eigen::VectorXd apply_operator(const DiscreteSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& v);

// Dense matrix of w_j K_ij (no identity, no factor 2).
Eigen::MatrixXd kernel_matrix(const IslandDomain& domain);
// Density block I + 2 h K without the augmentation.
Eigen::MatrixXd unaugmented_matrix(const IslandDomain& domain);

// Values of the double-layer potential of the indicator density of curve k:
// inside its bounded plane region, principal value on it, outside it.
struct IdentityValues {
  double inside = 0.0;
  double boundary = 0.0;
  double outside = 0.0;
  double correction = 0.0;  // D_k
  double domain_side = 0.0; // limit of the potential from the domain
};

IdentityValues identity_values(const IslandDomain& domain, std::size_t k);

// Density of the i-th null vector of the unaugmented operator (i >= 1).
Eigen::VectorXd homogeneous_density(const IslandDomain& domain, std::size_t i);
// max|(sigma/2 + PV) sigma~_i| / max|sigma~_i|.
double homogeneous_residual(const IslandDomain& domain, std::size_t i);

}  // namespace lbs
