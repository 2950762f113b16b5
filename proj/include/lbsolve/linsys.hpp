#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lbsolve/system.hpp"

namespace lbs {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresConfig {
  double tol = 1e-11;
  int restart = 50;
  int max_iters = 2000;
};

struct GmresResult {
  Eigen::VectorXd solution;
  int iterations = 0;
  // Relative (preconditioned) residual after each iteration.
  std::vector<double> residual_history;
  bool converged = false;
};

// Restarted GMRES with left preconditioning (pass an empty preconditioner
// for none). Starts from zero. On failure returns the best iterate with
// converged = false.
GmresResult gmres(const LinearOperator& apply, const LinearOperator& precond,
                  const Eigen::VectorXd& rhs, const GmresConfig& config = {});

// Block lower-triangular preconditioner [[I, E], [F, D]] applied through
// the Schur complement S = D - F E.
class SchurPreconditioner {
 public:
  explicit SchurPreconditioner(const DiscreteSystem& sys);

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  const Eigen::MatrixXd& schur() const { return S_; }

 private:
  const DiscreteSystem* sys_;
  Eigen::MatrixXd S_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

SchurPreconditioner build_preconditioner(const DiscreteSystem& sys);
Eigen::VectorXd apply_preconditioner(const SchurPreconditioner& p, const Eigen::VectorXd& r);

// Dense copy of the system matrix; throws TooLarge above 6000 unknowns.
Eigen::MatrixXd dense_materialize(const DiscreteSystem& sys);
// P^{-1} A for a dense A.
Eigen::MatrixXd preconditioned_matrix(const SchurPreconditioner& p, const Eigen::MatrixXd& A);

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A);
// 2-norm condition number; throws SingularMatrix.
double condition_number(const Eigen::MatrixXd& A);

}  // namespace lbs
