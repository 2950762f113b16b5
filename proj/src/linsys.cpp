#include "lbsolve/linsys.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "lbsolve/error.hpp"

namespace lbs {

GmresResult gmres(const LinearOperator& apply, const LinearOperator& precond, const Eigen::VectorXd& rhs,
                  const GmresConfig& config) {
  if (config.restart < 1 || config.max_iters < 0 || !(config.tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "invalid GMRES configuration");
  auto pre = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return precond ? precond(v) : v; };
  const Eigen::Index n = rhs.size();
  const auto m = static_cast<Eigen::Index>(config.restart);

  GmresResult res;
  res.solution = Eigen::VectorXd::Zero(n);
  const double beta0 = pre(rhs).norm();
  if (beta0 == 0.0) {
    res.converged = true;
    return res;
  }

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);
  Eigen::VectorXd& x = res.solution;

  for (;;) {
    const Eigen::VectorXd r = pre(rhs - apply(x));
    const double beta = r.norm();
    if (beta / beta0 <= config.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= config.max_iters) break;

    V.col(0) = r / beta;
    H.setZero();
    g.setZero();
    g[0] = beta;
    Eigen::Index k = 0;
    while (k < m && res.iterations < config.max_iters) {
      Eigen::VectorXd w = pre(apply(V.col(k)));
      ++res.iterations;
      // classical Gram-Schmidt, applied twice
      Eigen::VectorXd h = V.leftCols(k + 1).transpose() * w;
      w.noalias() -= V.leftCols(k + 1) * h;
      const Eigen::VectorXd h2 = V.leftCols(k + 1).transpose() * w;
      w.noalias() -= V.leftCols(k + 1) * h2;
      h += h2;
      const double hn = w.norm();
      H.col(k).head(k + 1) = h;
      H(k + 1, k) = hn;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      const double rel = std::abs(g[k + 1]) / beta0;
      res.residual_history.push_back(rel);
      ++k;
      if (hn <= 1e-14 * beta || rel <= config.tol) break;
      V.col(k) = w / hn;
    }
    const Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x.noalias() += V.leftCols(k) * y;
  }
  return res;
}

SchurPreconditioner::SchurPreconditioner(const DiscreteSystem& sys) : sys_(&sys) {
  const Eigen::MatrixXd FE = [&] {
    Eigen::MatrixXd fe = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.islands()),
                                               static_cast<Eigen::Index>(sys.islands()));
    for (Eigen::Index c = 0; c < fe.cols(); ++c) fe.col(c) = sys.apply_F(sys.E().col(c));
    return fe;
  }();
  S_ = sys.D() - FE;
  lu_.compute(S_);
  if (!(lu_.rcond() > 1e-14)) throw Error(ErrorCode::SingularSchur, "Schur complement is singular");
}

Eigen::VectorXd SchurPreconditioner::apply(const Eigen::VectorXd& r) const {
  const auto n = static_cast<Eigen::Index>(sys_->densities());
  const auto m = static_cast<Eigen::Index>(sys_->islands());
  if (r.size() != n + m) throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  Eigen::VectorXd z(n + m);
  const Eigen::VectorXd za = lu_.solve(r.tail(m) - sys_->apply_F(r.head(n)));
  z.head(n) = r.head(n) - sys_->E() * za;
  z.tail(m) = za;
  return z;
}

SchurPreconditioner build_preconditioner(const DiscreteSystem& sys) { return SchurPreconditioner(sys); }

Eigen::VectorXd apply_preconditioner(const SchurPreconditioner& p, const Eigen::VectorXd& r) {
  return p.apply(r);
}

Eigen::MatrixXd dense_materialize(const DiscreteSystem& sys) {
  if (sys.dim() > 6000) throw Error(ErrorCode::TooLarge, "system too large to materialise");
  const auto n = static_cast<Eigen::Index>(sys.densities());
  const auto m = static_cast<Eigen::Index>(sys.islands());
  Eigen::MatrixXd A(n + m, n + m);
  A.topLeftCorner(n, n) = unaugmented_matrix(sys.domain());
  A.topRightCorner(n, m) = sys.E();
  A.bottomLeftCorner(m, n) = sys.F();
  A.bottomRightCorner(m, m) = sys.D();
  return A;
}

Eigen::MatrixXd preconditioned_matrix(const SchurPreconditioner& p, const Eigen::MatrixXd& A) {
  Eigen::MatrixXd B(A.rows(), A.cols());
  for (Eigen::Index c = 0; c < A.cols(); ++c) B.col(c) = p.apply(A.col(c));
  return B;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues();
}

double condition_number(const Eigen::MatrixXd& A) {
  const Eigen::VectorXd s = singular_values(A);
  const double smin = s[s.size() - 1];
  if (!(smin > 1e-300)) throw Error(ErrorCode::SingularMatrix, "matrix is numerically singular");
  return s[0] / smin;
}

}  // namespace lbs
