#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "gpcqp/qp.hpp"

namespace gpcqp {

/// Solution blocks of the 3x3 Newton system.
struct Direction {
  VectorXd dx;
  VectorXd dy;
  VectorXd dlambda;
};

/// Cholesky factorization of the condensed Newton matrix
///
///   M = G + A' diag(lambda/y) A
///
/// for one iterate. The full system
///
///   [ G  0   -A' ] [dx]   [r1]
///   [ A  -I   0  ] [dy] = [r2]
///   [ 0  Lam  Y  ] [dl]   [r3]
///
/// is solved by eliminating dlambda = Y^-1 (r3 - Lam dy) and dy = A dx - r2,
/// which leaves an n x n SPD solve. One factorization serves both the
/// predictor and corrector right-hand sides of an iteration.
class NewtonFactorization {
public:
  /// Factors the condensed matrix. If the Cholesky factorization fails,
  /// retries with +delta*I for delta in {1e-12, 1e-10, 1e-8}; returns
  /// nullopt if all attempts fail.
  static std::optional<NewtonFactorization> factor(const QpProblem& p,
                                                   const IterPoint& z) {
    if (z.x.size() != p.n() || z.y.size() != p.m() || z.lambda.size() != p.m())
      throw std::invalid_argument("NewtonFactorization: dimension mismatch");
    NewtonFactorization f;
    f.n_ = p.n();
    f.m_ = p.m();
    f.A_ = p.A();
    f.y_ = z.y;
    f.lambda_ = z.lambda;
    f.scaling_ = z.lambda.cwiseQuotient(z.y);
    f.condensed_ = p.G() + p.A().transpose() * f.scaling_.asDiagonal() * p.A();

    for (double delta : {0.0, 1e-12, 1e-10, 1e-8}) {
      MatrixXd M = f.condensed_;
      if (delta > 0.0) M.diagonal().array() += delta;
      f.llt_.compute(M);
      if (f.llt_.info() == Eigen::Success && M.allFinite()) {
        f.delta_ = delta;
        return f;
      }
    }
    return std::nullopt;
  }

  /// Solves the full block system for the given right-hand side.
  Direction solve(const VectorXd& r1, const VectorXd& r2,
                  const VectorXd& r3) const {
    if (r1.size() != n_ || r2.size() != m_ || r3.size() != m_)
      throw std::invalid_argument("NewtonFactorization::solve: rhs dimension mismatch");
    // rhs_x = r1 + A' Y^-1 (r3 + Lam r2)
    const VectorXd w = (r3 + lambda_.cwiseProduct(r2)).cwiseQuotient(y_);
    Direction d;
    d.dx = llt_.solve(r1 + A_.transpose() * w);
    d.dy = A_ * d.dx - r2;
    d.dlambda = (r3 - lambda_.cwiseProduct(d.dy)).cwiseQuotient(y_);
    return d;
  }

  const MatrixXd& condensed_matrix() const { return condensed_; }
  double regularization() const { return delta_; }

private:
  NewtonFactorization() = default;

  Eigen::Index n_ = 0, m_ = 0;
  MatrixXd A_;
  VectorXd y_, lambda_, scaling_;
  MatrixXd condensed_;
  Eigen::LLT<MatrixXd> llt_;
  double delta_ = 0.0;
};

/// Largest alpha in (0,1] with y + alpha*dy >= 0 and lambda + alpha*dl >= 0,
/// by the exact ratio test over the negative components.
inline double max_step_nonneg(const VectorXd& y, const VectorXd& lambda,
                              const VectorXd& dy, const VectorXd& dlambda) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (dy[i] < 0.0) alpha = std::min(alpha, -y[i] / dy[i]);
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (dlambda[i] < 0.0) alpha = std::min(alpha, -lambda[i] / dlambda[i]);
  return alpha;
}

/// min(alpha_tau_pri, alpha_tau_dual): largest alpha in (0,1] with
/// y + alpha*dy >= (1-tau)y and lambda + alpha*dl >= (1-tau)lambda.
inline double fraction_to_boundary(const VectorXd& y, const VectorXd& lambda,
                                   const VectorXd& dy, const VectorXd& dlambda,
                                   double tau) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (dy[i] < 0.0) alpha = std::min(alpha, -tau * y[i] / dy[i]);
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (dlambda[i] < 0.0) alpha = std::min(alpha, -tau * lambda[i] / dlambda[i]);
  return alpha;
}

}  // namespace gpcqp
