#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace gpcqp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Convex quadratic program
///
///   minimize    1/2 x'Gx + x'c
///   subject to  Ax >= b
///
/// with G symmetric positive semidefinite (n x n) and A an m x n
/// constraint matrix. Construction symmetrizes G and rejects indefinite
/// cost matrices.
class QpProblem {
public:
  QpProblem(MatrixXd G, VectorXd c, MatrixXd A, VectorXd b)
      : G_(std::move(G)), c_(std::move(c)), A_(std::move(A)), b_(std::move(b)) {
    const auto n = G_.rows();
    const auto m = A_.rows();
    if (n < 1 || G_.cols() != n)
      throw std::invalid_argument("QpProblem: G must be square, n >= 1");
    if (c_.size() != n)
      throw std::invalid_argument("QpProblem: |c| != n");
    if (m < 1 || A_.cols() != n)
      throw std::invalid_argument("QpProblem: A must be m x n, m >= 1");
    if (b_.size() != m)
      throw std::invalid_argument("QpProblem: |b| != m");
    G_ = ((G_ + G_.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -kPsdTol)
      throw std::invalid_argument("QpProblem: G is not positive semidefinite");
  }

  Eigen::Index n() const { return G_.rows(); }
  Eigen::Index m() const { return A_.rows(); }

  const MatrixXd& G() const { return G_; }
  const VectorXd& c() const { return c_; }
  const MatrixXd& A() const { return A_; }
  const VectorXd& b() const { return b_; }

  double objective(const VectorXd& x) const {
    return 0.5 * x.dot(G_ * x) + c_.dot(x);
  }

  static constexpr double kPsdTol = 1e-10;

private:
  MatrixXd G_;
  VectorXd c_;
  MatrixXd A_;
  VectorXd b_;
};

/// Primal-dual iterate: primal x, slacks y and multipliers lambda for
/// Ax - y = b. Solvers keep y, lambda strictly positive while iterating;
/// the struct itself also represents boundary points (e.g. KKT points).
struct IterPoint {
  VectorXd x;
  VectorXd y;
  VectorXd lambda;

  bool strictly_positive() const {
    return y.size() > 0 && lambda.size() > 0 && y.minCoeff() > 0.0 &&
           lambda.minCoeff() > 0.0;
  }
};

/// Solver parameters shared by both interior-point algorithms.
struct SolverParams {
  double gamma = 0.1;            // centrality parameter, in (0, 1/4)
  double beta = 0.1;             // safeguard parameter, in [gamma, 1/4)
  double epsilon = 1e-8;         // stop when y'lambda < epsilon
  double tau_floor = 0.995;      // fraction-to-boundary floor (Mehrotra)
  int max_iter = 100;
  double neighborhood_tol = 1e-12;

  // tau_k = max(tau_floor, 1 - mu_k): approaches 1 as the gap vanishes.
  double tau_for(double mu) const {
    double tau = tau_floor > 1.0 - mu ? tau_floor : 1.0 - mu;
    return tau < 1.0 ? tau : 1.0 - 1e-12;
  }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 0.25))
      throw std::invalid_argument("SolverParams: gamma must be in (0, 1/4)");
    if (!(beta >= gamma && beta < 0.25))
      throw std::invalid_argument("SolverParams: beta must be in [gamma, 1/4)");
    if (!(epsilon > 0.0))
      throw std::invalid_argument("SolverParams: epsilon must be > 0");
    if (max_iter < 1)
      throw std::invalid_argument("SolverParams: max_iter must be >= 1");
    if (neighborhood_tol < 0.0)
      throw std::invalid_argument("SolverParams: neighborhood_tol must be >= 0");
  }
};

enum class SolveStatus { Converged, MaxIterations, NumericalFailure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

/// Per-iteration record of the Mehrotra baseline.
struct MehrotraState {
  double mu = 0.0;
  double mu_aff = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
};

/// Which corrector variant produced the accepted step.
enum class StepBranch { LargeStep, SmallStep, Safeguard };

inline std::string to_string(StepBranch b) {
  switch (b) {
    case StepBranch::LargeStep: return "LargeStep";
    case StepBranch::SmallStep: return "SmallStep";
    case StepBranch::Safeguard: return "Safeguard";
  }
  return "Unknown";
}

/// Per-iteration record of the revised (safeguarded) algorithm.
struct SafeguardState {
  double alpha_a = 0.0;       // predictor step after the xi cap
  double alpha_a_raw = 0.0;   // predictor step before the cap
  double xi = 1.0;
  double t = 0.0;
  double alpha_c = 0.0;       // accepted corrector step
  double alpha_c_pre_safeguard = 0.0;  // corrector step that triggered the safeguard
  double mu_target = 0.0;
  StepBranch branch = StepBranch::LargeStep;
  bool capped = false;
  double centrality_margin = 0.0;  // min_i y_i l_i - gamma mu at the updated point
};

struct SolveResult {
  IterPoint point;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  std::vector<double> mu_history;
  double wall_time_s = 0.0;

  // populated by the solver that produced the result
  std::vector<MehrotraState> mehrotra_iters;
  std::vector<SafeguardState> revised_iters;

  // set when the revised predictor's early-exit certificate fired
  bool early_exit = false;
  double early_exit_certificate = 0.0;
};

struct KktResiduals {
  VectorXd r_dual;  // Gx - A'lambda + c
  VectorXd r_prim;  // Ax - y - b
  VectorXd comp;    // y_i * lambda_i
};

inline KktResiduals kkt_residuals(const QpProblem& p, const IterPoint& z) {
  if (z.x.size() != p.n() || z.y.size() != p.m() || z.lambda.size() != p.m())
    throw std::invalid_argument("kkt_residuals: dimension mismatch");
  KktResiduals r;
  r.r_dual = p.G() * z.x - p.A().transpose() * z.lambda + p.c();
  r.r_prim = p.A() * z.x - z.y - p.b();
  r.comp = z.y.cwiseProduct(z.lambda);
  return r;
}

/// mu = y'lambda / m, the average complementarity product.
inline double complementarity_measure(const IterPoint& z) {
  const auto m = z.y.size();
  if (m < 1 || z.lambda.size() != m)
    throw std::invalid_argument("complementarity_measure: need |y| = |lambda| = m >= 1");
  return z.y.dot(z.lambda) / static_cast<double>(m);
}

/// min_i y_i lambda_i - gamma * mu; nonnegative inside the neighborhood.
inline double centrality_margin(const IterPoint& z, double gamma) {
  const VectorXd prod = z.y.cwiseProduct(z.lambda);
  const double mu = prod.sum() / static_cast<double>(prod.size());
  return prod.minCoeff() - gamma * mu;
}

/// Centrality test of the wide neighborhood: min_i y_i lambda_i >= gamma*mu - tol,
/// with strict positivity of (y, lambda). Feasibility is tracked separately
/// (infeasible-start path following), so membership here is centrality-only.
inline bool in_neighborhood(const IterPoint& z, double gamma, double tol = 1e-12) {
  if (!z.strictly_positive()) return false;
  return centrality_margin(z, gamma) >= -tol;
}

/// Strict-interior membership: both KKT linear residuals within tol and
/// y, lambda strictly positive.
inline bool is_strictly_feasible(const QpProblem& p, const IterPoint& z,
                                 double tol = 1e-12) {
  if (z.x.size() != p.n() || z.y.size() != p.m() || z.lambda.size() != p.m())
    throw std::invalid_argument("is_strictly_feasible: dimension mismatch");
  if (!z.strictly_positive()) return false;
  const VectorXd rd = p.G() * z.x + p.c() - p.A().transpose() * z.lambda;
  const VectorXd rp = p.A() * z.x - z.y - p.b();
  return rd.lpNorm<Eigen::Infinity>() <= tol && rp.lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace gpcqp
