#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gpcqp/qp.hpp"

namespace gpcqp {

enum class OracleStatus { Optimal, Infeasible };

/// Exact solution of a small QP by enumeration of active sets.
struct OracleSolution {
  OracleStatus status = OracleStatus::Infeasible;
  VectorXd x;
  VectorXd lambda;                 // full m-vector, zero on inactive rows
  std::vector<int> active_set;     // ascending row indices
  double objective = 0.0;
  bool unique = false;
  int skipped_candidates = 0;      // singular equality-KKT subsystems
};

/// Enumerates every subset S of constraint rows, solves the equality-KKT
/// system [G, -A_S'; A_S, 0] [x; lambda_S] = [-c; b_S], keeps candidates
/// with lambda_S >= -1e-10 and Ax - b >= -1e-10, and returns the feasible
/// candidate with least objective (ties broken by lexicographically
/// smallest active set). Requires m <= 16.
inline OracleSolution solve_oracle(const QpProblem& p) {
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();
  if (m > 16)
    throw std::invalid_argument("solve_oracle: m > 16 unsupported (2^m enumeration)");

  constexpr double kFeasTol = 1e-10;
  OracleSolution best;
  double best_obj = 0.0;
  std::uint32_t best_mask = 0;
  bool have_best = false;
  std::vector<VectorXd> optima;  // near-optimal x for the uniqueness check

  std::vector<int> rows;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    rows.clear();
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) rows.push_back(i);
    const auto k = static_cast<Eigen::Index>(rows.size());

    MatrixXd K(n + k, n + k);
    K.setZero();
    K.topLeftCorner(n, n) = p.G();
    VectorXd rhs(n + k);
    rhs.head(n) = -p.c();
    for (Eigen::Index j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = -p.A().row(rows[j]).transpose();
      K.block(n + j, 0, 1, n) = p.A().row(rows[j]);
      rhs[n + j] = p.b()[rows[j]];
    }

    Eigen::FullPivLU<MatrixXd> lu(K);
    if (!lu.isInvertible()) {
      ++best.skipped_candidates;
      continue;
    }
    const VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite() || (K * sol - rhs).lpNorm<Eigen::Infinity>() >
                                1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
      ++best.skipped_candidates;
      continue;
    }

    const VectorXd x = sol.head(n);
    const VectorXd lam_s = sol.tail(k);
    if (k > 0 && lam_s.minCoeff() < -kFeasTol) continue;
    const VectorXd slack = p.A() * x - p.b();
    if (slack.minCoeff() < -kFeasTol) continue;

    const double obj = p.objective(x);
    if (!have_best || obj < best_obj - 1e-12 ||
        (obj <= best_obj + 1e-12 && mask < best_mask)) {
      if (have_best && obj <= best_obj + 1e-10) optima.push_back(best.x);
      have_best = true;
      best_obj = obj;
      best_mask = mask;
      best.status = OracleStatus::Optimal;
      best.x = x;
      best.lambda = VectorXd::Zero(m);
      for (Eigen::Index j = 0; j < k; ++j) best.lambda[rows[j]] = lam_s[j];
      best.active_set = rows;
      best.objective = obj;
    } else if (obj <= best_obj + 1e-10) {
      optima.push_back(x);
    }
  }

  if (best.status == OracleStatus::Optimal) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.G(), Eigen::EigenvaluesOnly);
    best.unique = es.eigenvalues().minCoeff() > QpProblem::kPsdTol;
    if (!best.unique) {
      bool distinct = false;
      for (const auto& x : optima)
        if ((x - best.x).lpNorm<Eigen::Infinity>() > 1e-8) distinct = true;
      best.unique = !distinct;
    }
  }
  return best;
}

}  // namespace gpcqp
