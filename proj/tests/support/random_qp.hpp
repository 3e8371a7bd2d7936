#pragma once

// Random strictly convex QP instances with a known strictly feasible
// interior point, shared by the unit and acceptance suites.

#include <random>

#include "gpcqp/qp.hpp"

namespace gpcqp::testsupport {

struct RandomQp {
  QpProblem p;
  VectorXd interior_x;      // A*interior_x - b = interior_slack > 0
  VectorXd interior_slack;
};

struct GenOptions {
  int n_lo = 2, n_hi = 8;
  int m_lo = 3, m_hi = 12;
  bool unit_rows = false;    // normalize constraint rows
  double xbar_scale = 1.0;
  double rho_lo = 0.2, rho_hi = 2.0;      // extra curvature on G
  double slack_lo = 0.2, slack_hi = 2.0;
  double c_scale = 1.0;
};

inline RandomQp make_random_qp(std::mt19937& rng, const GenOptions& opt = {}) {
  std::uniform_int_distribution<int> ndist(opt.n_lo, opt.n_hi);
  std::uniform_int_distribution<int> mdist(opt.m_lo, opt.m_hi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> rho(opt.rho_lo, opt.rho_hi);
  std::uniform_real_distribution<double> sl(opt.slack_lo, opt.slack_hi);

  const int n = ndist(rng);
  const int m = mdist(rng);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
  MatrixXd G = M.transpose() * M + rho(rng) * MatrixXd::Identity(n, n);
  MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    if (opt.unit_rows) A.row(i) /= A.row(i).norm();
  }
  VectorXd xbar(n), slack(m), c(n);
  for (int i = 0; i < n; ++i) xbar[i] = opt.xbar_scale * gauss(rng);
  for (int i = 0; i < m; ++i) slack[i] = sl(rng);
  for (int i = 0; i < n; ++i) c[i] = opt.c_scale * gauss(rng);
  VectorXd b = A * xbar - slack;
  return RandomQp{QpProblem(std::move(G), std::move(c), std::move(A), std::move(b)),
                  std::move(xbar), std::move(slack)};
}

/// The well-scaled distribution used for the solver property sweeps.
inline GenOptions tame_options(int n_hi = 10, int m_hi = 20) {
  GenOptions opt;
  opt.n_hi = n_hi;
  opt.m_hi = m_hi;
  opt.unit_rows = true;
  opt.xbar_scale = 0.5;
  opt.rho_lo = 0.5;
  opt.slack_lo = 0.3;
  opt.slack_hi = 1.5;
  return opt;
}

/// Strictly feasible start whose smallest complementarity product sits
/// exactly on the N_inf^-(gamma) boundary; exercises the safeguard branch.
inline IterPoint skewed_boundary_start(const RandomQp& inst, std::mt19937& rng,
                                       double gamma) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  const auto m = inst.p.m();
  IterPoint z;
  z.x = inst.interior_x;
  z.y = inst.interior_slack;
  z.lambda = VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) z.lambda[i] = unif(rng) / z.y[i];
  VectorXd prod = z.y.cwiseProduct(z.lambda);
  Eigen::Index i0 = 0;
  prod.minCoeff(&i0);
  const double sum_other = prod.sum() - prod[i0];
  const double p0 = gamma * sum_other / (static_cast<double>(m) - gamma);
  z.lambda[i0] = p0 / z.y[i0];
  return z;
}

}  // namespace gpcqp::testsupport
