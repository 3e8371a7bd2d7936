#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gpcqp/kkt.hpp"
#include "gpcqp/qp.hpp"

namespace gpcqp {

/// Gap after a step of length alpha_aff along the affine direction:
/// (y + alpha dy)'(lambda + alpha dl) / m.
inline double affine_duality_gap(const IterPoint& z, const Direction& d,
                                 double alpha_aff) {
  const VectorXd y = z.y + alpha_aff * d.dy;
  const VectorXd lam = z.lambda + alpha_aff * d.dlambda;
  return y.dot(lam) / static_cast<double>(z.y.size());
}

/// Default cold start: x = 0, y = lambda = e scaled by max(1, |b|_inf).
inline IterPoint mehrotra_start(const QpProblem& p) {
  const double s = std::max(1.0, p.b().lpNorm<Eigen::Infinity>());
  IterPoint z;
  z.x = VectorXd::Zero(p.n());
  z.y = VectorXd::Constant(p.m(), s);
  z.lambda = VectorXd::Constant(p.m(), s);
  return z;
}

/// Mehrotra's predictor-corrector for QP (infeasible start). Each iteration
/// factors the Newton matrix once, takes an affine probe to set the
/// centering parameter sigma = clamp((mu_aff/mu)^3, 0, 1), then steps along
/// the corrected direction with the fraction-to-boundary rule.
inline SolveResult solve_mehrotra(const QpProblem& p, const SolverParams& params,
                                  const IterPoint& z0) {
  params.validate();
  if (z0.x.size() != p.n() || z0.y.size() != p.m() || z0.lambda.size() != p.m())
    throw std::invalid_argument("solve_mehrotra: dimension mismatch");
  if (!z0.strictly_positive())
    throw std::invalid_argument("solve_mehrotra: start must have y, lambda > 0");

  const auto t_begin = std::chrono::steady_clock::now();
  const double m = static_cast<double>(p.m());
  const double feas_tol = 1e-6 * (1.0 + p.b().lpNorm<Eigen::Infinity>() +
                                  p.c().lpNorm<Eigen::Infinity>());

  SolveResult res;
  res.point = z0;
  res.status = SolveStatus::MaxIterations;

  auto finish = [&](SolveStatus st) {
    res.status = st;
    res.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t_begin).count();
    return res;
  };

  IterPoint& z = res.point;
  res.mu_history.push_back(complementarity_measure(z));

  for (int k = 0; k < params.max_iter; ++k) {
    const VectorXd rd = -(p.G() * z.x - p.A().transpose() * z.lambda + p.c());
    const VectorXd rp = -(p.A() * z.x - z.y - p.b());
    const double gap = z.y.dot(z.lambda);
    if (gap < params.epsilon &&
        rd.lpNorm<Eigen::Infinity>() <= feas_tol &&
        rp.lpNorm<Eigen::Infinity>() <= feas_tol)
      return finish(SolveStatus::Converged);

    auto fac = NewtonFactorization::factor(p, z);
    if (!fac) return finish(SolveStatus::NumericalFailure);

    const VectorXd rc = -z.y.cwiseProduct(z.lambda);
    const Direction aff = fac->solve(rd, rp, rc);

    const double mu = gap / m;
    const double alpha_aff = max_step_nonneg(z.y, z.lambda, aff.dy, aff.dlambda);
    const double mu_aff = affine_duality_gap(z, aff, alpha_aff);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    const VectorXd rc_corr = rc - aff.dy.cwiseProduct(aff.dlambda) +
                             VectorXd::Constant(p.m(), sigma * mu);
    const Direction dir = fac->solve(rd, rp, rc_corr);

    const double tau = params.tau_for(mu);
    const double alpha = fraction_to_boundary(z.y, z.lambda, dir.dy, dir.dlambda, tau);

    z.x += alpha * dir.dx;
    z.y += alpha * dir.dy;
    z.lambda += alpha * dir.dlambda;
    if (!z.strictly_positive()) return finish(SolveStatus::NumericalFailure);

    res.iterations = k + 1;
    res.mu_history.push_back(complementarity_measure(z));
    res.mehrotra_iters.push_back({mu, mu_aff, sigma, tau});
  }
  return finish(SolveStatus::MaxIterations);
}

inline SolveResult solve_mehrotra(const QpProblem& p,
                                  const SolverParams& params = {}) {
  return solve_mehrotra(p, params, mehrotra_start(p));
}

}  // namespace gpcqp
