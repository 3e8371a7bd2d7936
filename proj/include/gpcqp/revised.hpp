#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "gpcqp/kkt.hpp"
#include "gpcqp/mehrotra.hpp"
#include "gpcqp/qp.hpp"

namespace gpcqp {

/// Floor applied to the predictor cap so a huge positive-product ratio t
/// cannot zero out progress.
inline constexpr double kXiMin = 0.1;

/// Computes t = max_{i in I+} dy_i dl_i / (y_i l_i) over the indices with
/// positive affine product, and the step cap xi = 1 - (2 gamma t/(1-gamma))^(1/3).
/// Empty I+ gives t = 0, xi = 1; xi is clamped to [kXiMin, 1].
inline std::pair<double, double> compute_t_and_xi(const IterPoint& z,
                                                  const Direction& aff,
                                                  double gamma) {
  double t = 0.0;
  for (Eigen::Index i = 0; i < z.y.size(); ++i) {
    const double prod = aff.dy[i] * aff.dlambda[i];
    if (prod > 0.0) t = std::max(t, prod / (z.y[i] * z.lambda[i]));
  }
  double xi = 1.0 - std::cbrt(2.0 * gamma * t / (1.0 - gamma));
  xi = std::clamp(xi, kXiMin, 1.0);
  return {t, xi};
}

/// Largest alpha in (0,1] keeping z + alpha*d strictly positive and inside
/// the centrality neighborhood: ratio-test upper bound for positivity,
/// then bisection on the membership predicate to absolute width 1e-12.
inline double max_step_in_neighborhood(const IterPoint& z, const Direction& d,
                                       double gamma, double tol = 1e-12) {
  auto point_at = [&](double a) {
    return IterPoint{z.x + a * d.dx, z.y + a * d.dy, z.lambda + a * d.dlambda};
  };
  auto member = [&](double a) { return in_neighborhood(point_at(a), gamma, tol); };

  double hi = max_step_nonneg(z.y, z.lambda, d.dy, d.dlambda);
  if (hi < 1.0) hi *= 1.0 - 1e-9;  // keep the endpoint strictly interior
  if (member(hi)) return hi;

  double lo = 0.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (member(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Default start for the revised algorithm: x = 0,
/// y_i = max(1, max(1, |b_i|) - b_i), lambda = e * max(1, |c|_inf / m),
/// followed by one centering solve if the neighborhood test fails.
inline IterPoint revised_start(const QpProblem& p, const SolverParams& params = {}) {
  IterPoint z;
  z.x = VectorXd::Zero(p.n());
  z.y = VectorXd::Zero(p.m());
  for (Eigen::Index i = 0; i < p.m(); ++i)
    z.y[i] = std::max(1.0, std::max(1.0, std::abs(p.b()[i])) - p.b()[i]);
  z.lambda = VectorXd::Constant(
      p.m(), std::max(1.0, p.c().lpNorm<Eigen::Infinity>() / static_cast<double>(p.m())));

  if (in_neighborhood(z, params.gamma, params.neighborhood_tol)) return z;

  auto fac = NewtonFactorization::factor(p, z);
  if (!fac) return z;
  const double mu = complementarity_measure(z);
  const VectorXd rd = -(p.G() * z.x - p.A().transpose() * z.lambda + p.c());
  const VectorXd rp = -(p.A() * z.x - z.y - p.b());
  const VectorXd rc = -z.y.cwiseProduct(z.lambda) + VectorXd::Constant(p.m(), mu);
  const Direction d = fac->solve(rd, rp, rc);

  // One centering solve; the step length along it is picked by trial, since
  // the full Newton step can overshoot on badly uncentered points. Keeps the
  // largest-margin point if no trial reaches membership.
  const double ftb = fraction_to_boundary(z.y, z.lambda, d.dy, d.dlambda, 0.99);
  IterPoint best = z;
  double best_margin = centrality_margin(z, params.gamma);
  for (double frac : {1.0, 0.75, 0.5, 0.25, 0.1}) {
    const double alpha = frac * ftb;
    IterPoint trial{z.x + alpha * d.dx, z.y + alpha * d.dy,
                    z.lambda + alpha * d.dlambda};
    if (!trial.strictly_positive()) continue;
    if (in_neighborhood(trial, params.gamma, params.neighborhood_tol)) return trial;
    const double margin = centrality_margin(trial, params.gamma);
    if (margin > best_margin) {
      best_margin = margin;
      best = std::move(trial);
    }
  }
  return best;
}

/// Revised predictor-corrector with step-length safeguards. Per iteration:
/// an affine predictor fixes the allowable step alpha_a (early exit when
/// (1-alpha_a) * gap(alpha_a) <= epsilon), alpha_a is capped at xi, the
/// corrector re-solves with target mu = (1-alpha_a)^3 * mu_g (cross term
/// scaled by alpha_a when alpha_a < 0.1), the step alpha_c is the largest
/// keeping the iterate inside N_inf^-(gamma), and a recentering solve with
/// mu = beta/(1-beta) * mu_g replaces steps below gamma/(sqrt(2) n).
inline SolveResult solve_revised(const QpProblem& p, const SolverParams& params,
                                 const IterPoint& z0) {
  params.validate();
  if (z0.x.size() != p.n() || z0.y.size() != p.m() || z0.lambda.size() != p.m())
    throw std::invalid_argument("solve_revised: dimension mismatch");
  if (!z0.strictly_positive())
    throw std::invalid_argument("solve_revised: start must have y, lambda > 0");
  if (!in_neighborhood(z0, params.gamma, params.neighborhood_tol))
    throw std::invalid_argument(
        "solve_revised: start outside the N_inf^-(gamma) neighborhood");

  const auto t_begin = std::chrono::steady_clock::now();
  const double m = static_cast<double>(p.m());
  const double safeguard_threshold =
      params.gamma / (std::sqrt(2.0) * static_cast<double>(p.n()));
  // Step search runs against a tighter tolerance than the stated invariant
  // so accepted iterates keep min y_i l_i >= gamma mu - neighborhood_tol
  // with rounding headroom.
  const double step_tol = 0.5 * params.neighborhood_tol;

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
    const double gap = z.y.dot(z.lambda);
    if (gap < params.epsilon) return finish(SolveStatus::Converged);

    auto fac = NewtonFactorization::factor(p, z);
    if (!fac) return finish(SolveStatus::NumericalFailure);

    const VectorXd rd = -(p.G() * z.x - p.A().transpose() * z.lambda + p.c());
    const VectorXd rp = -(p.A() * z.x - z.y - p.b());
    const VectorXd rc = -z.y.cwiseProduct(z.lambda);
    const Direction aff = fac->solve(rd, rp, rc);

    // Predictor step length toward the positivity boundary.
    const double alpha_raw =
        max_step_nonneg(z.y, z.lambda, aff.dy, aff.dlambda) * (1.0 - 1e-8);
    const auto [t, xi] = compute_t_and_xi(z, aff, params.gamma);

    // Early exit: the predictor point certifies an epsilon-small gap.
    {
      const double gap_a = affine_duality_gap(z, aff, alpha_raw) * m;
      const double certificate = (1.0 - alpha_raw) * gap_a;
      if (certificate <= params.epsilon && gap_a < params.epsilon) {
        z.x += alpha_raw * aff.dx;
        z.y += alpha_raw * aff.dy;
        z.lambda += alpha_raw * aff.dlambda;
        res.iterations = k + 1;
        res.mu_history.push_back(complementarity_measure(z));
        res.early_exit = true;
        res.early_exit_certificate = certificate;
        return finish(SolveStatus::Converged);
      }
    }

    SafeguardState st;
    st.t = t;
    st.xi = xi;
    st.alpha_a_raw = alpha_raw;
    st.capped = alpha_raw > xi;
    const double alpha_a = st.capped ? xi : alpha_raw;
    st.alpha_a = alpha_a;

    const double mu_g = gap / m;
    const VectorXd cross = aff.dy.cwiseProduct(aff.dlambda);

    // On exactly feasible iterates these blocks are zero and the corrector
    // matches the feasible-start algorithm; on infeasible starts carrying
    // the full residuals contracts the infeasibility by (1 - alpha_c) per
    // step, at least as fast as the duality gap the loop is guarded on.
    const VectorXd& rd_c = rd;
    const VectorXd& rp_c = rp;

    st.mu_target = std::pow(1.0 - alpha_a, 3.0) * mu_g;
    st.branch = alpha_a >= 0.1 ? StepBranch::LargeStep : StepBranch::SmallStep;
    const double cross_scale = alpha_a >= 0.1 ? 1.0 : alpha_a;
    VectorXd rc_c = -z.y.cwiseProduct(z.lambda) - cross_scale * cross +
                    VectorXd::Constant(p.m(), st.mu_target);
    Direction dir = fac->solve(rd_c, rp_c, rc_c);
    double alpha_c =
        max_step_in_neighborhood(z, dir, params.gamma, step_tol);

    if (alpha_c < safeguard_threshold) {
      st.alpha_c_pre_safeguard = alpha_c;
      st.branch = StepBranch::Safeguard;
      st.mu_target = params.beta / (1.0 - params.beta) * mu_g;
      rc_c = -z.y.cwiseProduct(z.lambda) - alpha_a * cross +
             VectorXd::Constant(p.m(), st.mu_target);
      dir = fac->solve(rd_c, rp_c, rc_c);
      alpha_c =
          max_step_in_neighborhood(z, dir, params.gamma, step_tol);
    } else {
      st.alpha_c_pre_safeguard = alpha_c;
    }
    st.alpha_c = alpha_c;

    z.x += alpha_c * dir.dx;
    z.y += alpha_c * dir.dy;
    z.lambda += alpha_c * dir.dlambda;
    if (!z.strictly_positive()) return finish(SolveStatus::NumericalFailure);

    st.centrality_margin = centrality_margin(z, params.gamma);

    res.iterations = k + 1;
    res.mu_history.push_back(complementarity_measure(z));
    res.revised_iters.push_back(st);
  }
  return finish(SolveStatus::MaxIterations);
}

inline SolveResult solve_revised(const QpProblem& p,
                                 const SolverParams& params = {}) {
  return solve_revised(p, params, revised_start(p, params));
}

}  // namespace gpcqp
