#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gpcqp/gpc.hpp"
#include "gpcqp/oracle.hpp"
#include "gpcqp/revised.hpp"
#include "support/random_qp.hpp"

using namespace gpcqp;

namespace {

QpProblem qp1(double G, double c, double A, double b) {
  MatrixXd Gm(1, 1), Am(1, 1);
  Gm << G;
  Am << A;
  VectorXd cv(1), bv(1);
  cv << c;
  bv << b;
  return QpProblem(Gm, cv, Am, bv);
}

IterPoint unit_point(int m) {
  IterPoint z;
  z.x = VectorXd::Zero(1);
  z.y = VectorXd::Ones(m);
  z.lambda = VectorXd::Ones(m);
  return z;
}

}  // namespace

TEST_CASE("compute_t_and_xi") {
  IterPoint z = unit_point(2);
  Direction d;
  d.dy = VectorXd(2);
  d.dlambda = VectorXd(2);

  // no positive products: t = 0, xi = 1
  d.dy << -1, 1;
  d.dlambda << 1, -1;
  auto [t0, xi0] = compute_t_and_xi(z, d, 0.1);
  CHECK(t0 == 0.0);
  CHECK(xi0 == 1.0);

  // t = 0.45, xi = 1 - 0.1^(1/3)
  IterPoint z1 = unit_point(1);
  Direction d1;
  d1.dy = VectorXd::Constant(1, 0.9);
  d1.dlambda = VectorXd::Constant(1, 0.5);
  auto [t1, xi1] = compute_t_and_xi(z1, d1, 0.1);
  CHECK(t1 == Catch::Approx(0.45));
  CHECK(xi1 == Catch::Approx(1.0 - std::cbrt(0.1)).epsilon(1e-9));
  CHECK(xi1 == Catch::Approx(0.535841).margin(1e-6));

  // unit cube-root argument drives xi to the floor
  d1.dy = VectorXd::Constant(1, 4.5);
  d1.dlambda = VectorXd::Constant(1, 1.0);  // t = 4.5, 2*0.1*4.5/0.9 = 1
  auto [t2, xi2] = compute_t_and_xi(z1, d1, 0.1);
  CHECK(t2 == Catch::Approx(4.5));
  CHECK(xi2 == Catch::Approx(kXiMin));
}

TEST_CASE("max_step_in_neighborhood") {
  // zero direction keeps the point: full step
  IterPoint z = unit_point(2);
  Direction d;
  d.dx = VectorXd::Zero(1);
  d.dy = VectorXd::Zero(2);
  d.dlambda = VectorXd::Zero(2);
  CHECK(max_step_in_neighborhood(z, d, 0.1) == 1.0);

  // m = 1: centrality is vacuous, only positivity blocks
  IterPoint z1 = unit_point(1);
  Direction d1;
  d1.dx = VectorXd::Zero(1);
  d1.dy = VectorXd::Constant(1, -2.0);
  d1.dlambda = VectorXd::Zero(1);
  const double a1 = max_step_in_neighborhood(z1, d1, 0.1);
  CHECK(a1 < 0.5);
  CHECK(a1 == Catch::Approx(0.5).margin(1e-8));

  // two constraints: membership boundary at alpha = 0.75 for gamma = 0.25
  IterPoint z2 = unit_point(2);
  Direction d2;
  d2.dx = VectorXd::Zero(1);
  d2.dy = VectorXd(2);
  d2.dy << -1, 1;
  d2.dlambda = VectorXd::Zero(2);
  const double a2 = max_step_in_neighborhood(z2, d2, 0.25, 0.0);
  CHECK(a2 == Catch::Approx(0.75).margin(1e-9));

  // brute-force scan oracle at resolution 1e-6 agrees
  double scan = 0.0;
  for (double a = 0.0; a <= 1.0; a += 1e-6) {
    IterPoint pt{z2.x, z2.y + a * d2.dy, z2.lambda + a * d2.dlambda};
    if (in_neighborhood(pt, 0.25, 0.0))
      scan = a;
    else
      break;
  }
  CHECK(a2 == Catch::Approx(scan).margin(2e-6));
}

TEST_CASE("revised solves one-dimensional problems") {
  SolverParams params;
  auto r = solve_revised(qp1(2, -2, 1, 0), params);
  REQUIRE(r.status == SolveStatus::Converged);
  CHECK(r.point.x[0] == Catch::Approx(1.0).margin(1e-6));
  CHECK(r.point.y.dot(r.point.lambda) < params.epsilon);
}

TEST_CASE("revised matches the oracle on the trajectory-experiment QP") {
  // plant A = [1, -0.8], B = [0.4, 0.6], Nu = N = 3, eta = 1
  const CarimaModel model(Polynomial{1.0, -0.8}, Polynomial{0.4, 0.6});
  const auto dm = dynamic_matrix(model, 3, 3);
  const VectorXd f = free_response(model, {0.5, 0.3}, {0.1}, 3);
  const VectorXd w = VectorXd::Ones(3);
  const auto gp = build_qp(dm.gamma, f, w, 1.0, 0.0, -0.5, 1.0);

  const auto oracle = solve_oracle(gp.qp);
  REQUIRE(oracle.status == OracleStatus::Optimal);
  const auto r = solve_revised(gp.qp);
  REQUIRE(r.status == SolveStatus::Converged);
  CHECK((r.point.x - oracle.x).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("revised requires a neighborhood start") {
  auto p = qp1(2, -2, 1, 0);
  MatrixXd G(1, 1), A(2, 1);
  G << 2;
  A << 1, -1;
  VectorXd c(1), b(2);
  c << -2;
  b << -1, -1;
  QpProblem box(G, c, A, b);
  IterPoint z;
  z.x = VectorXd::Zero(1);
  z.y = VectorXd::Ones(2);
  z.lambda = VectorXd(2);
  z.lambda << 0.01, 1.99;  // min product 0.01 < gamma * mu = 0.1
  CHECK_THROWS_AS(solve_revised(box, SolverParams{}, z), std::invalid_argument);

  z.y = VectorXd::Zero(2);
  CHECK_THROWS_AS(solve_revised(box, SolverParams{}, z), std::invalid_argument);
}

TEST_CASE("revised randomized sweep with invariants") {
  std::mt19937 rng(20260809);
  const auto opt = testsupport::GenOptions{};
  SolverParams params;
  long caps = 0, safeguards = 0;
  const double sqrt2 = std::sqrt(2.0);

  for (int s = 0; s < 100; ++s) {
    const auto inst = testsupport::make_random_qp(rng, opt);
    const auto oracle = solve_oracle(inst.p);
    REQUIRE(oracle.status == OracleStatus::Optimal);

    SolveResult r;
    if (s % 2 == 0)
      r = solve_revised(inst.p, params);
    else
      r = solve_revised(inst.p, params,
                        testsupport::skewed_boundary_start(inst, rng, params.gamma));

    REQUIRE(r.status == SolveStatus::Converged);
    CHECK(r.iterations <= 50);
    CHECK((r.point.x - oracle.x).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK(r.point.y.dot(r.point.lambda) < params.epsilon);

    // y'lambda strictly decreasing (mu_history scales it by 1/m)
    for (std::size_t k = 1; k < r.mu_history.size(); ++k)
      CHECK(r.mu_history[k] < r.mu_history[k - 1]);

    const double threshold = params.gamma / (sqrt2 * static_cast<double>(inst.p.n()));
    for (const auto& it : r.revised_iters) {
      CHECK(it.centrality_margin >= -params.neighborhood_tol);
      CHECK(it.alpha_a <= it.xi + 1e-15);
      if (it.capped) {
        ++caps;
        CHECK(it.alpha_a_raw > it.xi);
        CHECK(it.alpha_a == Catch::Approx(it.xi));
      }
      if (it.branch == StepBranch::Safeguard) {
        ++safeguards;
        CHECK(it.alpha_c_pre_safeguard < threshold);
        CHECK(it.mu_target ==
              Catch::Approx(params.beta / (1.0 - params.beta) *
                            r.mu_history[&it - r.revised_iters.data()]));
      }
    }
    if (r.early_exit) CHECK(r.early_exit_certificate <= params.epsilon);
  }
  CHECK(caps > 0);
  CHECK(safeguards > 0);
}

TEST_CASE("small-step corrector branch is reachable") {
  // ill-conditioned curvature and a boundary start force a tiny predictor step
  std::mt19937 rng(777);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  bool found = false;
  for (int s = 0; s < 50 && !found; ++s) {
    const int n = 2 + s % 7, m = 3 + (s * 13) % 10;
    MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
    MatrixXd G = M.transpose() * M * 0.01 + 1e-4 * MatrixXd::Identity(n, n);
    MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    VectorXd xbar(n), slack(m), c(n);
    for (int i = 0; i < n; ++i) xbar[i] = gauss(rng);
    for (int i = 0; i < m; ++i) slack[i] = unif(rng) * ((i % 3 == 0) ? 1e-3 : 1.0);
    for (int i = 0; i < n; ++i) c[i] = 3.0 * gauss(rng);
    QpProblem p(G, c, A, A * xbar - slack);

    IterPoint z0;
    z0.x = xbar;
    z0.y = slack;
    z0.lambda = VectorXd::Ones(m);
    for (int i = 0; i < m; ++i) z0.lambda[i] = unif(rng) / z0.y[i];
    VectorXd prod = z0.y.cwiseProduct(z0.lambda);
    Eigen::Index i0 = 0;
    prod.minCoeff(&i0);
    const double p0 = 0.1 * (prod.sum() - prod[i0]) / (m - 0.1);
    z0.lambda[i0] = p0 / z0.y[i0];

    const auto r = solve_revised(p, SolverParams{}, z0);
    for (const auto& it : r.revised_iters) {
      if (it.branch == StepBranch::SmallStep) {
        CHECK(it.alpha_a < 0.1);
        found = true;
      }
    }
  }
  CHECK(found);
}

TEST_CASE("revised_start lands in the neighborhood on moderate instances") {
  std::mt19937 rng(31);
  SolverParams params;
  for (int s = 0; s < 50; ++s) {
    const auto inst = testsupport::make_random_qp(rng, testsupport::GenOptions{});
    const auto z0 = revised_start(inst.p, params);
    CHECK(in_neighborhood(z0, params.gamma, params.neighborhood_tol));
  }
}

TEST_CASE("revised max_iter is honored") {
  std::mt19937 rng(8);
  const auto inst = testsupport::make_random_qp(rng, testsupport::tame_options(6, 10));
  SolverParams params;
  params.max_iter = 1;
  const auto r = solve_revised(inst.p, params);
  CHECK(r.status == SolveStatus::MaxIterations);
  CHECK(r.iterations == 1);
}
