#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "gpcqp/oracle.hpp"
#include "gpcqp/qp.hpp"
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

IterPoint point1(double x, double y, double lambda) {
  IterPoint z;
  z.x = VectorXd::Constant(1, x);
  z.y = VectorXd::Constant(1, y);
  z.lambda = VectorXd::Constant(1, lambda);
  return z;
}

}  // namespace

TEST_CASE("kkt_residuals at known points") {
  // KKT point of min x^2 - 2x s.t. x >= 0 (interior optimum)
  auto r = kkt_residuals(qp1(2, -2, 1, 0), point1(1, 1, 0));
  CHECK(r.r_dual[0] == 0.0);
  CHECK(r.r_prim[0] == 0.0);
  CHECK(r.comp[0] == 0.0);

  // active-constraint KKT point
  r = kkt_residuals(qp1(2, 2, 1, 0), point1(0, 0, 2));
  CHECK(r.r_dual[0] == 0.0);
  CHECK(r.r_prim[0] == 0.0);
  CHECK(r.comp[0] == 0.0);

  // direct evaluation away from any KKT point
  r = kkt_residuals(qp1(1, 0, 1, 0), point1(1, 2, 1));
  CHECK(r.r_dual[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.r_prim[0] == Catch::Approx(-1.0));
  CHECK(r.comp[0] == Catch::Approx(2.0));
}

TEST_CASE("kkt_residuals rejects mismatched dimensions") {
  IterPoint z;
  z.x = VectorXd::Zero(2);
  z.y = VectorXd::Ones(1);
  z.lambda = VectorXd::Ones(1);
  CHECK_THROWS_AS(kkt_residuals(qp1(2, -2, 1, 0), z), std::invalid_argument);
}

TEST_CASE("complementarity_measure") {
  IterPoint z;
  z.y = VectorXd(2);
  z.lambda = VectorXd(2);
  z.y << 1, 2;
  z.lambda << 3, 4;
  CHECK(complementarity_measure(z) == Catch::Approx(5.5));

  for (int m : {1, 3, 7}) {
    z.y = VectorXd::Ones(m);
    z.lambda = VectorXd::Ones(m);
    CHECK(complementarity_measure(z) == Catch::Approx(1.0));
  }

  z.y = VectorXd::Constant(1, 0.5);
  z.lambda = VectorXd::Constant(1, 4.0);
  CHECK(complementarity_measure(z) == Catch::Approx(2.0));

  z.y.resize(0);
  z.lambda.resize(0);
  CHECK_THROWS_AS(complementarity_measure(z), std::invalid_argument);
}

TEST_CASE("complementarity_measure is permutation invariant") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 9;
    IterPoint z;
    z.y = VectorXd(m);
    z.lambda = VectorXd(m);
    for (int i = 0; i < m; ++i) {
      z.y[i] = unif(rng);
      z.lambda[i] = unif(rng);
    }
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    IterPoint zp;
    zp.y = VectorXd(m);
    zp.lambda = VectorXd(m);
    for (int i = 0; i < m; ++i) {
      zp.y[i] = z.y[perm[i]];
      zp.lambda[i] = z.lambda[perm[i]];
    }
    CHECK(complementarity_measure(zp) ==
          Catch::Approx(complementarity_measure(z)).epsilon(1e-14));
  }
}

TEST_CASE("in_neighborhood") {
  IterPoint z;
  z.y = VectorXd::Ones(2);
  z.lambda = VectorXd::Ones(2);
  CHECK(in_neighborhood(z, 0.25));

  z.lambda << 0.1, 1.9;
  CHECK_FALSE(in_neighborhood(z, 0.25, 0.0));  // min product 0.1 < 0.25

  // gamma = 0 admits any strictly positive point
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(1e-6, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 6;
    IterPoint zr;
    zr.y = VectorXd(m);
    zr.lambda = VectorXd(m);
    for (int i = 0; i < m; ++i) {
      zr.y[i] = unif(rng);
      zr.lambda[i] = unif(rng);
    }
    CHECK(in_neighborhood(zr, 0.0, 0.0));
  }

  z.y << 1, 1;
  z.lambda << 0, 1;
  CHECK_FALSE(in_neighborhood(z, 0.1));  // positivity is part of membership
}

TEST_CASE("is_strictly_feasible") {
  // boundary KKT point: lambda not strictly positive
  CHECK_FALSE(is_strictly_feasible(qp1(2, -2, 1, 0), point1(1, 1, 0), 1e-12));

  // residual check: Gx + c - A'lambda must vanish
  CHECK_FALSE(is_strictly_feasible(qp1(1, -2, 1, 0), point1(1, 1, 1), 1e-12));
  CHECK(is_strictly_feasible(qp1(1, -2, 1, 0), point1(3, 3, 1), 1e-12));

  CHECK_FALSE(is_strictly_feasible(qp1(1, -2, 1, 0), point1(3, 0, 1), 1e-12));
}

TEST_CASE("QpProblem construction validates") {
  // symmetrization: stored G is exactly symmetric
  MatrixXd G(2, 2);
  G << 2, 0.5, 0.1, 2;
  MatrixXd A(1, 2);
  A << 1, 0;
  QpProblem p(G, VectorXd::Zero(2), A, VectorXd::Zero(1));
  CHECK((p.G() - p.G().transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(p.G()(0, 1) == Catch::Approx(0.3));

  // indefinite G rejected
  MatrixXd Gneg(1, 1);
  Gneg << -1;
  MatrixXd A1(1, 1);
  A1 << 1;
  CHECK_THROWS_AS(QpProblem(Gneg, VectorXd::Zero(1), A1, VectorXd::Zero(1)),
                  std::invalid_argument);

  // G = 0 is PSD and accepted
  MatrixXd Gzero = MatrixXd::Zero(1, 1);
  CHECK_NOTHROW(QpProblem(Gzero, VectorXd::Zero(1), A1, VectorXd::Zero(1)));

  // dimension mismatches
  MatrixXd G1(1, 1);
  G1 << 1;
  CHECK_THROWS_AS(QpProblem(G1, VectorXd::Zero(2), A1, VectorXd::Zero(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(QpProblem(G1, VectorXd::Zero(1), MatrixXd::Ones(1, 2), VectorXd::Zero(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(QpProblem(G1, VectorXd::Zero(1), A1, VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("SolverParams validation") {
  SolverParams p;
  CHECK_NOTHROW(p.validate());
  p.gamma = 0.3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.gamma = 0.1;
  p.beta = 0.05;  // below gamma
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.beta = 0.2;
  p.epsilon = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.epsilon = 1e-8;
  p.max_iter = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("kkt_residuals vanish at oracle optima") {
  std::mt19937 rng(2024);
  auto opt = testsupport::GenOptions{};
  opt.n_hi = 6;
  opt.m_hi = 10;
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = testsupport::make_random_qp(rng, opt);
    const auto sol = solve_oracle(inst.p);
    REQUIRE(sol.status == OracleStatus::Optimal);
    IterPoint z;
    z.x = sol.x;
    z.y = inst.p.A() * sol.x - inst.p.b();
    z.lambda = sol.lambda;
    const auto r = kkt_residuals(inst.p, z);
    CHECK(r.r_dual.lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(r.r_prim.lpNorm<Eigen::Infinity>() <= 1e-8);
    // comp_i = y_i lambda_i: one factor vanishes at an exact optimum
    double max_comp = 0.0;
    for (Eigen::Index i = 0; i < inst.p.m(); ++i)
      max_comp = std::max(max_comp, std::abs(r.comp[i]));
    CHECK(max_comp <= 1e-8);
  }
}
