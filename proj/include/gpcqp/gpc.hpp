#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gpcqp/qp.hpp"

namespace gpcqp {

/// Polynomial in z^-1, coefficient k multiplying z^-k.
struct Polynomial {
  std::vector<double> coeffs;

  Polynomial() = default;
  Polynomial(std::initializer_list<double> c) : coeffs(c) {}
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {}

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double at(std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0.0; }

  /// Value at a given z^-1 (e.g. 1.0 for the dc gain).
  double eval(double zinv) const {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * zinv + *it;
    return v;
  }
};

inline Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
  if (p.coeffs.empty() || q.coeffs.empty()) return Polynomial{};
  Polynomial r;
  r.coeffs.assign(p.coeffs.size() + q.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs.size(); ++j)
      r.coeffs[i + j] += p.coeffs[i] * q.coeffs[j];
  return r;
}

/// A-tilde = Delta * A = (1 - z^-1) A.
inline Polynomial a_tilde(const Polynomial& a) {
  if (a.coeffs.empty() || std::abs(a.coeffs[0] - 1.0) > 1e-12)
    throw std::invalid_argument("a_tilde: A must be monic");
  return poly_mul(Polynomial{1.0, -1.0}, a);
}

/// CARIMA plant A(z^-1) y(t) = B(z^-1) z^-d u(t-1) + e(t)/Delta, with the
/// noise polynomial fixed to 1 and noise-free simulation assumed.
struct CarimaModel {
  Polynomial a;
  Polynomial b;
  int delay = 0;

  CarimaModel(Polynomial a_, Polynomial b_, int d = 0)
      : a(std::move(a_)), b(std::move(b_)), delay(d) {
    if (a.coeffs.empty() || std::abs(a.coeffs[0] - 1.0) > 1e-12)
      throw std::invalid_argument("CarimaModel: A must be monic");
    bool nonzero = false;
    for (double c : b.coeffs)
      if (c != 0.0) nonzero = true;
    if (!nonzero) throw std::invalid_argument("CarimaModel: B must be nonzero");
    if (delay < 0) throw std::invalid_argument("CarimaModel: delay must be >= 0");
  }
};

/// Horizon and weight configuration. Predictions cover t+d+1 ... t+d+N.
struct GpcConfig {
  int N = 1;            // prediction horizon
  int Nu = 1;           // control horizon
  double eta = 1.0;     // control-increment weight
  double delta = 1.0;   // output-error weight (1 recovers the standard assembly)
  double u_min = 0.0;
  double u_max = 0.0;
  std::optional<std::pair<double, double>> rate_bounds;  // optional du rows

  void validate() const {
    if (Nu < 1 || Nu > N) throw std::invalid_argument("GpcConfig: need 1 <= Nu <= N");
    if (eta < 0.0) throw std::invalid_argument("GpcConfig: eta must be >= 0");
    if (delta < 0.0) throw std::invalid_argument("GpcConfig: delta must be >= 0");
    if (!(u_min < u_max)) throw std::invalid_argument("GpcConfig: need u_min < u_max");
    if (rate_bounds && !(rate_bounds->first < rate_bounds->second))
      throw std::invalid_argument("GpcConfig: need du_min < du_max");
  }
};

/// E_j, F_j with 1 = E_j * A-tilde + z^-j F_j.
struct DiophantinePair {
  Polynomial e;  // degree j-1
  Polynomial f;  // degree <= deg(A-tilde) - 1
};

/// Incremental long division of 1 by A-tilde: one update step per horizon
/// index. E_{j+1} extends E_j by the coefficient f_{j,0}; F advances as
/// F_{j+1,k} = F_{j,k+1} - F_{j,0} * atilde_{k+1}.
class DiophantineLadder {
public:
  explicit DiophantineLadder(Polynomial atilde) : atilde_(std::move(atilde)) {
    if (atilde_.coeffs.empty() || std::abs(atilde_.coeffs[0] - 1.0) > 1e-12)
      throw std::invalid_argument("DiophantineLadder: A-tilde must be monic");
    const std::size_t deg = atilde_.coeffs.size() - 1;
    e_.coeffs = {1.0};
    f_.coeffs.assign(deg == 0 ? 1 : deg, 0.0);
    for (std::size_t k = 0; k + 1 < atilde_.coeffs.size(); ++k)
      f_.coeffs[k] = -atilde_.coeffs[k + 1];
    j_ = 1;
  }

  int j() const { return j_; }
  const Polynomial& e() const { return e_; }
  const Polynomial& f() const { return f_; }

  void advance() {
    const double lead = f_.coeffs.empty() ? 0.0 : f_.coeffs[0];
    e_.coeffs.push_back(lead);
    Polynomial next;
    next.coeffs.assign(f_.coeffs.size(), 0.0);
    for (std::size_t k = 0; k < f_.coeffs.size(); ++k)
      next.coeffs[k] = f_.at(k + 1) - lead * atilde_.at(k + 1);
    f_ = std::move(next);
    ++j_;
  }

private:
  Polynomial atilde_;
  Polynomial e_, f_;
  int j_ = 1;
};

/// E_j and F_j for a single j >= 1.
inline DiophantinePair diophantine(const Polynomial& atilde, int j) {
  if (j < 1) throw std::invalid_argument("diophantine: j must be >= 1");
  DiophantineLadder ladder(atilde);
  while (ladder.j() < j) ladder.advance();
  return {ladder.e(), ladder.f()};
}

/// Dynamic (step-response) matrix: g_k is coefficient k of G_{k+1} = E_{k+1} B,
/// and Gamma is the N x Nu lower-triangular Toeplitz matrix Gamma_ij = g_{i-j}.
struct DynamicMatrix {
  MatrixXd gamma;
  VectorXd g;
};

inline DynamicMatrix dynamic_matrix(const CarimaModel& model, int N, int Nu) {
  if (N < 1 || Nu < 1 || Nu > N)
    throw std::invalid_argument("dynamic_matrix: need N >= Nu >= 1");
  DiophantineLadder ladder(a_tilde(model.a));
  std::vector<double> e_coeffs;  // shared across all E_j: E_j nests in E_{j+1}
  e_coeffs.push_back(ladder.e().coeffs[0]);
  while (ladder.j() < N) {
    ladder.advance();
    e_coeffs.push_back(ladder.e().coeffs.back());
  }

  DynamicMatrix dm;
  dm.g = VectorXd::Zero(N);
  for (int k = 0; k < N; ++k) {
    double gk = 0.0;
    for (int l = 0; l <= model.b.degree() && l <= k; ++l)
      gk += model.b.coeffs[l] * e_coeffs[k - l];
    dm.g[k] = gk;
  }
  dm.gamma = MatrixXd::Zero(N, Nu);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i && j < Nu; ++j) dm.gamma(i, j) = dm.g[i - j];
  return dm;
}

/// Free response over the horizon: f_j = F_{d+j}(z^-1) y(t) + Gamma'_j
/// applied to past control increments, i.e. the predicted output with all
/// future du equal to zero. Histories are most-recent-first:
/// y_hist = [y(t), y(t-1), ...] with at least deg(A)+1 entries,
/// du_hist = [du(t-1), du(t-2), ...] with at least d + deg(B) entries.
inline VectorXd free_response(const CarimaModel& model,
                              const std::vector<double>& y_hist,
                              const std::vector<double>& du_hist, int N) {
  if (N < 1) throw std::invalid_argument("free_response: N must be >= 1");
  const int na = model.a.degree();
  const int nb = model.b.degree();
  const int d = model.delay;
  if (static_cast<int>(y_hist.size()) < na + 1)
    throw std::invalid_argument("free_response: y history too short");
  if (static_cast<int>(du_hist.size()) < d + nb)
    throw std::invalid_argument("free_response: du history too short");

  DiophantineLadder ladder(a_tilde(model.a));
  VectorXd f = VectorXd::Zero(N);
  for (int j = 1; j <= d + N; ++j) {
    if (j > 1) ladder.advance();
    if (j <= d) continue;  // predictions start at t+d+1
    const int row = j - d;  // 1-based horizon index

    double fj = 0.0;
    const Polynomial& F = ladder.f();
    for (std::size_t k = 0; k < F.coeffs.size(); ++k)
      fj += F.coeffs[k] * y_hist[k];

    // Tail of G_j = E_j B beyond the first `row` coefficients hits past du.
    const Polynomial Gj = poly_mul(ladder.e(), model.b);
    for (int l = 0; row + l <= Gj.degree(); ++l)
      fj += Gj.coeffs[row + l] * du_hist[l];

    f[row - 1] = fj;
  }
  return f;
}

/// GPC quadratic program over x = (du(t), ..., du(t+Nu-1)) together with
/// the pieces it was assembled from.
struct GpcProblem {
  MatrixXd gamma;
  VectorXd f;
  VectorXd w;
  double f0 = 0.0;
  double u_prev = 0.0;
  QpProblem qp;
};

/// Assembles G = 2(delta Gamma'Gamma + eta I), c = 2 delta Gamma'(f - w),
/// f0 = delta (f-w)'(f-w), and the amplitude constraints
/// u_min <= u_prev + sum_{i<=k} du_i <= u_max stacked as Ax >= b with
/// A = [L; -L] for the lower-triangular ones matrix L. Optional rate bounds
/// append identity blocks.
inline GpcProblem build_qp(const MatrixXd& gamma, const VectorXd& f,
                           const VectorXd& w, double eta, double u_prev,
                           double u_min, double u_max, double delta = 1.0,
                           std::optional<std::pair<double, double>> rate_bounds = {}) {
  const Eigen::Index N = gamma.rows();
  const Eigen::Index nu = gamma.cols();
  if (f.size() != N || w.size() != N)
    throw std::invalid_argument("build_qp: f, w must have Gamma's row count");
  if (eta < 0.0 || delta < 0.0)
    throw std::invalid_argument("build_qp: weights must be >= 0");
  if (!(u_min < u_max)) throw std::invalid_argument("build_qp: need u_min < u_max");
  if (u_prev < u_min || u_prev > u_max)
    throw std::invalid_argument("build_qp: u_prev outside [u_min, u_max]");

  const VectorXd err = f - w;
  MatrixXd G = 2.0 * (delta * gamma.transpose() * gamma +
                      eta * MatrixXd::Identity(nu, nu));
  VectorXd c = 2.0 * delta * gamma.transpose() * err;
  const double f0 = delta * err.dot(err);

  const MatrixXd L = MatrixXd::Ones(nu, nu).triangularView<Eigen::Lower>();
  Eigen::Index m = 2 * nu + (rate_bounds ? 2 * nu : 0);
  MatrixXd A(m, nu);
  VectorXd b(m);
  A.topRows(nu) = L;
  A.middleRows(nu, nu) = -L;
  b.head(nu).setConstant(u_min - u_prev);
  b.segment(nu, nu).setConstant(-u_max + u_prev);
  if (rate_bounds) {
    A.middleRows(2 * nu, nu) = MatrixXd::Identity(nu, nu);
    A.bottomRows(nu) = -MatrixXd::Identity(nu, nu);
    b.segment(2 * nu, nu).setConstant(rate_bounds->first);
    b.tail(nu).setConstant(-rate_bounds->second);
  }

  return GpcProblem{gamma, f, w, f0, u_prev,
                    QpProblem(std::move(G), std::move(c), std::move(A), std::move(b))};
}

inline GpcProblem build_qp(const MatrixXd& gamma, const VectorXd& f,
                           const VectorXd& w, const GpcConfig& cfg, double u_prev) {
  cfg.validate();
  return build_qp(gamma, f, w, cfg.eta, u_prev, cfg.u_min, cfg.u_max, cfg.delta,
                  cfg.rate_bounds);
}

/// J = 1/2 x'Gx + c'x + f0.
inline double gpc_cost(const VectorXd& x, const MatrixXd& G, const VectorXd& c,
                       double f0) {
  if (G.rows() != x.size() || G.cols() != x.size() || c.size() != x.size())
    throw std::invalid_argument("gpc_cost: dimension mismatch");
  return 0.5 * x.dot(G * x) + c.dot(x) + f0;
}

}  // namespace gpcqp
