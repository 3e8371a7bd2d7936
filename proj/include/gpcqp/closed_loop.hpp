#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpcqp/gpc.hpp"
#include "gpcqp/mehrotra.hpp"
#include "gpcqp/revised.hpp"

namespace gpcqp {

/// Piecewise-constant reference: list of (start_step, value) with strictly
/// increasing starts, first at step 0; constant extension past the end.
class ReferenceSignal {
public:
  explicit ReferenceSignal(std::vector<std::pair<int, double>> schedule)
      : schedule_(std::move(schedule)) {
    if (schedule_.empty() || schedule_.front().first != 0)
      throw std::invalid_argument("ReferenceSignal: first start_step must be 0");
    for (std::size_t i = 1; i < schedule_.size(); ++i)
      if (schedule_[i].first <= schedule_[i - 1].first)
        throw std::invalid_argument("ReferenceSignal: start_steps must be strictly increasing");
  }

  static ReferenceSignal constant(double v) { return ReferenceSignal({{0, v}}); }

  double at(int t) const {
    double v = schedule_.front().second;
    for (const auto& [start, value] : schedule_) {
      if (start > t) break;
      v = value;
    }
    return v;
  }

  const std::vector<std::pair<int, double>>& schedule() const { return schedule_; }

private:
  std::vector<std::pair<int, double>> schedule_;
};

enum class SolverKind { Mehrotra, Revised };

inline std::string to_string(SolverKind k) {
  return k == SolverKind::Mehrotra ? "mehrotra" : "revised";
}

struct StepRecord {
  int t = 0;
  double w = 0.0;
  double y = 0.0;
  double u = 0.0;
  double du = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  double solve_ms = 0.0;
};

struct ClosedLoopTrace {
  std::vector<StepRecord> steps;
  bool aborted = false;  // solver NumericalFailure cut the run short

  // aggregated revised-solver diagnostics over all steps
  long xi_cap_count = 0;
  long safeguard_count = 0;
  double min_centrality_margin = 0.0;

  double max_abs_y() const {
    double v = 0.0;
    for (const auto& s : steps) v = std::max(v, std::abs(s.y));
    return v;
  }
};

/// Receding-horizon GPC simulation. Each step builds the horizon QP from
/// the current histories, solves it cold with the selected algorithm,
/// applies the first control increment, and advances the plant one step via
/// the noise-free CARIMA recursion A-tilde y = B z^-d du. The optional
/// callback sees every step's QP and solver result (used by the benchmark's
/// oracle audit).
inline ClosedLoopTrace simulate(
    const CarimaModel& model, const GpcConfig& cfg, const ReferenceSignal& ref,
    int T, SolverKind solver, const SolverParams& params = {},
    const std::function<void(int, const GpcProblem&, const SolveResult&)>& on_step = {}) {
  cfg.validate();
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");

  const int na = model.a.degree();
  const int nb = model.b.degree();
  const int d = model.delay;
  const Polynomial atil = a_tilde(model.a);

  const DynamicMatrix dm = dynamic_matrix(model, cfg.N, cfg.Nu);

  std::vector<double> y_hist(static_cast<std::size_t>(na) + 2, 0.0);
  std::vector<double> du_hist(static_cast<std::size_t>(d + nb) + 1, 0.0);
  double u = 0.0;  // u(-1) = 0, interior of the input bounds

  ClosedLoopTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(T));

  for (int t = 0; t < T; ++t) {
    VectorXd w(cfg.N);
    for (int j = 1; j <= cfg.N; ++j) w[j - 1] = ref.at(t + d + j);
    const VectorXd f = free_response(model, y_hist, du_hist, cfg.N);

    StepRecord rec;
    rec.t = t;
    rec.w = ref.at(t);
    rec.y = y_hist[0];

    // Converged IPM iterates can leave u outside the box by ~1e-9; the
    // stance the next QP is built from is clamped, the trace keeps true u.
    const double stance = std::clamp(u, cfg.u_min, cfg.u_max);
    GpcProblem gp = build_qp(dm.gamma, f, w, cfg, stance);
    SolveResult sol;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sol = solver == SolverKind::Mehrotra ? solve_mehrotra(gp.qp, params)
                                           : solve_revised(gp.qp, params);
    } catch (const std::invalid_argument&) {
      sol.status = SolveStatus::NumericalFailure;
      sol.point.x = VectorXd::Zero(cfg.Nu);
    }
    rec.solve_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0).count();
    rec.iterations = sol.iterations;
    rec.status = sol.status;

    for (const auto& it : sol.revised_iters) {
      if (it.capped) ++trace.xi_cap_count;
      if (it.branch == StepBranch::Safeguard) ++trace.safeguard_count;
      trace.min_centrality_margin =
          std::min(trace.min_centrality_margin, it.centrality_margin);
    }
    if (on_step) on_step(t, gp, sol);

    if (sol.status == SolveStatus::NumericalFailure) {
      rec.du = 0.0;
      rec.u = u;
      trace.steps.push_back(rec);
      trace.aborted = true;
      break;
    }

    rec.du = sol.point.x[0];
    u += rec.du;
    rec.u = u;
    trace.steps.push_back(rec);

    // Plant update: y(t+1) = -sum atil_k y(t+1-k) + sum b_k du(t-d-k).
    du_hist.insert(du_hist.begin(), rec.du);
    du_hist.pop_back();
    double y_next = 0.0;
    for (int k = 1; k <= atil.degree(); ++k) y_next -= atil.coeffs[k] * y_hist[k - 1];
    for (int k = 0; k <= nb; ++k) y_next += model.b.coeffs[k] * du_hist[d + k];
    y_hist.insert(y_hist.begin(), y_next);
    y_hist.pop_back();
  }
  return trace;
}

/// Fixed 12-significant-digit formatting used for all exported reals, so
/// identical traces serialize to identical bytes.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Writes r.dat, y.dat, ureal.dat, deltaU.dat (step/value pairs) and
/// trace.csv into the directory, creating it if needed.
inline void export_trace(const ClosedLoopTrace& trace, const std::string& directory) {
  if (trace.steps.empty()) throw std::invalid_argument("export_trace: empty trace");
  namespace fs = std::filesystem;
  fs::create_directories(directory);

  auto write_series = [&](const std::string& name, auto field) {
    const fs::path path = fs::path(directory) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trace: cannot open " + path.string());
    for (const auto& s : trace.steps)
      out << s.t << ' ' << fmt12(field(s)) << '\n';
    if (!out) throw std::runtime_error("export_trace: write failed on " + path.string());
  };
  write_series("r.dat", [](const StepRecord& s) { return s.w; });
  write_series("y.dat", [](const StepRecord& s) { return s.y; });
  write_series("ureal.dat", [](const StepRecord& s) { return s.u; });
  write_series("deltaU.dat", [](const StepRecord& s) { return s.du; });

  const fs::path csv = fs::path(directory) / "trace.csv";
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("export_trace: cannot open " + csv.string());
  out << "t,w,y,u,du,iters,status,solve_ms\n";
  for (const auto& s : trace.steps)
    out << s.t << ',' << fmt12(s.w) << ',' << fmt12(s.y) << ',' << fmt12(s.u) << ','
        << fmt12(s.du) << ',' << s.iterations << ',' << to_string(s.status) << ','
        << fmt12(s.solve_ms) << '\n';
  if (!out) throw std::runtime_error("export_trace: write failed on " + csv.string());
}

/// Reads a trace.csv written by export_trace.
inline ClosedLoopTrace parse_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,w,y,u,du,iters,status,solve_ms")
    throw std::runtime_error("parse_trace_csv: bad header in " + path);

  ClosedLoopTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw std::runtime_error("parse_trace_csv: bad row in " + path + ": " + line);
    StepRecord s;
    s.t = std::stoi(cells[0]);
    s.w = std::stod(cells[1]);
    s.y = std::stod(cells[2]);
    s.u = std::stod(cells[3]);
    s.du = std::stod(cells[4]);
    s.iterations = std::stoi(cells[5]);
    if (cells[6] == "Converged") s.status = SolveStatus::Converged;
    else if (cells[6] == "MaxIterations") s.status = SolveStatus::MaxIterations;
    else if (cells[6] == "NumericalFailure") s.status = SolveStatus::NumericalFailure;
    else throw std::runtime_error("parse_trace_csv: bad status in " + path + ": " + cells[6]);
    s.solve_ms = std::stod(cells[7]);
    trace.steps.push_back(s);
  }
  return trace;
}

}  // namespace gpcqp
