#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gpcqp/closed_loop.hpp"
#include "gpcqp/oracle.hpp"

namespace gpcqp {

struct BenchPlant {
  std::string id;
  Polynomial a;
  Polynomial b;
  int delay = 0;
};

struct BenchSuite {
  std::vector<BenchPlant> plants;
  std::vector<int> horizons;  // control horizons; N = Nu per cell
  int steps = 90;
  double eta = 1.0;
  double u_min = -0.5;
  double u_max = 1.0;
  ReferenceSignal ref = ReferenceSignal({{0, 1.0}, {30, -1.0}, {60, 1.0}});
  SolverParams params;
};

/// The four benchmark plants with the shared input bound -0.5 <= u <= 1,
/// over control horizons {3, 10, 20}.
inline BenchSuite default_suite() {
  BenchSuite s;
  s.plants = {
      {"p1", Polynomial{1.0, -0.8}, Polynomial{0.4, 0.6}, 0},
      {"p2", Polynomial{1.0, -1.0, -0.8}, Polynomial{0.4, 0.6}, 0},
      {"p3", Polynomial{1.0, -1.0, -0.8}, Polynomial{0.04, -6.0}, 0},
      {"p4", Polynomial{1.0, -1.0, 0.675}, Polynomial{0.04, -6.0}, 0},
  };
  s.horizons = {3, 10, 20};
  return s;
}

struct BenchRow {
  std::string plant;
  int nu = 0;
  std::string algo;
  double total_s = 0.0;       // wall clock of the timed closed-loop run
  double mean_step_ms = 0.0;  // mean per-QP solve time
  long iters = 0;             // total IPM iterations over the run
  int failures = 0;           // steps not reporting Converged

  // diagnostics (not part of the CSV schema)
  bool stable = true;
  int max_step_iterations = 0;
  double max_abs_y = 0.0;
  bool oracle_audited = false;
  double oracle_max_dx = 0.0;
  long xi_cap_count = 0;
  long safeguard_count = 0;
  double min_centrality_margin = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;
  std::vector<std::string> notes;
};

/// Runs every (plant, horizon, algorithm) cell: one warm-up run excluded
/// from timing, then a timed run. Cells whose output grows beyond
/// 1000*(1+max|w|) are flagged unstable in the notes. On cells small enough
/// for the active-set oracle (m = 2*Nu <= 16), five sampled per-step QPs are
/// re-solved exactly and the worst |x - x_oracle|_inf recorded.
inline BenchmarkReport run_benchmark(const BenchSuite& suite) {
  BenchmarkReport report;
  double w_peak = 0.0;
  for (const auto& [start, value] : suite.ref.schedule())
    w_peak = std::max(w_peak, std::abs(value));

  for (const auto& plant : suite.plants) {
    const CarimaModel model(plant.a, plant.b, plant.delay);
    for (int nu : suite.horizons) {
      GpcConfig cfg;
      cfg.N = nu;
      cfg.Nu = nu;
      cfg.eta = suite.eta;
      cfg.u_min = suite.u_min;
      cfg.u_max = suite.u_max;

      for (SolverKind kind : {SolverKind::Mehrotra, SolverKind::Revised}) {
        BenchRow row;
        row.plant = plant.id;
        row.nu = nu;
        row.algo = to_string(kind);

        simulate(model, cfg, suite.ref, suite.steps, kind, suite.params);  // warm-up

        std::vector<int> sample_steps = {0, suite.steps / 4, suite.steps / 2,
                                         3 * suite.steps / 4, suite.steps - 1};
        std::vector<std::pair<GpcProblem, VectorXd>> sampled;
        const bool audit = 2 * nu <= 16;
        auto on_step = [&](int t, const GpcProblem& gp, const SolveResult& sol) {
          if (audit && sol.status == SolveStatus::Converged &&
              std::find(sample_steps.begin(), sample_steps.end(), t) !=
                  sample_steps.end())
            sampled.emplace_back(gp, sol.point.x);
        };

        const auto t0 = std::chrono::steady_clock::now();
        const ClosedLoopTrace trace = simulate(model, cfg, suite.ref, suite.steps,
                                               kind, suite.params, on_step);
        row.total_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();

        double ms_sum = 0.0;
        for (const auto& s : trace.steps) {
          ms_sum += s.solve_ms;
          row.iters += s.iterations;
          row.max_step_iterations = std::max(row.max_step_iterations, s.iterations);
          if (s.status != SolveStatus::Converged) ++row.failures;
        }
        row.mean_step_ms = trace.steps.empty() ? 0.0 : ms_sum / trace.steps.size();
        row.max_abs_y = trace.max_abs_y();
        row.stable = std::isfinite(row.max_abs_y) &&
                     row.max_abs_y <= 1000.0 * (1.0 + w_peak) && !trace.aborted;
        row.xi_cap_count = trace.xi_cap_count;
        row.safeguard_count = trace.safeguard_count;
        row.min_centrality_margin = trace.min_centrality_margin;

        if (audit) {
          row.oracle_audited = true;
          for (const auto& [gp, x] : sampled) {
            const OracleSolution os = solve_oracle(gp.qp);
            if (os.status == OracleStatus::Optimal)
              row.oracle_max_dx = std::max(
                  row.oracle_max_dx, (x - os.x).lpNorm<Eigen::Infinity>());
          }
        }
        report.rows.push_back(std::move(row));
      }
    }
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const BenchRow& a, const BenchRow& b) {
              return std::tie(a.plant, a.nu, a.algo) < std::tie(b.plant, b.nu, b.algo);
            });

  for (const auto& r : report.rows)
    if (!r.stable)
      report.notes.push_back("cell (" + r.plant + ", Nu=" + std::to_string(r.nu) +
                             ", " + r.algo +
                             ") is unstable under the default tuning (eta = 1, N = Nu);"
                             " the b = [0.04, -6] plants need eta retuning");
  report.notes.push_back(
      "baseline comparator is the in-repo Mehrotra solver; absolute times are "
      "machine-dependent and not comparable to published figures");
  report.notes.push_back(
      "horizon set {3, 10, 20}: the published layout repeats Nu = 10 in its "
      "third column; 20 matches the trajectory experiment's control horizon");
  return report;
}

inline std::string report_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "plant,Nu,algo,total_s,mean_step_ms,iters,failures\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.total_s, r.mean_step_ms);
    out << r.plant << ',' << r.nu << ',' << r.algo << ',' << buf << ','
        << r.iters << ',' << r.failures << '\n';
  }
  return out.str();
}

/// Human-readable matrix in the published layout: one block row per plant,
/// one line per algorithm, one column per control horizon (total seconds,
/// with mean per-QP milliseconds in parentheses).
inline std::string report_table(const BenchmarkReport& report) {
  std::vector<std::string> plants;
  std::vector<int> horizons;
  for (const auto& r : report.rows) {
    if (std::find(plants.begin(), plants.end(), r.plant) == plants.end())
      plants.push_back(r.plant);
    if (std::find(horizons.begin(), horizons.end(), r.nu) == horizons.end())
      horizons.push_back(r.nu);
  }
  std::sort(horizons.begin(), horizons.end());

  auto find_row = [&](const std::string& plant, int nu,
                      const std::string& algo) -> const BenchRow* {
    for (const auto& r : report.rows)
      if (r.plant == plant && r.nu == nu && r.algo == algo) return &r;
    return nullptr;
  };

  std::ostringstream out;
  out << "plant     algorithm   ";
  for (int nu : horizons) {
    char head[32];
    std::snprintf(head, sizeof(head), "Nu=%-18d", nu);
    out << head;
  }
  out << "\n";
  const std::vector<std::pair<std::string, std::string>> algos = {
      {"revised", "1 (revised)"}, {"mehrotra", "2 (mehrotra)"}};
  for (const auto& plant : plants) {
    for (const auto& [algo, label] : algos) {
      char cell[64];
      std::snprintf(cell, sizeof(cell), "%-10s%-12s", plant.c_str(), label.c_str());
      out << cell;
      for (int nu : horizons) {
        const BenchRow* r = find_row(plant, nu, algo);
        if (!r) {
          out << std::string(22, ' ');
          continue;
        }
        std::snprintf(cell, sizeof(cell), "%8.4fs (%6.3fms)%s ", r->total_s,
                      r->mean_step_ms, r->stable ? " " : "!");
        out << cell;
      }
      out << "\n";
    }
  }
  if (!report.notes.empty()) {
    out << "\nnotes ('!' marks unstable cells):\n";
    for (const auto& n : report.notes) out << "  - " << n << "\n";
  }
  return out.str();
}

}  // namespace gpcqp
