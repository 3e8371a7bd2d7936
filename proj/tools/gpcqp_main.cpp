// gpcqp: solve QP files, run closed-loop GPC simulations, and benchmark the
// two interior-point algorithms.
//
// Exit codes: 0 converged/ok, 1 input error, 2 iteration limit,
// 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gpcqp/gpcqp.hpp"

namespace {

using nlohmann::json;

struct SolverFlags {
  double eps = 1e-8;
  double gamma = 0.1;
  double beta = 0.1;
  int max_iter = 100;

  gpcqp::SolverParams params() const {
    gpcqp::SolverParams p;
    p.epsilon = eps;
    p.gamma = gamma;
    p.beta = beta;
    p.max_iter = max_iter;
    return p;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--eps", f.eps, "termination threshold on y'lambda");
  cmd->add_option("--gamma", f.gamma, "centrality parameter in (0, 1/4)");
  cmd->add_option("--beta", f.beta, "safeguard parameter in [gamma, 1/4)");
  cmd->add_option("--max-iter", f.max_iter, "iteration limit");
}

int status_exit_code(gpcqp::SolveStatus s) {
  switch (s) {
    case gpcqp::SolveStatus::Converged: return 0;
    case gpcqp::SolveStatus::MaxIterations: return 2;
    case gpcqp::SolveStatus::NumericalFailure: return 3;
  }
  return 3;
}

gpcqp::ReferenceSignal parse_ref_schedule(const std::string& spec) {
  std::vector<std::pair<int, double>> schedule;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const std::size_t comma = spec.find(',', pos);
    const std::string item = spec.substr(pos, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - pos);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--ref: expected start:value, got '" + item + "'");
    std::size_t used = 0;
    const int start = std::stoi(item.substr(0, colon), &used);
    if (used != colon)
      throw std::invalid_argument("--ref: bad step index in '" + item + "'");
    const std::string vstr = item.substr(colon + 1);
    const double value = std::stod(vstr, &used);
    if (used != vstr.size())
      throw std::invalid_argument("--ref: bad value in '" + item + "'");
    schedule.emplace_back(start, value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return gpcqp::ReferenceSignal(schedule);
}

int run_solve(const std::string& file, const std::string& algo,
              const SolverFlags& flags, bool as_json) {
  const gpcqp::QpProblem p = gpcqp::parse_qp_file(file);

  json out;
  out["algo"] = algo;
  gpcqp::VectorXd x;
  int exit_code = 0;

  if (algo == "oracle") {
    const auto sol = gpcqp::solve_oracle(p);
    if (sol.status != gpcqp::OracleStatus::Infeasible) {
      x = sol.x;
      out["status"] = "Optimal";
      out["iterations"] = 0;
      out["objective"] = sol.objective;
      out["active_set"] = sol.active_set;
    } else {
      std::cerr << "oracle: problem is infeasible\n";
      return 1;
    }
  } else {
    const auto params = flags.params();
    gpcqp::SolveResult r;
    try {
      r = algo == "mehrotra" ? gpcqp::solve_mehrotra(p, params)
                             : gpcqp::solve_revised(p, params);
    } catch (const std::invalid_argument& e) {
      // e.g. the default start could not be centered into the neighborhood
      std::cerr << "solver: " << e.what() << "\n";
      return 3;
    }
    x = r.point.x;
    out["status"] = gpcqp::to_string(r.status);
    out["iterations"] = r.iterations;
    out["objective"] = p.objective(r.point.x);
    exit_code = status_exit_code(r.status);
  }
  out["x"] = std::vector<double>(x.data(), x.data() + x.size());

  if (as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "status: " << out["status"].get<std::string>() << "\n"
              << "iterations: " << out["iterations"].get<int>() << "\n"
              << "objective: " << gpcqp::fmt12(out["objective"].get<double>()) << "\n"
              << "x:";
    for (Eigen::Index i = 0; i < x.size(); ++i) std::cout << ' ' << gpcqp::fmt12(x[i]);
    std::cout << "\n";
  }
  return exit_code;
}

int run_gpc(const std::string& file, const std::string& ref_spec, int steps,
            const std::string& algo, const std::string& out_dir,
            const SolverFlags& flags) {
  const gpcqp::ModelFile mf = gpcqp::parse_model_file(file);
  const auto ref = parse_ref_schedule(ref_spec);
  const auto kind = algo == "mehrotra" ? gpcqp::SolverKind::Mehrotra
                                       : gpcqp::SolverKind::Revised;

  const auto trace = gpcqp::simulate(mf.model, mf.config, ref, steps, kind,
                                     flags.params());
  gpcqp::export_trace(trace, out_dir);

  int violations = 0, converged = 0;
  double abs_err_sum = 0.0, ms_sum = 0.0;
  for (const auto& s : trace.steps) {
    if (s.u < mf.config.u_min - 1e-8 || s.u > mf.config.u_max + 1e-8) ++violations;
    if (s.status == gpcqp::SolveStatus::Converged) ++converged;
    abs_err_sum += std::abs(s.y - s.w);
    ms_sum += s.solve_ms;
  }
  const auto n = static_cast<double>(trace.steps.size());
  std::cout << "steps: " << trace.steps.size() << (trace.aborted ? " (aborted)" : "")
            << "\n"
            << "converged steps: " << converged << "/" << trace.steps.size() << "\n"
            << "input-bound violations (>1e-8): " << violations << "\n"
            << "mean |y - w|: " << gpcqp::fmt12(abs_err_sum / n) << "\n"
            << "final |y - w|: "
            << gpcqp::fmt12(std::abs(trace.steps.back().y - trace.steps.back().w))
            << "\n"
            << "mean solve time: " << gpcqp::fmt12(ms_sum / n) << " ms\n"
            << "outputs: " << out_dir << "/{r.dat,y.dat,ureal.dat,deltaU.dat,trace.csv}\n";
  return trace.aborted ? 3 : 0;
}

gpcqp::BenchSuite parse_suite_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gpcqp::ParseError(path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw gpcqp::ParseError(path + ": " + e.what());
  }

  gpcqp::BenchSuite suite = gpcqp::default_suite();
  try {
    if (doc.contains("plants")) {
      suite.plants.clear();
      for (const auto& pl : doc.at("plants")) {
        gpcqp::BenchPlant plant;
        plant.id = pl.at("id").get<std::string>();
        plant.a = gpcqp::Polynomial(pl.at("a").get<std::vector<double>>());
        plant.b = gpcqp::Polynomial(pl.at("b").get<std::vector<double>>());
        plant.delay = pl.value("d", 0);
        suite.plants.push_back(std::move(plant));
      }
    }
    if (doc.contains("horizons"))
      suite.horizons = doc.at("horizons").get<std::vector<int>>();
    suite.steps = doc.value("steps", suite.steps);
    suite.eta = doc.value("eta", suite.eta);
    suite.u_min = doc.value("umin", suite.u_min);
    suite.u_max = doc.value("umax", suite.u_max);
    if (doc.contains("ref")) {
      std::vector<std::pair<int, double>> schedule;
      for (const auto& item : doc.at("ref"))
        schedule.emplace_back(item.at(0).get<int>(), item.at(1).get<double>());
      suite.ref = gpcqp::ReferenceSignal(schedule);
    }
  } catch (const json::exception& e) {
    throw gpcqp::ParseError(path + ": " + e.what());
  }
  if (suite.plants.empty() || suite.horizons.empty())
    throw gpcqp::ParseError(path + ": suite needs at least one plant and one horizon");
  return suite;
}

int run_bench(const std::optional<std::string>& suite_file, const std::string& out_csv) {
  const gpcqp::BenchSuite suite =
      suite_file ? parse_suite_file(*suite_file) : gpcqp::default_suite();
  const auto report = gpcqp::run_benchmark(suite);

  std::ofstream out(out_csv);
  if (!out) {
    std::cerr << "bench: cannot open " << out_csv << " for writing\n";
    return 1;
  }
  out << gpcqp::report_csv(report);
  if (!out) {
    std::cerr << "bench: write failed on " << out_csv << "\n";
    return 1;
  }
  std::cout << gpcqp::report_table(report) << "\nreport written to " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex QP solvers (Mehrotra and revised predictor-corrector) "
               "with a GPC closed-loop front end"};
  app.require_subcommand(1);

  // solve
  std::string problem_file, solve_algo = "revised";
  SolverFlags solve_flags;
  bool as_json = false;
  auto* solve = app.add_subcommand("solve", "solve a QP problem file");
  solve->add_option("problem_file", problem_file, "QP problem file")->required();
  solve->add_option("--algo", solve_algo, "mehrotra | revised | oracle")
      ->check(CLI::IsMember({"mehrotra", "revised", "oracle"}));
  add_solver_flags(solve, solve_flags);
  solve->add_flag("--json", as_json, "emit a machine-readable JSON object");

  // gpc
  std::string model_file, ref_spec = "0:1", gpc_algo = "revised", out_dir = ".";
  int steps = 90;
  SolverFlags gpc_flags;
  auto* gpc = app.add_subcommand("gpc", "run a closed-loop GPC simulation");
  gpc->add_option("model_file", model_file, "GPC model file")->required();
  gpc->add_option("--ref", ref_spec,
                  "piecewise-constant reference, e.g. 0:1,45:-1")
      ->capture_default_str();
  gpc->add_option("--steps", steps, "number of closed-loop steps")
      ->capture_default_str();
  gpc->add_option("--algo", gpc_algo, "mehrotra | revised")
      ->check(CLI::IsMember({"mehrotra", "revised"}));
  gpc->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_solver_flags(gpc, gpc_flags);

  // bench
  std::optional<std::string> suite_file;
  std::string out_csv = "report.csv";
  auto* bench = app.add_subcommand(
      "bench", "run the benchmark matrix (default: four plants x {3,10,20})");
  bench->add_option("suite_file", suite_file, "JSON suite description");
  bench->add_option("--out", out_csv, "CSV report path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return run_solve(problem_file, solve_algo, solve_flags, as_json);
    if (gpc->parsed()) return run_gpc(model_file, ref_spec, steps, gpc_algo, out_dir, gpc_flags);
    return run_bench(suite_file, out_csv);
  } catch (const gpcqp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
