// tim solve|converge|sweep

#include <CLI11.hpp>
#include <iostream>

#include "timrp/experiment.hpp"

namespace {

using timrp::ExperimentConfig;
using timrp::InnerSolver;
using timrp::Mode;

struct Flags {
  std::string topology;
  int users = 0;
  std::vector<int> links;
  std::vector<std::string> solvers;
  std::string rank_step = "variety";
  int rank = 4;
  double eps = 1e-6;
  double grad_tol = 1e-6;
  int max_iter = 500;
  int max_rank = 0;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string transceivers;
  int jobs = 1;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  auto* topo = cmd->add_option("--topology", f.topology, "topology JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--users", f.users, "user count K for a random topology")->excludes(topo);
  cmd->add_option("--eps", f.eps, "target normalized residual")->capture_default_str();
  cmd->add_option("--grad-tol", f.grad_tol, "inner gradient-norm tolerance")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "inner iteration cap")->capture_default_str();
  cmd->add_option("--max-rank", f.max_rank, "rank cap (0 = dimension)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "base seed")->capture_default_str();
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--rank-step", f.rank_step, "rank step rule")
      ->check(CLI::IsMember({"variety", "simple"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological interference management by rank-increasing low-rank matrix completion"};
  app.require_subcommand(1);
  Flags f;

  auto* solve = app.add_subcommand("solve", "detect the minimum rank and extract transceivers");
  add_common(solve, f);
  solve->add_option("--links", f.links, "interference-link count L for a random topology")->expected(1);
  solve->add_option("--solver", f.solvers, "inner solver")->check(CLI::IsMember({"cg", "tr", "als"}))->expected(1);
  solve->add_option("--transceivers", f.transceivers, "write transceiver JSON here");

  auto* converge = app.add_subcommand("converge", "fixed-rank convergence traces, one CSV per solver");
  add_common(converge, f);
  converge->add_option("--links", f.links, "interference-link count L")->expected(1);
  converge->add_option("--solver", f.solvers, "solvers to compare")->check(CLI::IsMember({"cg", "tr", "als"}));
  converge->add_option("--rank", f.rank, "fixed rank")->capture_default_str();
  converge->add_flag("--no-timing", f.no_timing, "write elapsed_ms as 0 for byte-identical output");

  auto* sweep = app.add_subcommand("sweep", "mean symmetric DoF versus interference-link count");
  add_common(sweep, f);
  sweep->add_option("--links", f.links, "link-count grid");
  sweep->add_option("--solver", f.solvers, "inner solvers")->check(CLI::IsMember({"cg", "tr", "als"}));
  sweep->add_option("--trials", f.trials, "topologies per grid point")->capture_default_str();
  sweep->add_option("--jobs", f.jobs, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : timrp::kExitError;
  }

  ExperimentConfig c;
  if (solve->parsed()) c.mode = Mode::solve;
  else if (converge->parsed()) c.mode = Mode::converge;
  else c.mode = Mode::sweep;

  // Mode defaults: the sweep grid on K = 20, the K = 100 / L = 400 convergence instance.
  const bool is_sweep = c.mode == Mode::sweep;
  const bool is_converge = c.mode == Mode::converge;
  if (!f.topology.empty()) c.topology_file = f.topology;
  c.users = f.users > 0 ? f.users : (is_converge ? 100 : 20);
  if (!f.links.empty()) c.links = f.links;
  else if (is_sweep) c.links = {0, 20, 40, 60, 80, 100, 120, 140};
  else c.links = {is_converge ? 400 : 0};
  if (f.solvers.empty()) {
    c.solvers = c.mode == Mode::solve ? std::vector<InnerSolver>{InnerSolver::tr}
                                      : std::vector<InnerSolver>{InnerSolver::tr, InnerSolver::cg, InnerSolver::als};
  } else {
    c.solvers.clear();
    for (const auto& s : f.solvers) c.solvers.push_back(timrp::parse_inner_solver(s));
  }
  c.rank_step_rule = f.rank_step == "simple" ? timrp::RankStepRule::simple : timrp::RankStepRule::variety;
  c.rank = f.rank;
  c.eps = f.eps;
  c.grad_tol = f.grad_tol;
  c.max_iter = f.max_iter;
  c.max_rank = f.max_rank;
  c.trials = f.trials;
  c.seed = f.seed;
  c.out = f.out;
  if (!f.transceivers.empty()) c.transceivers_out = f.transceivers;
  c.jobs = f.jobs;
  c.timing = !f.no_timing;
  return timrp::run_experiment(c, std::cout, std::cerr);
}
