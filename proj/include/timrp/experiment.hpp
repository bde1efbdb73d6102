#pragma once

// Experiment driver behind the `tim` command line tool.

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "timrp/pursuit.hpp"
#include "timrp/topology.hpp"

namespace timrp {

enum class Mode { solve, converge, sweep };

const char* to_string(Mode mode);

struct ExperimentConfig {
  Mode mode = Mode::solve;
  std::optional<std::string> topology_file;
  int users = 20;
  /// Interference-link counts; one value for solve/converge, the grid for sweep.
  std::vector<int> links{0};
  std::vector<InnerSolver> solvers{InnerSolver::tr};
  RankStepRule rank_step_rule = RankStepRule::variety;
  int rank = 4;
  double eps = 1e-6;
  int max_iter = 500;
  double grad_tol = 1e-6;
  int max_rank = 0;
  int trials = 100;
  std::uint64_t seed = 0;
  /// solve: result JSON file (stdout when empty); converge: output directory;
  /// sweep: CSV file (stdout when empty).
  std::string out;
  std::optional<std::string> transceivers_out;
  int jobs = 1;
  bool timing = true;

  /// Throws Error on inconsistent settings.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Exit codes: 0 success, 1 input/output or configuration error, 2 rank cap
/// reached without meeting eps.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRankCap = 2;

int cmd_solve(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_converge(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run_experiment(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Trace as CSV text (header iter,cost,grad_norm,residual,elapsed_ms),
/// preceded by '#' lines carrying the config.
std::string trace_csv(const std::vector<TraceRecord>& trace, const nlohmann::ordered_json& config, bool timing);

struct SweepPoint {
  InnerSolver solver = InnerSolver::tr;
  int links = 0;
  double mean_dof = 0.0;
  double std_dof = 0.0;
  int trials = 0;
  int failures = 0;
};

/// Averaged symmetric DoF over trials for every (solver, link count).
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config);
std::string sweep_csv(const std::vector<SweepPoint>& points, const nlohmann::ordered_json& config);

/// Topology for solve/converge: the file when given, otherwise random from
/// (users, links[0], seed).
TopologyFile load_topology(const ExperimentConfig& config);

/// Fixed-format decimal used in every CSV cell.
std::string format_number(double x);

}  // namespace timrp
