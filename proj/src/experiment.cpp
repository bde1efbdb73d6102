#include "timrp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "timrp/lrmc.hpp"
#include "timrp/tim.hpp"

namespace timrp {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

// '#'-prefixed copy of the config, one line per key.
std::string config_preamble(const nlohmann::ordered_json& config) {
  std::string s;
  for (const auto& [key, value] : config.items()) s += "# " + key + "=" + value.dump() + "\n";
  return s;
}

PursuitOptions pursuit_options(const ExperimentConfig& c, InnerSolver kind, std::uint64_t seed) {
  PursuitOptions p;
  p.eps = c.eps;
  p.max_rank = c.max_rank;
  p.inner.grad_tol = c.grad_tol;
  p.inner.max_iter = c.max_iter;
  p.inner_kind = kind;
  p.rank_step_rule = c.rank_step_rule;
  p.seed = seed;
  return p;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::ios_base::failure& e) {
    err << "tim: I/O error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "tim: error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::solve: return "solve";
    case Mode::converge: return "converge";
    case Mode::sweep: return "sweep";
  }
  return "unknown";
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error("trials must be at least 1");
  if (jobs < 1) throw Error("jobs must be at least 1");
  if (!(eps > 0.0)) throw Error("eps must be positive");
  if (max_iter < 0) throw Error("max-iter must be nonnegative");
  if (max_rank < 0) throw Error("max-rank must be nonnegative (0 = dimension)");
  if (solvers.empty()) throw Error("at least one solver is required");
  if (links.empty()) throw Error("at least one link count is required");
  if (mode == Mode::solve && solvers.size() != 1) throw Error("solve takes exactly one solver");
  if (mode != Mode::sweep && links.size() != 1) throw Error("only sweep accepts a list of link counts");
  if (mode == Mode::sweep && topology_file) throw Error("sweep draws random topologies; --topology is not accepted");
  if (mode == Mode::converge && rank < 1) throw Error("converge needs --rank >= 1");
  if (!topology_file) {
    if (users < 1) throw Error("users must be positive");
    for (int L : links)
      if (L < 0 || L > users * (users - 1))
        throw Error("link count " + std::to_string(L) + " outside [0, K(K-1)]");
  } else if (!std::filesystem::exists(*topology_file)) {
    throw std::ios_base::failure("topology file '" + *topology_file + "' does not exist");
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  if (topology_file) j["topology"] = *topology_file;
  else {
    j["users"] = users;
    j["links"] = links;
  }
  std::vector<std::string> names;
  for (InnerSolver s : solvers) names.emplace_back(to_string(s));
  j["solvers"] = names;
  j["rank_step"] = to_string(rank_step_rule);
  if (mode == Mode::converge) j["rank"] = rank;
  j["eps"] = eps;
  j["grad_tol"] = grad_tol;
  j["max_iter"] = max_iter;
  j["max_rank"] = max_rank;
  if (mode == Mode::sweep) {
    j["trials"] = trials;
    j["trial_seed"] = "seed + trial_index";
  }
  j["seed"] = seed;
  return j;
}

TopologyFile load_topology(const ExperimentConfig& c) {
  if (c.topology_file) return parse_topology(read_file(*c.topology_file));
  return TopologyFile{random_topology(c.users, c.links.front(), c.seed), std::nullopt};
}

int cmd_solve(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    c.validate();
    const TopologyFile tf = load_topology(c);
    const StreamAllocation streams = tf.streams.value_or(StreamAllocation::uniform(tf.topology.users()));
    const CompletionProblem problem = build_problem(tf.topology, streams);
    PursuitResult res = riemannian_pursuit(problem, pursuit_options(c, c.solvers.front(), c.seed));

    nlohmann::ordered_json j;
    j["config"] = c.to_json();
    j["dimension"] = problem.dimension();
    j["detected_rank"] = res.detected_rank;
    j["residual"] = res.residual;
    j["success"] = res.success;
    if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const StageRecord& s : res.stages) {
      nlohmann::ordered_json st;
      st["rank"] = s.rank;
      st["f_start"] = s.f_start;
      st["f_end"] = s.f_end;
      st["residual"] = s.residual_end;
      st["iterations"] = s.iterations;
      st["status"] = to_string(s.status);
      if (s.f_after_increase) st["f_after_rank_step"] = *s.f_after_increase;
      stages.push_back(std::move(st));
    }
    j["stages"] = std::move(stages);

    if (res.success) {
      const TimSolution sol = extract_transceivers(res.X, problem, streams, c.eps);
      res.dof = sol.dof;
      const double tol = 10.0 * c.eps * std::sqrt(static_cast<double>(problem.dimension()));
      const AlignmentReport report = verify_alignment(sol, tf.topology, streams, tol);
      j["dof"] = res.dof;
      j["symmetric_dof"] = *std::min_element(res.dof.begin(), res.dof.end());
      j["alignment"] = {{"tolerance", tol},
                        {"pass", report.pass},
                        {"worst_violation", report.worst_violation},
                        {"failures", report.failures}};
      if (c.transceivers_out) {
        nlohmann::ordered_json tj = to_json(sol);
        tj["config"] = c.to_json();
        tj["alignment"] = to_json(report);
        write_file(*c.transceivers_out, tj.dump(2) + "\n");
      }
    } else {
      j["dof"] = nullptr;
    }

    const std::string text = j.dump(2) + "\n";
    if (c.out.empty()) out << text;
    else write_file(c.out, text);
    if (!res.success) err << "tim: " << res.diagnostic << "\n";
    return res.success ? kExitOk : kExitRankCap;
  });
}

std::string trace_csv(const std::vector<TraceRecord>& trace, const nlohmann::ordered_json& config, bool timing) {
  std::string s = config_preamble(config);
  s += "iter,cost,grad_norm,residual,elapsed_ms\r\n";
  for (const TraceRecord& t : trace) {
    s += std::to_string(t.iter) + "," + format_number(t.cost) + "," + format_number(t.grad_norm) + "," +
         format_number(t.residual) + "," + format_number(timing ? t.elapsed_ms : 0.0) + "\r\n";
  }
  return s;
}

int cmd_converge(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    c.validate();
    const TopologyFile tf = load_topology(c);
    const StreamAllocation streams = tf.streams.value_or(StreamAllocation::uniform(tf.topology.users()));
    const CompletionProblem problem = build_problem(tf.topology, streams);
    if (c.rank > problem.dimension()) throw Error("rank exceeds the problem dimension");
    const FixedRankPoint X0 = random_point(problem.dimension(), c.rank, c.seed);
    SolverOptions opts;
    opts.grad_tol = c.grad_tol;
    opts.max_iter = c.max_iter;
    opts.seed = c.seed;

    const std::filesystem::path dir = c.out.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out);
    std::filesystem::create_directories(dir);
    const nlohmann::ordered_json config = c.to_json();
    for (InnerSolver kind : c.solvers) {
      const SolverResult r = run_inner_solver(kind, problem, X0, opts);
      const std::filesystem::path file = dir / (std::string(to_string(kind)) + ".csv");
      nlohmann::ordered_json cfg = config;
      cfg["solver"] = to_string(kind);
      write_file(file.string(), trace_csv(r.trace, cfg, c.timing));
      out << to_string(kind) << ": " << r.iterations << " iterations, residual " << format_number(r.final_residual())
          << ", status " << to_string(r.status) << " -> " << file.string() << "\n";
    }
    return kExitOk;
  });
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& c) {
  c.validate();
  struct Job {
    std::size_t point;
    int links;
    int trial;
    InnerSolver solver;
  };
  std::vector<SweepPoint> points;
  std::vector<Job> jobs;
  for (InnerSolver s : c.solvers) {
    for (int L : c.links) {
      points.push_back({s, L, 0.0, 0.0, c.trials, 0});
      for (int t = 0; t < c.trials; ++t) jobs.push_back({points.size() - 1, L, t, s});
    }
  }

  // One slot per job so aggregation never depends on scheduling.
  std::vector<double> dof(jobs.size(), 0.0);
  std::vector<char> failed(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        const Job& job = jobs[k];
        const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(job.trial);
        const NetworkTopology topo = random_topology(c.users, job.links, seed);
        const CompletionProblem problem = build_problem(topo, StreamAllocation::uniform(c.users));
        const PursuitResult r = riemannian_pursuit(problem, pursuit_options(c, job.solver, seed));
        dof[k] = 1.0 / r.detected_rank;
        failed[k] = r.success ? 0 : 1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int n = std::min<int>(c.jobs, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    SweepPoint& p = points[jobs[k].point];
    p.mean_dof += dof[k];
    p.failures += failed[k];
  }
  for (SweepPoint& p : points) p.mean_dof /= p.trials;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    SweepPoint& p = points[jobs[k].point];
    p.std_dof += (dof[k] - p.mean_dof) * (dof[k] - p.mean_dof);
  }
  for (SweepPoint& p : points) p.std_dof = p.trials > 1 ? std::sqrt(p.std_dof / (p.trials - 1)) : 0.0;
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const nlohmann::ordered_json& config) {
  std::string s = config_preamble(config);
  s += "solver,links,mean_symmetric_dof,std,trials,failures\r\n";
  for (const SweepPoint& p : points) {
    s += std::string(to_string(p.solver)) + "," + std::to_string(p.links) + "," + format_number(p.mean_dof) + "," +
         format_number(p.std_dof) + "," + std::to_string(p.trials) + "," + std::to_string(p.failures) + "\r\n";
  }
  return s;
}

int cmd_sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string text = sweep_csv(run_sweep(c), c.to_json());
    if (c.out.empty()) out << text;
    else write_file(c.out, text);
    return kExitOk;
  });
}

int run_experiment(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  switch (c.mode) {
    case Mode::solve: return cmd_solve(c, out, err);
    case Mode::converge: return cmd_converge(c, out, err);
    case Mode::sweep: return cmd_sweep(c, out, err);
  }
  return kExitError;
}

}  // namespace timrp
