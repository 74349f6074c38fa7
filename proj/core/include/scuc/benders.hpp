#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scuc/cut_pool.hpp"
#include "scuc/network.hpp"
#include "scuc/scenarios.hpp"
#include "scuc/solver.hpp"
#include "scuc/system_case.hpp"
#include "scuc/uc_model.hpp"

namespace scuc {

/// Master problem: first stage, one alpha per scenario above its floor, and the given cuts.
struct MasterProblem {
  LpModel model;
  FirstStageLayout layout;
  std::vector<int> alpha;
  std::vector<int> cut_ids;  // in row order
};

MasterProblem build_master(const SystemCase& system, std::span<const double> floors,
                           std::span<const Cut* const> cuts);
void add_cut_row(MasterProblem& master, const Cut& cut);

struct MasterSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  Commitment commitment;
  Eigen::VectorXd point;  // flattened commitment
  std::vector<double> alpha;
};

MasterSolution solve_master(const MasterProblem& master, const SolverBackend& backend = default_backend(),
                            double relative_gap = 1e-9);

struct SubproblemResult {
  int scenario = 0;
  SolveStatus status = SolveStatus::kInfeasible;
  /// Probability-weighted energy cost plus slack penalties.
  double objective = 0.0;
  Eigen::MatrixXd dispatch;  // base case, gen x hour
  double total_slack = 0.0;
  /// Duals mapped onto the flattened (u, y, z).
  Eigen::VectorXd gradient;
  int network_rows = 0;
  int solves = 0;
};

/// Always-feasible dispatch LP of one scenario at a fixed commitment. With
/// lazy network handling the LP starts without line rows and adds the violated
/// ones until every line of every contingency is within its limit.
SubproblemResult solve_subproblem(const SystemCase& system, const ScenarioSet& scenarios, int scenario,
                                  const Commitment& commitment, const std::vector<ShiftFactors>& shift_factors,
                                  const SecondStageOptions& options = {},
                                  const SolverBackend& backend = default_backend());

Cut make_cut(const SubproblemResult& result, const Commitment& anchor, int iteration);

/// (UB - LB) / |LB|; throws std::domain_error when |LB| < 1e-9.
double gap(double lb, double ub);

enum class Strategy { kConventional, kRegression, kClassification, kCombined };

const char* to_string(Strategy strategy);
Strategy parse_strategy(const std::string& name);
[[nodiscard]] inline bool uses_regressor(Strategy s) {
  return s == Strategy::kRegression || s == Strategy::kCombined;
}
[[nodiscard]] inline bool uses_classifier(Strategy s) {
  return s == Strategy::kClassification || s == Strategy::kCombined;
}

/// Keep flags for the new cuts of one iteration (true = keep).
using CutClassifier = std::function<std::vector<bool>(std::span<const Cut>)>;

struct RunConfig {
  double epsilon = Tolerances::kDefaultGap;
  int max_iterations = 400;
  double delta = 1.0;
  int retention = 2;
  /// Constant floor on every alpha when no predicted floors are given.
  double alpha_floor = -1e5;
  /// Per-scenario floors (regression strategies): alpha_eta * predicted alpha.
  std::vector<double> floors;
  CutClassifier classifier;
  SecondStageOptions subproblem;
  double master_gap = 1e-9;
};

struct IterationRecord {
  int k = 0;
  double master_objective = 0.0;
  double lb = 0.0;  // best so far
  double ub = 0.0;  // best so far
  double gap = 0.0;
  int cuts_added = 0;
  int cuts_retained = 0;  // pool size after this iteration's filtering
  double mp_seconds = 0.0;
  double sp_seconds = 0.0;
};

struct RunReport {
  Strategy strategy = Strategy::kConventional;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double objective = 0.0;  // best upper bound
  double lower_bound = 0.0;
  Commitment commitment;
  std::vector<Eigen::MatrixXd> dispatch;  // per scenario, at the best iterate
  std::vector<double> final_alpha;         // master alpha at the last iteration
  std::vector<double> floors;
  /// Master point (flattened commitment) and alpha values of every iteration.
  std::vector<Eigen::VectorXd> master_points;
  std::vector<std::vector<double>> master_alpha;
  CutPool pool;
  PoolStats stats;

  [[nodiscard]] double final_gap() const { return iterations.empty() ? 0.0 : iterations.back().gap; }
};

/// Multi-cut Benders loop. Regression strategies use cfg.floors and the
/// usefulness criterion with one-iteration delay; classification strategies
/// filter new cuts with cfg.classifier before they reach the master. Cuts
/// generated at a commitment the master already visited are exempt from both
/// filters, so filtering cannot make the loop cycle.
RunReport run(Strategy strategy, const SystemCase& system, const ScenarioSet& scenarios,
              const std::vector<ShiftFactors>& shift_factors, const RunConfig& cfg,
              const SolverBackend& backend = default_backend());

/// Structured text: a header block and one row per iteration. Wall times are
/// omitted when `with_timings` is false so the output is reproducible.
void write_run_report(std::ostream& out, const RunReport& report, bool with_timings = true);

}  // namespace scuc
