#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "scuc/lp_model.hpp"
#include "scuc/network.hpp"
#include "scuc/scenarios.hpp"
#include "scuc/system_case.hpp"

namespace scuc {

/// Here-and-now decisions: on/off status u, start-ups y and shut-downs z (gen x hour, 0/1).
struct Commitment {
  Eigen::MatrixXd u;
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;

  /// Derives y and z from u and the initial status of each unit.
  static Commitment from_status(const SystemCase& system, const Eigen::MatrixXd& u);

  [[nodiscard]] int generators() const { return static_cast<int>(u.rows()); }
  [[nodiscard]] int hours() const { return static_cast<int>(u.cols()); }
  /// u, y, z stacked row-major per matrix; the layout of FirstStageLayout.
  [[nodiscard]] Eigen::VectorXd flatten() const;
  static Commitment unflatten(const Eigen::VectorXd& flat, int generators, int hours);

  /// Empty when every first-stage constraint holds, else a description of the first violation.
  [[nodiscard]] std::string violation(const SystemCase& system) const;
  friend bool operator==(const Commitment& a, const Commitment& b) {
    return a.u == b.u && a.y == b.y && a.z == b.z;
  }
};

/// Column positions of u, y, z inside a model.
struct FirstStageLayout {
  int generators = 0;
  int hours = 0;
  int offset = 0;

  [[nodiscard]] int size() const { return 3 * generators * hours; }
  [[nodiscard]] int u(int g, int t) const { return offset + g * hours + t; }
  [[nodiscard]] int y(int g, int t) const { return offset + generators * hours + g * hours + t; }
  [[nodiscard]] int z(int g, int t) const { return offset + 2 * generators * hours + g * hours + t; }
};

/// Adds u, y, z binaries with start-up/shut-down costs and the scenario-independent
/// unit commitment constraints (transitions, exclusivity, initial and min up/down).
FirstStageLayout add_first_stage(LpModel& model, const SystemCase& system);

Commitment extract_commitment(const FirstStageLayout& layout, std::span<const double> x);

/// Start-up plus shut-down cost of a commitment.
double commitment_cost(const SystemCase& system, const Commitment& commitment);

struct SecondStageOptions {
  /// $/MW on every elastic slack.
  double penalty = 1e4;
  /// Start without network rows and add violated ones until none remain.
  bool lazy_network = false;
  double violation_tolerance = 1e-6;
};

/// Dispatch block of one scenario across all contingencies. Built either
/// against first-stage columns of the same model (extensive form) or with a
/// fixed commitment moved to the right-hand side (subproblem).
///
/// Every block is elastic: capacity bounds, ramps and line limits carry
/// penalised slacks, power balance is hard. Cost is probability-weighted
/// base-case energy plus unweighted penalties.
class SecondStageBlock {
 public:
  SecondStageBlock(const SystemCase& system, const std::vector<ShiftFactors>& shift_factors,
                   const Eigen::MatrixXd& demand, double probability, const SecondStageOptions& options);

  /// Extensive-form mode: links to the given first-stage columns.
  void build(LpModel& model, const FirstStageLayout& layout, bool with_network);
  /// Subproblem mode: the commitment is fixed.
  void build(LpModel& model, const Commitment& fixed, bool with_network);

  /// Adds the missing network rows violated by `x`; returns how many were added.
  int add_violated_network_rows(LpModel& model, std::span<const double> x);
  [[nodiscard]] int network_rows() const { return network_rows_; }

  /// Subgradient of the block objective w.r.t. the flattened (u, y, z), from row duals.
  [[nodiscard]] Eigen::VectorXd first_stage_gradient(std::span<const double> duals) const;

  /// Base-case dispatch (gen x hour).
  [[nodiscard]] Eigen::MatrixXd dispatch(std::span<const double> x, int contingency = 0) const;
  /// Line flows of one contingency (line x hour).
  [[nodiscard]] Eigen::MatrixXd flows(std::span<const double> x, int contingency) const;
  /// Sum of all slack values (MW).
  [[nodiscard]] double total_slack(std::span<const double> x) const;
  /// Objective contribution of this block at x.
  [[nodiscard]] double cost(std::span<const double> x) const;

  [[nodiscard]] int p(int c, int g, int t) const { return block_p0_[c] + g * T_ + t; }
  /// Lazy subproblems create a contingency's dispatch block on its first violation;
  /// until then the base-case dispatch stands in for it.
  [[nodiscard]] bool has_block(int c) const { return block_p0_[c] >= 0; }
  [[nodiscard]] int blocks() const;

 private:
  struct Term {
    int row;
    int first_stage;  // flat index into (u, y, z)
    double coefficient;
  };

  void build_impl(LpModel& model, const FirstStageLayout* layout, const Commitment* fixed, bool with_network);
  void add_row(LpModel& model, std::vector<int> idx, std::vector<double> val, RowSense sense, double rhs,
               const std::vector<std::pair<int, double>>& first_stage, const std::string& name);
  void add_contingency_block(LpModel& model, int c);
  void add_network_row(LpModel& model, int c, int l, int t, bool upper);
  int line_slack(LpModel& model, int l, int t);

  const SystemCase& system_;
  const std::vector<ShiftFactors>& sf_;
  Eigen::MatrixXd demand_;
  double probability_;
  SecondStageOptions options_;
  int G_;
  int T_;
  int C_;

  std::optional<FirstStageLayout> layout_;
  const Commitment* fixed_ = nullptr;
  Eigen::VectorXd fixed_flat_;
  std::vector<int> block_p0_;
  int nu0_ = 0;
  int gamma0_ = 0;
  int mu0_ = 0;
  int ramp_up0_ = 0;
  int ramp_down0_ = 0;
  std::map<std::pair<int, int>, int> line_slack_;
  std::map<std::tuple<int, int, int, bool>, int> network_row_;
  std::vector<Term> links_;
  std::vector<int> slack_vars_;
  int network_rows_ = 0;
};

/// Deterministic equivalent: the first stage once and one elastic second-stage
/// block per scenario, with every network row present.
struct ExtensiveForm {
  LpModel model;
  FirstStageLayout layout;
};

ExtensiveForm build_extensive_form(const SystemCase& system, const ScenarioSet& scenarios,
                                   const std::vector<ShiftFactors>& shift_factors,
                                   const SecondStageOptions& options = {});

struct ExtensiveSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  Commitment commitment;
  /// Per-scenario second-stage cost at the optimum (the converged alpha values).
  std::vector<double> second_stage;
};

/// Builds and solves the extensive form with the given relative MILP gap.
ExtensiveSolution solve_extensive_form(const SystemCase& system, const ScenarioSet& scenarios,
                                       const std::vector<ShiftFactors>& shift_factors,
                                       const SecondStageOptions& options = {}, double relative_gap = 1e-6);

}  // namespace scuc
