#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace scuc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Repo-wide solver tolerances.
struct Tolerances {
  static constexpr double kPrimalFeasibility = 1e-6;
  static constexpr double kDualFeasibility = 1e-6;
  static constexpr double kOracleGap = 1e-6;
  static constexpr double kDefaultGap = 1e-2;
};

enum class RowSense { kLessEqual, kGreaterEqual, kEqual, kRange };

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool binary = false;
  std::string name;
};

/// Sparse linear row. For kRange rows the activity must lie in [lower, upper];
/// for the other senses only `rhs` is used.
struct Constraint {
  std::vector<int> index;
  std::vector<double> value;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
  double range_lower = -kInf;  // kRange only
  std::string name;
};

/// A linear or mixed-binary model in row form.
class LpModel {
 public:
  int add_variable(double lower, double upper, double cost, std::string name = {},
                   bool binary = false);
  int add_binary(double cost, std::string name = {});

  int add_constraint(std::span<const int> index, std::span<const double> value, RowSense sense,
                     double rhs, std::string name = {});
  int add_range(std::span<const int> index, std::span<const double> value, double lower,
                double upper, std::string name = {});

  [[nodiscard]] std::size_t num_variables() const { return vars_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return rows_.size(); }
  [[nodiscard]] bool has_binaries() const;

  [[nodiscard]] const std::vector<Variable>& variables() const { return vars_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return rows_; }
  std::vector<Variable>& mutable_variables() { return vars_; }

  void set_objective_offset(double offset) { offset_ = offset; }
  [[nodiscard]] double objective_offset() const { return offset_; }

  /// Row activity a_i . x for a dense point.
  [[nodiscard]] double activity(std::size_t row, std::span<const double> x) const;
  /// Largest bound or row violation of x.
  [[nodiscard]] double max_violation(std::span<const double> x) const;
  [[nodiscard]] double objective(std::span<const double> x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double offset_ = 0.0;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(SolveStatus status);

struct LpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// d objective / d rhs per row (LP only; empty after a MILP solve).
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  long iterations = 0;
  /// MILP only: best proven bound and node count.
  double best_bound = -kInf;
  long nodes = 0;

  [[nodiscard]] bool optimal() const { return status == SolveStatus::kOptimal; }
};

/// Writes the model in CPLEX LP text format, for debugging against external tools.
std::string to_lp_format(const LpModel& model);

}  // namespace scuc
