#pragma once

// Dense bounded-variable simplex tableau. Internal to the solver backend.

#include <cstdint>
#include <vector>

#include "scuc/lp_model.hpp"

namespace scuc::detail {

enum class ColStatus : std::uint8_t { kBasic, kLower, kUpper };

class Tableau {
 public:
  explicit Tableau(const LpModel& model);

  /// Two-phase primal simplex from the slack/artificial basis.
  SolveStatus solve_primal(long max_iterations);
  /// Dual simplex from a dual-feasible basis (after bound tightening).
  SolveStatus solve_dual(long max_iterations);

  /// Tightens the bounds of an original variable; the basis stays dual feasible
  /// when the variable becomes fixed.
  void fix_variable(int var, double value);

  /// Recomputes basic values and duals from a fresh LU factorization of the basis.
  void refine();

  [[nodiscard]] double objective() const;
  [[nodiscard]] std::vector<double> primal() const;
  [[nodiscard]] std::vector<double> duals() const;
  [[nodiscard]] std::vector<double> reduced_costs() const;
  [[nodiscard]] long iterations() const { return iterations_; }

 private:
  struct VarMap {
    int pos = -1;
    int neg = -1;  // second column of a split free variable
    double shift = 0.0;
    double sign = 1.0;
    double scale = 1.0;  // column scaling: x = shift + sign * scale * z
  };

  [[nodiscard]] double value_of(int col) const;
  [[nodiscard]] double& at(int row, int col) { return t_[static_cast<std::size_t>(row) * cols_ + col]; }
  [[nodiscard]] double at(int row, int col) const {
    return t_[static_cast<std::size_t>(row) * cols_ + col];
  }

  void compute_reduced_costs(const std::vector<double>& cost);
  /// Rebuilds the tableau, basic values and reduced costs from an LU
  /// factorization of the current basis. False when the basis is singular.
  bool reinvert(const std::vector<double>& cost);
  void pivot(int row, int col);
  SolveStatus run_primal(const std::vector<double>& cost, long max_iterations);
  void drive_out_artificials();
  /// Dual simplex iterations until the basic values are within bounds.
  SolveStatus run_dual(long max_iterations);
  /// Largest relative row residual of the current basic solution.
  [[nodiscard]] double residual() const;
  /// Re-solves from a reinverted basis while drift breaks the row equations.
  SolveStatus verified(SolveStatus status, long max_iterations);

  int rows_ = 0;
  int cols_ = 0;
  int first_artificial_ = 0;
  std::vector<VarMap> var_map_;
  std::vector<std::vector<std::pair<int, double>>> a_cols_;  // converted columns
  std::vector<double> b_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> cost_;
  std::vector<double> row_flip_;
  std::vector<double> row_scale_;
  std::vector<int> identity_col_;
  double offset_ = 0.0;

  std::vector<double> t_;
  std::vector<double> xb_;
  std::vector<int> basis_;
  std::vector<ColStatus> status_;
  std::vector<double> d_;
  std::vector<double> refined_y_;
  long iterations_ = 0;
};

}  // namespace scuc::detail
