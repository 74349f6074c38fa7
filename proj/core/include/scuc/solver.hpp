#pragma once

#include <memory>
#include <string_view>

#include "scuc/lp_model.hpp"

namespace scuc {

struct LpOptions {
  /// 0 selects a size-based default.
  long max_iterations = 0;
};

struct MilpOptions {
  double relative_gap = Tolerances::kOracleGap;
  double absolute_gap = 1e-9;
  double integrality_tolerance = 1e-6;
  long node_limit = 500000;
};

/// Bounded primal simplex with a final LU refinement of the optimal basis.
LpSolution solve_lp(const LpModel& model, const LpOptions& options = {});

/// Depth-first branch and bound over the binary variables, warm-starting every
/// child from its parent's basis with the dual simplex.
LpSolution solve_milp(const LpModel& model, const MilpOptions& options = {});

/// Boundary between the decomposition code and an LP/MIP engine.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual LpSolution solve_lp(const LpModel& model) const = 0;
  [[nodiscard]] virtual LpSolution solve_milp(const LpModel& model, double relative_gap,
                                              double absolute_gap) const = 0;
};

/// The in-tree dense simplex and branch-and-bound engine (desk-scale models).
class InternalBackend final : public SolverBackend {
 public:
  [[nodiscard]] std::string_view name() const override { return "internal-dense"; }
  [[nodiscard]] LpSolution solve_lp(const LpModel& model) const override;
  [[nodiscard]] LpSolution solve_milp(const LpModel& model, double relative_gap,
                                      double absolute_gap) const override;
};

const SolverBackend& default_backend();

}  // namespace scuc
