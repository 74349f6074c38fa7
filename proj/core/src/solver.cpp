#include "scuc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tableau.hpp"

namespace scuc {
namespace {

long default_iteration_limit(const LpModel& model) {
  return 50 * static_cast<long>(model.num_constraints() + model.num_variables()) + 10000;
}

}  // namespace

LpSolution solve_lp(const LpModel& model, const LpOptions& options) {
  const long limit = options.max_iterations > 0 ? options.max_iterations : default_iteration_limit(model);
  detail::Tableau tableau(model);
  LpSolution sol;
  sol.status = tableau.solve_primal(limit);
  sol.iterations = tableau.iterations();
  if (sol.status != SolveStatus::kOptimal) return sol;
  tableau.refine();
  sol.x = tableau.primal();
  sol.objective = tableau.objective();
  sol.duals = tableau.duals();
  sol.reduced_costs = tableau.reduced_costs();
  sol.best_bound = sol.objective;
  return sol;
}

LpSolution solve_milp(const LpModel& model, const MilpOptions& options) {
  std::vector<int> binaries;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].binary) binaries.push_back(static_cast<int>(j));
  }
  if (binaries.empty()) return solve_lp(model);

  const long lp_limit = default_iteration_limit(model);
  struct Node {
    detail::Tableau tableau;
    double parent_bound;
    std::vector<std::pair<int, double>> fixings;
  };

  // Fresh primal solve of a node: the dual simplex on an inherited tableau can
  // accumulate enough error to misreport a feasible node as infeasible.
  auto resolve_fresh = [&](Node& node) {
    LpModel fixed = model;
    for (const auto& [j, v] : node.fixings) {
      fixed.mutable_variables()[j].lower = v;
      fixed.mutable_variables()[j].upper = v;
    }
    node.tableau = detail::Tableau(fixed);
    return node.tableau.solve_primal(lp_limit);
  };

  LpSolution result;
  detail::Tableau root(model);
  SolveStatus status = root.solve_primal(lp_limit);
  result.iterations = root.iterations();
  if (status != SolveStatus::kOptimal) {
    result.status = status;
    return result;
  }

  double incumbent = kInf;
  std::vector<double> incumbent_x;
  auto cutoff = [&] {
    return incumbent - std::max(options.absolute_gap, options.relative_gap * std::abs(incumbent));
  };

  std::vector<Node> stack;
  stack.push_back({std::move(root), -kInf, {}});
  bool fresh = true;  // the node on top has already been solved
  long nodes = 0;
  bool hit_limit = false;

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (node.parent_bound >= cutoff()) continue;
    if (!fresh) {
      status = node.tableau.solve_dual(node.tableau.iterations() + lp_limit);
      if (status != SolveStatus::kOptimal) {
        status = resolve_fresh(node);
      }
      if (status != SolveStatus::kOptimal) continue;
    }
    fresh = false;

    while (true) {
      ++nodes;
      if (nodes > options.node_limit) {
        hit_limit = true;
        break;
      }
      const double bound = node.tableau.objective();
      if (bound >= cutoff()) break;
      const std::vector<double> x = node.tableau.primal();
      int branch = -1;
      double most = options.integrality_tolerance;
      for (int j : binaries) {
        const double frac = std::abs(x[j] - std::round(x[j]));
        if (frac > most) {
          most = frac;
          branch = j;
        }
      }
      if (branch < 0) {
        incumbent = bound;
        incumbent_x = x;
        break;
      }
      const double up_first = x[branch] >= 0.5 ? 1.0 : 0.0;
      Node sibling{node.tableau, bound, node.fixings};
      sibling.tableau.fix_variable(branch, 1.0 - up_first);
      sibling.fixings.emplace_back(branch, 1.0 - up_first);
      stack.push_back(std::move(sibling));
      node.tableau.fix_variable(branch, up_first);
      node.fixings.emplace_back(branch, up_first);
      status = node.tableau.solve_dual(node.tableau.iterations() + lp_limit);
      if (status != SolveStatus::kOptimal) {
        status = resolve_fresh(node);
      }
      if (status != SolveStatus::kOptimal) break;
    }
    if (hit_limit) break;
  }
  result.nodes = nodes;

  double open_bound = incumbent;
  for (const Node& n : stack) open_bound = std::min(open_bound, n.parent_bound);
  result.best_bound = open_bound;

  if (incumbent_x.empty()) {
    result.status = hit_limit ? SolveStatus::kIterationLimit : SolveStatus::kInfeasible;
    return result;
  }

  // Polish: re-solve the LP with the binaries fixed for accurate continuous values.
  LpModel fixed = model;
  for (int j : binaries) {
    const double v = std::round(incumbent_x[j]);
    fixed.mutable_variables()[j].lower = v;
    fixed.mutable_variables()[j].upper = v;
  }
  LpSolution polished = solve_lp(fixed);
  if (polished.optimal()) {
    result.x = std::move(polished.x);
    result.objective = polished.objective;
  } else {
    result.x = incumbent_x;
    result.objective = incumbent;
  }
  for (int j : binaries) result.x[j] = std::round(result.x[j]);
  result.status = hit_limit ? SolveStatus::kIterationLimit : SolveStatus::kOptimal;
  if (!hit_limit) result.best_bound = std::min(result.best_bound, result.objective);
  return result;
}

LpSolution InternalBackend::solve_lp(const LpModel& model) const { return scuc::solve_lp(model); }

LpSolution InternalBackend::solve_milp(const LpModel& model, double relative_gap,
                                       double absolute_gap) const {
  MilpOptions options;
  options.relative_gap = relative_gap;
  options.absolute_gap = absolute_gap;
  return scuc::solve_milp(model, options);
}

const SolverBackend& default_backend() {
  static const InternalBackend backend;
  return backend;
}

}  // namespace scuc
