#include "scuc/benders.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "scuc/errors.hpp"

namespace scuc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

MasterProblem build_master(const SystemCase& system, std::span<const double> floors,
                           std::span<const Cut* const> cuts) {
  MasterProblem master;
  master.layout = add_first_stage(master.model, system);
  for (std::size_t w = 0; w < floors.size(); ++w) {
    master.alpha.push_back(master.model.add_variable(floors[w], kInf, 1.0, fmt::format("alpha_{}", w)));
  }
  for (const Cut* cut : cuts) add_cut_row(master, *cut);
  return master;
}

void add_cut_row(MasterProblem& master, const Cut& cut) {
  if (cut.scenario < 0 || cut.scenario >= static_cast<int>(master.alpha.size())) {
    throw DimensionError(fmt::format("cut {} refers to scenario {} outside the master", cut.id, cut.scenario));
  }
  if (cut.gradient.size() != master.layout.size()) throw DimensionError("cut gradient does not match the master");
  // alpha_w - grad . x >= value - grad . anchor
  std::vector<int> idx{master.alpha[static_cast<std::size_t>(cut.scenario)]};
  std::vector<double> val{1.0};
  for (int j = 0; j < master.layout.size(); ++j) {
    if (cut.gradient(j) == 0.0) continue;
    idx.push_back(master.layout.offset + j);
    val.push_back(-cut.gradient(j));
  }
  master.model.add_constraint(idx, val, RowSense::kGreaterEqual, cut.value - cut.gradient.dot(cut.anchor),
                              fmt::format("cut_{}", cut.id));
  master.cut_ids.push_back(cut.id);
}

MasterSolution solve_master(const MasterProblem& master, const SolverBackend& backend, double relative_gap) {
  const LpSolution sol = backend.solve_milp(master.model, relative_gap, 1e-9);
  MasterSolution out;
  out.status = sol.status;
  if (!sol.optimal()) return out;
  out.objective = sol.objective;
  out.commitment = extract_commitment(master.layout, sol.x);
  out.point = out.commitment.flatten();
  for (int a : master.alpha) out.alpha.push_back(sol.x[static_cast<std::size_t>(a)]);
  return out;
}

SubproblemResult solve_subproblem(const SystemCase& system, const ScenarioSet& scenarios, int scenario,
                                  const Commitment& commitment, const std::vector<ShiftFactors>& shift_factors,
                                  const SecondStageOptions& options, const SolverBackend& backend) {
  if (scenario < 0 || scenario >= scenarios.size()) throw std::out_of_range("scenario index out of range");
  SecondStageBlock block(system, shift_factors, scenarios.demands[scenario], scenarios.probabilities[scenario],
                         options);
  LpModel model;
  block.build(model, commitment, !options.lazy_network);
  SubproblemResult out;
  out.scenario = scenario;
  LpSolution sol;
  while (true) {
    sol = backend.solve_lp(model);
    ++out.solves;
    if (!sol.optimal() || !options.lazy_network) break;
    if (block.add_violated_network_rows(model, sol.x) == 0) break;
  }
  out.status = sol.status;
  out.network_rows = block.network_rows();
  if (!sol.optimal()) return out;
  out.objective = sol.objective;
  out.dispatch = block.dispatch(sol.x);
  out.total_slack = block.total_slack(sol.x);
  out.gradient = block.first_stage_gradient(sol.duals);
  return out;
}

Cut make_cut(const SubproblemResult& result, const Commitment& anchor, int iteration) {
  Cut cut;
  cut.scenario = result.scenario;
  cut.iteration = iteration;
  cut.value = result.objective;
  cut.gradient = result.gradient;
  cut.anchor = anchor.flatten();
  return cut;
}

double gap(double lb, double ub) {
  if (std::abs(lb) < 1e-9) throw std::domain_error("gap is undefined for a zero lower bound");
  return (ub - lb) / std::abs(lb);
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kConventional:
      return "conventional";
    case Strategy::kRegression:
      return "r";
    case Strategy::kClassification:
      return "c";
    case Strategy::kCombined:
      return "cr";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::kConventional, Strategy::kRegression, Strategy::kClassification, Strategy::kCombined}) {
    if (name == to_string(s)) return s;
  }
  throw ValidationError("unknown strategy '" + name + "' (expected conventional, r, c or cr)");
}

RunReport run(Strategy strategy, const SystemCase& system, const ScenarioSet& scenarios,
              const std::vector<ShiftFactors>& shift_factors, const RunConfig& cfg, const SolverBackend& backend) {
  const int n = scenarios.size();
  if (n < 1) throw ValidationError("run needs at least one scenario");
  if (!(cfg.epsilon > 0.0)) throw ValidationError("convergence tolerance must be positive");
  if (cfg.max_iterations < 1) throw ValidationError("iteration cap must be at least 1");

  RunReport report;
  report.strategy = strategy;
  if (uses_regressor(strategy)) {
    if (static_cast<int>(cfg.floors.size()) != n) {
      throw ValidationError("regression strategies need one predicted floor per scenario");
    }
    report.floors = cfg.floors;
  } else {
    report.floors.assign(static_cast<std::size_t>(n), cfg.alpha_floor);
  }
  if (uses_classifier(strategy) && !cfg.classifier) {
    throw ValidationError("classification strategies need a trained classifier");
  }

  report.pool = CutPool(n);
  CutPool& pool = report.pool;
  // Cuts from a revisited commitment; filters never drop them.
  std::vector<int> pinned;
  double lb = -kInf;
  double ub = kInf;

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    IterationRecord rec;
    rec.k = k;

    auto start = std::chrono::steady_clock::now();
    const std::vector<const Cut*> active = pool.retained();
    const MasterProblem master = build_master(system, report.floors, active);
    const MasterSolution ms = solve_master(master, backend, cfg.master_gap);
    rec.mp_seconds = seconds_since(start);
    if (ms.status != SolveStatus::kOptimal) {
      throw SolverError(fmt::format("master problem at iteration {} ended {}", k, to_string(ms.status)));
    }
    rec.master_objective = ms.objective;
    lb = std::max(lb, ms.objective);
    report.final_alpha = ms.alpha;
    const bool revisit = std::find(report.master_points.begin(), report.master_points.end(), ms.point) !=
                         report.master_points.end();
    report.master_points.push_back(ms.point);
    report.master_alpha.push_back(ms.alpha);

    if (uses_regressor(strategy) && k > 1) {
      filter_by_criterion(pool, k - 1, ms.point, ms.alpha, cfg.delta);
      apply_retention(pool, k - 1, scenarios, cfg.retention);
      for (int id : pinned) pool.retain(id);
    }

    start = std::chrono::steady_clock::now();
    std::vector<SubproblemResult> results;
    results.reserve(static_cast<std::size_t>(n));
    double second_stage = 0.0;
    for (int w = 0; w < n; ++w) {
      results.push_back(solve_subproblem(system, scenarios, w, ms.commitment, shift_factors, cfg.subproblem, backend));
      if (results.back().status != SolveStatus::kOptimal) {
        throw SolverError(fmt::format("subproblem {} at iteration {} ended {}", w, k,
                                      to_string(results.back().status)));
      }
      second_stage += results.back().objective;
    }
    rec.sp_seconds = seconds_since(start);

    const double ub_k = commitment_cost(system, ms.commitment) + second_stage;
    if (ub_k < ub) {
      ub = ub_k;
      report.commitment = ms.commitment;
      report.dispatch.clear();
      for (const SubproblemResult& r : results) report.dispatch.push_back(r.dispatch);
    }

    rec.lb = lb;
    rec.ub = ub;
    bool done = ub - lb <= 1e-9;
    if (std::abs(lb) < 1e-9) {
      rec.gap = done ? 0.0 : kInf;
    } else {
      rec.gap = gap(lb, ub);
      done = done || rec.gap <= cfg.epsilon;
    }

    if (!done) {
      std::vector<Cut> fresh;
      fresh.reserve(results.size());
      for (const SubproblemResult& r : results) fresh.push_back(make_cut(r, ms.commitment, k));
      assign_cut_features(fresh, ms.alpha, k, cfg.max_iterations, scenarios);
      std::vector<bool> keep(fresh.size(), true);
      if (uses_classifier(strategy)) {
        keep = cfg.classifier(fresh);
        if (keep.size() != fresh.size()) throw DimensionError("classifier returned the wrong number of labels");
      }
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        const int id = pool.add(std::move(fresh[i]));
        if (revisit) {
          // Dropping these again would let the master cycle back here.
          pinned.push_back(id);
        } else if (!keep[i]) {
          pool.drop(id);
        }
      }
      if (uses_classifier(strategy)) apply_retention(pool, k, scenarios, cfg.retention);
      rec.cuts_added = n;
    }
    rec.cuts_retained = static_cast<int>(pool.retained_count());
    report.iterations.push_back(rec);
    spdlog::debug("{} k={} lb={:.6f} ub={:.6f} gap={:.3e} pool={}", to_string(strategy), k, lb, ub, rec.gap,
                  rec.cuts_retained);
    if (done) {
      report.converged = true;
      break;
    }
  }

  report.objective = ub;
  report.lower_bound = lb;
  report.stats = pool_stats(pool);
  if (!report.converged) {
    spdlog::warn("{} strategy did not converge within {} iterations (gap {:.3e})", to_string(strategy),
                 cfg.max_iterations, report.final_gap());
  }
  return report;
}

void write_run_report(std::ostream& out, const RunReport& report, bool with_timings) {
  out << "strategy: " << to_string(report.strategy) << '\n';
  out << "converged: " << (report.converged ? "true" : "false") << '\n';
  out << "iterations: " << report.iterations.size() << '\n';
  out << fmt::format("objective: {:.10g}\n", report.objective);
  out << fmt::format("lower_bound: {:.10g}\n", report.lower_bound);
  out << fmt::format("final_gap: {:.6e}\n", report.final_gap());
  out << "total_cuts: " << report.stats.total << '\n';
  out << "retained_cuts: " << report.stats.useful << '\n';
  out << fmt::format("retained_fraction: {:.6f}\n", report.stats.fraction);
  out << "est_cut_bytes: " << report.stats.est_bytes << '\n';
  out << "k,master_objective,lb,ub,gap,cuts_added,cuts_retained";
  if (with_timings) out << ",mp_seconds,sp_seconds";
  out << '\n';
  for (const IterationRecord& r : report.iterations) {
    out << fmt::format("{},{:.10g},{:.10g},{:.10g},{:.6e},{},{}", r.k, r.master_objective, r.lb, r.ub, r.gap,
                       r.cuts_added, r.cuts_retained);
    if (with_timings) out << fmt::format(",{:.6f},{:.6f}", r.mp_seconds, r.sp_seconds);
    out << '\n';
  }
}

}  // namespace scuc
