#include "scuc/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "scuc/errors.hpp"

namespace scuc {

void ExperimentConfig::validate() const {
  scenarios.validate();
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (strategies.empty()) throw ValidationError("at least one strategy is required");
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  if (retention < 0) throw ValidationError("retention must be non-negative");
  if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
  if (sample < 0) throw ValidationError("sample index must be non-negative");
  if (alpha_eta && !(*alpha_eta >= 0.0 && *alpha_eta <= 1.0)) {
    throw ValidationError("alpha_eta must be in [0, 1]");
  }
  for (Strategy s : strategies) {
    if (uses_regressor(s) && (regressor_path.empty() || !std::filesystem::exists(regressor_path))) {
      throw ValidationError(fmt::format("strategy {} needs a regressor checkpoint", to_string(s)));
    }
    if (uses_classifier(s) && (classifier_path.empty() || !std::filesystem::exists(classifier_path))) {
      throw ValidationError(fmt::format("strategy {} needs a classifier checkpoint", to_string(s)));
    }
  }
}

Instance make_instance(SystemCase system, const ScenarioConfig& scenarios, int sample) {
  Instance inst;
  const Eigen::MatrixXd profile = draw_sample(system.demand, scenarios, sample);
  inst.scenarios = draw_scenarios(profile, scenarios, sample);
  inst.shift_factors = compute_shift_factor_set(system, enumerate_contingencies(system));
  inst.system = std::move(system);
  return inst;
}

Instance load_instance(const ExperimentConfig& cfg, int sample) {
  return make_instance(load_case(cfg.case_path), cfg.scenarios, sample);
}

Models load_models(const ExperimentConfig& cfg) {
  Models m;
  bool need_regressor = false;
  bool need_classifier = false;
  for (Strategy s : cfg.strategies) {
    need_regressor = need_regressor || uses_regressor(s);
    need_classifier = need_classifier || uses_classifier(s);
  }
  if (need_regressor) m.regressor = load_regressor(cfg.regressor_path);
  if (need_classifier) m.classifier = load_classifier(cfg.classifier_path);
  return m;
}

RunConfig make_run_config(const ExperimentConfig& cfg, Strategy strategy, const Models& models,
                          const ScenarioSet& scenarios) {
  RunConfig rc;
  rc.epsilon = cfg.epsilon;
  rc.max_iterations = cfg.max_iterations;
  rc.delta = cfg.delta;
  rc.retention = cfg.retention;
  rc.subproblem.lazy_network = cfg.lazy_network;
  if (uses_regressor(strategy)) {
    if (!models.regressor) throw ValidationError("regression strategies need a trained regressor");
    const double eta = cfg.alpha_eta.value_or(models.regressor->alpha_eta);
    rc.floors = predict_alpha(*models.regressor, scenarios, eta);
  }
  if (uses_classifier(strategy)) {
    if (!models.classifier) throw ValidationError("classification strategies need a trained classifier");
    rc.classifier = make_cut_classifier(*models.classifier);
  }
  return rc;
}

Dataset generate_dataset(const ExperimentConfig& cfg) {
  if (cfg.scenarios.n_samples == 0) {
    spdlog::warn("zero samples requested; datasets are empty");
    return {};
  }
  return generate_dataset(cfg, load_case(cfg.case_path));
}

Dataset generate_dataset(const ExperimentConfig& cfg, const SystemCase& system) {
  Dataset out;
  if (cfg.scenarios.n_samples == 0) {
    spdlog::warn("zero samples requested; datasets are empty");
    return out;
  }
  ExperimentConfig conventional = cfg;
  conventional.strategies = {Strategy::kConventional};
  conventional.validate();

  const auto shift_factors = compute_shift_factor_set(system, enumerate_contingencies(system));
  const int n = cfg.scenarios.n_scenarios;
  std::vector<Eigen::RowVectorXd> inputs;
  std::vector<std::vector<double>> targets;
  for (int s = 0; s < cfg.scenarios.n_samples; ++s) {
    const Eigen::MatrixXd profile = draw_sample(system.demand, cfg.scenarios, s);
    const ScenarioSet scenarios = draw_scenarios(profile, cfg.scenarios, s);
    const RunConfig rc = make_run_config(conventional, Strategy::kConventional, {}, scenarios);
    RunReport report = run(Strategy::kConventional, system, scenarios, shift_factors, rc);
    if (!report.converged) {
      spdlog::warn("sample {} did not converge after {} iterations; skipped", s, report.iterations.size());
      out.skipped.push_back(s);
      continue;
    }
    out.regression.samples.push_back(s);
    inputs.push_back(regression_features(scenarios));
    targets.push_back(report.final_alpha);
    if (cfg.label_cuts) {
      std::vector<Cut>& archive = report.pool.mutable_archive();
      out.archived_cuts += archive.size();
      const ReplayResult replay = label_by_replay(system, archive, report.floors);
      out.replay_solves += replay.resolves;
      out.labels.insert(out.labels.end(), replay.records.begin(), replay.records.end());
    }
    spdlog::info("sample {}: {} iterations, objective {:.6g}", s, report.iterations.size(), report.objective);
  }
  const auto rows = static_cast<Eigen::Index>(inputs.size());
  const Eigen::Index width = rows > 0 ? inputs.front().size() : 0;
  out.regression.inputs.resize(rows, width);
  out.regression.targets.resize(rows, n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.regression.inputs.row(i) = inputs[i];
    for (int w = 0; w < n; ++w) out.regression.targets(i, w) = targets[i][w];
  }
  return out;
}

double cost_gap(double f_p, double f_bd) {
  if (f_bd == 0.0) throw std::domain_error("cost gap is undefined for a zero reference objective");
  return 100.0 * std::abs(f_p - f_bd) / std::abs(f_bd);
}

BenchmarkReport benchmark(const ExperimentConfig& cfg, const Instance& instance, const Models& models) {
  BenchmarkReport report;
  report.case_name = instance.system.name;
  report.sample = cfg.sample;
  report.scenarios = instance.scenarios.size();
  for (Strategy s : cfg.strategies) {
    BenchmarkRow row;
    row.strategy = s;
    try {
      const RunConfig rc = make_run_config(cfg, s, models, instance.scenarios);
      const RunReport r = run(s, instance.system, instance.scenarios, instance.shift_factors, rc);
      row.ok = true;
      row.converged = r.converged;
      row.iterations = static_cast<int>(r.iterations.size());
      for (const IterationRecord& it : r.iterations) {
        row.mp_seconds += it.mp_seconds;
        row.sp_seconds += it.sp_seconds;
        row.cumulative_cuts.push_back(it.cuts_retained);
      }
      row.total_cuts = r.stats.total;
      row.retained_cuts = r.stats.useful;
      row.est_bytes = r.stats.est_bytes;
      row.objective = r.objective;
    } catch (const std::exception& e) {
      spdlog::error("strategy {} failed: {}", to_string(s), e.what());
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  const BenchmarkRow* reference = nullptr;
  for (const BenchmarkRow& row : report.rows) {
    if (row.strategy == Strategy::kConventional && row.ok) reference = &row;
  }
  if (reference != nullptr && reference->objective != 0.0) {
    for (BenchmarkRow& row : report.rows) {
      if (row.ok) row.cost_gap = cost_gap(row.objective, reference->objective);
    }
  }
  return report;
}

BenchmarkReport benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  const Models models = load_models(cfg);
  return benchmark(cfg, load_instance(cfg, cfg.sample), models);
}

void write_benchmark_report(std::ostream& out, const BenchmarkReport& report) {
  out << "case: " << report.case_name << '\n';
  out << "sample: " << report.sample << '\n';
  out << "scenarios: " << report.scenarios << '\n';
  out << "strategy,status,converged,iterations,total_cuts,retained_cuts,est_cut_bytes,objective,cost_gap_pct\n";
  for (const BenchmarkRow& r : report.rows) {
    if (!r.ok) {
      out << fmt::format("{},error,,,,,,,\n", to_string(r.strategy));
      continue;
    }
    out << fmt::format("{},ok,{},{},{},{},{},{:.10g},{}\n", to_string(r.strategy), r.converged ? "true" : "false",
                       r.iterations, r.total_cuts, r.retained_cuts, r.est_bytes, r.objective,
                       r.cost_gap ? fmt::format("{:.6f}", *r.cost_gap) : "");
  }
  for (const BenchmarkRow& r : report.rows) {
    if (!r.ok) out << fmt::format("error {}: {}\n", to_string(r.strategy), r.error);
  }
  out << "cumulative_cuts\n";
  out << "strategy,k,cuts\n";
  for (const BenchmarkRow& r : report.rows) {
    for (std::size_t k = 0; k < r.cumulative_cuts.size(); ++k) {
      out << fmt::format("{},{},{}\n", to_string(r.strategy), k + 1, r.cumulative_cuts[k]);
    }
  }
}

void write_benchmark_timings(std::ostream& out, const BenchmarkReport& report) {
  out << "strategy,mp_seconds,sp_seconds\n";
  for (const BenchmarkRow& r : report.rows) {
    if (r.ok) out << fmt::format("{},{:.6f},{:.6f}\n", to_string(r.strategy), r.mp_seconds, r.sp_seconds);
  }
}

}  // namespace scuc
