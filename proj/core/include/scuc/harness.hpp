#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scuc/benders.hpp"
#include "scuc/cut_pool.hpp"
#include "scuc/learners.hpp"
#include "scuc/network.hpp"
#include "scuc/scenarios.hpp"
#include "scuc/system_case.hpp"

namespace scuc {

struct ExperimentConfig {
  std::filesystem::path case_path;
  ScenarioConfig scenarios;
  /// Sample drawn for `run` and `benchmark`.
  int sample = 0;
  std::vector<Strategy> strategies{Strategy::kConventional};
  double delta = 1.0;
  int retention = 2;
  /// Overrides the calibrated value stored with the regressor.
  std::optional<double> alpha_eta;
  double epsilon = Tolerances::kDefaultGap;
  int max_iterations = 400;
  bool lazy_network = true;
  /// Replay-label the cut archive of every dataset sample.
  bool label_cuts = true;
  std::filesystem::path regressor_path;
  std::filesystem::path classifier_path;
  std::filesystem::path output_dir;

  /// Throws ValidationError; checkpoint files must exist for the strategies that use them.
  void validate() const;
};

/// System, scenarios of one sample and the shift factors of every contingency.
struct Instance {
  SystemCase system;
  ScenarioSet scenarios;
  std::vector<ShiftFactors> shift_factors;
};

Instance make_instance(SystemCase system, const ScenarioConfig& scenarios, int sample);
Instance load_instance(const ExperimentConfig& cfg, int sample);

struct Models {
  std::optional<AlphaRegressor> regressor;
  std::optional<CutClassifierModel> classifier;
};

Models load_models(const ExperimentConfig& cfg);

/// Run settings for one strategy; floors come from the regressor when the strategy uses one.
RunConfig make_run_config(const ExperimentConfig& cfg, Strategy strategy, const Models& models,
                          const ScenarioSet& scenarios);

struct Dataset {
  RegressionSet regression;
  std::vector<CutLabelRecord> labels;
  std::vector<int> skipped;  // samples whose run did not converge
  std::size_t archived_cuts = 0;
  std::size_t replay_solves = 0;
};

/// One conventional run per sample; converged alpha values become regression
/// targets and, when enabled, the cut archive is replay-labeled.
Dataset generate_dataset(const ExperimentConfig& cfg);
Dataset generate_dataset(const ExperimentConfig& cfg, const SystemCase& system);

/// 100 |f_p - f_bd| / f_bd; throws std::domain_error when f_bd is 0.
double cost_gap(double f_p, double f_bd);

struct BenchmarkRow {
  Strategy strategy = Strategy::kConventional;
  bool ok = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  double mp_seconds = 0.0;
  double sp_seconds = 0.0;
  std::size_t total_cuts = 0;
  std::size_t retained_cuts = 0;
  std::size_t est_bytes = 0;
  double objective = 0.0;
  /// Against the conventional row; empty when that row is missing or failed.
  std::optional<double> cost_gap;
  std::vector<int> cumulative_cuts;  // per iteration
};

struct BenchmarkReport {
  std::string case_name;
  int sample = 0;
  int scenarios = 0;
  std::vector<BenchmarkRow> rows;
};

/// Runs every strategy on the same instance, one after another. A failing
/// strategy becomes a row with `ok = false`.
BenchmarkReport benchmark(const ExperimentConfig& cfg, const Instance& instance, const Models& models);
BenchmarkReport benchmark(const ExperimentConfig& cfg);

/// Reproducible report: no wall times.
void write_benchmark_report(std::ostream& out, const BenchmarkReport& report);
/// Wall-time sidecar.
void write_benchmark_timings(std::ostream& out, const BenchmarkReport& report);

}  // namespace scuc
