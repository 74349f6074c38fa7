// Experiment driver: scenario and dataset generation, training, runs and benchmarks.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scuc/errors.hpp"
#include "scuc/harness.hpp"
#include "scuc/learners.hpp"

namespace fs = std::filesystem;
using namespace scuc;

namespace {

struct Options {
  ExperimentConfig exp;
  std::vector<std::string> strategies{"conventional"};
  double alpha_eta = std::nan("");
  bool full_network = false;
  bool no_labels = false;
  bool hourly = false;
  std::string log_level = "info";

  fs::path data;
  fs::path model;
  int hidden = kDefaultHiddenWidth;
  int epochs = 500;
  int batch = 300;
  double lr = 1e-3;
  std::uint64_t train_seed = 0;
  double validation = 0.2;
  double threshold = 0.5;
};

void add_experiment_flags(CLI::App* app, Options& o, bool with_strategies) {
  ExperimentConfig& e = o.exp;
  app->add_option("--case", e.case_path, "Case document (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--scenarios", e.scenarios.n_scenarios, "Scenarios per sample")->capture_default_str();
  app->add_option("--samples", e.scenarios.n_samples, "Demand profile samples")->capture_default_str();
  app->add_option("--seed", e.scenarios.seed, "Scenario seed")->capture_default_str();
  app->add_option("--sample", e.sample, "Sample index for single-instance commands")->capture_default_str();
  app->add_option("--sample-lower", e.scenarios.sample_lower)->capture_default_str();
  app->add_option("--sample-upper", e.scenarios.sample_upper)->capture_default_str();
  app->add_option("--scenario-lower", e.scenarios.scenario_lower)->capture_default_str();
  app->add_option("--scenario-upper", e.scenarios.scenario_upper)->capture_default_str();
  app->add_flag("--hourly", o.hourly, "One scenario scale per hour instead of per bus and hour");
  app->add_option("--epsilon", e.epsilon, "Relative convergence gap")->capture_default_str();
  app->add_option("--max-iterations", e.max_iterations)->capture_default_str();
  app->add_flag("--full-network", o.full_network, "Build every line row up front");
  app->add_option("--out", e.output_dir, "Output directory")->required();
  if (with_strategies) {
    app->add_option("--strategies", o.strategies, "conventional, r, c, cr")->delimiter(',')->capture_default_str();
    app->add_option("--delta", e.delta, "Usefulness criterion threshold ($)")->capture_default_str();
    app->add_option("--retention", e.retention, "High-load scenarios whose cuts are always kept")
        ->capture_default_str();
    app->add_option("--alpha-eta", o.alpha_eta, "Floor factor; defaults to the calibrated value");
    app->add_option("--regressor", e.regressor_path, "Regressor checkpoint");
    app->add_option("--classifier", e.classifier_path, "Classifier checkpoint");
  }
}

void finish_config(Options& o) {
  o.exp.scenarios.per_bus = !o.hourly;
  o.exp.lazy_network = !o.full_network;
  o.exp.label_cuts = !o.no_labels;
  if (!std::isnan(o.alpha_eta)) o.exp.alpha_eta = o.alpha_eta;
  o.exp.strategies.clear();
  for (const std::string& s : o.strategies) o.exp.strategies.push_back(parse_strategy(s));
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int gen_scenarios(Options& o) {
  finish_config(o);
  o.exp.validate();
  const SystemCase system = load_case(o.exp.case_path);
  for (int s = 0; s < o.exp.scenarios.n_samples; ++s) {
    const Eigen::MatrixXd profile = draw_sample(system.demand, o.exp.scenarios, s);
    const fs::path path = o.exp.output_dir / fmt::format("scenarios_s{}.csv", s);
    auto out = open_output(path);
    write_scenarios(out, draw_scenarios(profile, o.exp.scenarios, s), system);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int gen_dataset(Options& o) {
  finish_config(o);
  const Dataset d = generate_dataset(o.exp);
  {
    auto out = open_output(o.exp.output_dir / "regression.csv");
    write_regression_set(out, d.regression);
  }
  if (o.exp.label_cuts) {
    auto out = open_output(o.exp.output_dir / "cut_labels.csv");
    write_label_records(out, d.labels);
  }
  std::size_t useful = 0;
  for (const CutLabelRecord& r : d.labels) useful += r.label == CutLabel::kUseful ? 1 : 0;
  std::ostringstream summary;
  summary << "samples: " << o.exp.scenarios.n_samples << '\n';
  summary << "converged: " << d.regression.size() << '\n';
  summary << "skipped:";
  for (int s : d.skipped) summary << ' ' << s;
  summary << '\n';
  summary << "archived_cuts: " << d.archived_cuts << '\n';
  summary << "replay_solves: " << d.replay_solves << '\n';
  summary << "useful_cuts: " << useful << '\n';
  auto out = open_output(o.exp.output_dir / "dataset_summary.txt");
  out << summary.str();
  std::cout << summary.str();
  return 0;
}

TrainConfig train_config(const Options& o) {
  if (o.epochs < 0 || o.batch < 1 || !(o.lr > 0.0) || o.hidden < 1) {
    throw ValidationError("need epochs >= 0, batch >= 1, lr > 0 and hidden >= 1");
  }
  return {.batch = o.batch, .epochs = o.epochs, .lr = o.lr, .seed = o.train_seed};
}

int train_regressor_cmd(const Options& o) {
  std::ifstream in(o.data);
  if (!in) throw ValidationError("cannot read " + o.data.string());
  const RegressionSet set = read_regression_set(in);
  if (set.size() == 0) throw ValidationError("regression set is empty");
  RegressorTraining cfg;
  cfg.hidden = o.hidden;
  cfg.train = train_config(o);
  cfg.validation_fraction = o.validation;
  const RegressorFit fit = fit_regressor(set, cfg);
  save_regressor(o.model, fit.model);
  std::cout << fmt::format("model: {}\ntrain_rows: {}\nvalidation_rows: {}\nfinal_loss: {:.6e}\n"
                           "validation_mape_pct: {:.4f}\nalpha_eta: {:.6f}\n",
                           o.model.string(), fit.train_rows.size(), fit.validation_rows.size(),
                           fit.history.empty() ? 0.0 : fit.history.back(), fit.validation_mape, fit.model.alpha_eta);
  return 0;
}

int train_classifier_cmd(const Options& o) {
  std::ifstream in(o.data);
  if (!in) throw ValidationError("cannot read " + o.data.string());
  const auto records = read_label_records(in);
  ClassifierTraining cfg;
  cfg.hidden = o.hidden;
  cfg.train = train_config(o);
  cfg.train.loss = Loss::kWeightedBce;
  ClassifierFit fit = fit_classifier(records, cfg);
  fit.model.threshold = o.threshold;
  save_classifier(o.model, fit.model);
  std::cout << fmt::format("model: {}\ncuts: {}\nfinal_loss: {:.6e}\ntraining_f_score: {:.4f}\n", o.model.string(),
                           records.size(), fit.history.empty() ? 0.0 : fit.history.back(), fit.training_f_score);
  return 0;
}

int run_cmd(Options& o) {
  finish_config(o);
  if (o.exp.strategies.size() != 1) throw ValidationError("run takes exactly one strategy");
  o.exp.validate();
  const Models models = load_models(o.exp);
  const Instance inst = load_instance(o.exp, o.exp.sample);
  const Strategy s = o.exp.strategies.front();
  const RunReport r = run(s, inst.system, inst.scenarios, inst.shift_factors,
                          make_run_config(o.exp, s, models, inst.scenarios));
  const fs::path path = o.exp.output_dir / fmt::format("run_{}.txt", to_string(s));
  auto out = open_output(path);
  write_run_report(out, r);
  std::cout << fmt::format("report: {}\nconverged: {}\niterations: {}\nobjective: {:.10g}\n", path.string(),
                           r.converged, r.iterations.size(), r.objective);
  return 0;
}

int benchmark_cmd(Options& o) {
  finish_config(o);
  const BenchmarkReport report = benchmark(o.exp);
  {
    auto out = open_output(o.exp.output_dir / "benchmark.txt");
    write_benchmark_report(out, report);
  }
  {
    auto out = open_output(o.exp.output_dir / "benchmark_timings.csv");
    write_benchmark_timings(out, report);
  }
  write_benchmark_report(std::cout, report);
  for (const BenchmarkRow& r : report.rows) {
    if (!r.ok) return 1;
  }
  return 0;
}

int replay_label_cmd(Options& o) {
  finish_config(o);
  o.exp.strategies = {Strategy::kConventional};
  o.exp.validate();
  const Instance inst = load_instance(o.exp, o.exp.sample);
  RunReport r = run(Strategy::kConventional, inst.system, inst.scenarios, inst.shift_factors,
                    make_run_config(o.exp, Strategy::kConventional, {}, inst.scenarios));
  const ReplayResult replay = label_by_replay(inst.system, r.pool.mutable_archive(), r.floors);
  auto out = open_output(o.exp.output_dir / "cut_labels.csv");
  write_label_records(out, replay.records);
  std::size_t useful = 0;
  for (const CutLabelRecord& rec : replay.records) useful += rec.label == CutLabel::kUseful ? 1 : 0;
  std::cout << fmt::format("labels: {}\ncuts: {}\nuseful: {}\nresolves: {}\ninitial_lb: {:.10g}\nfinal_lb: {:.10g}\n",
                           (o.exp.output_dir / "cut_labels.csv").string(), replay.records.size(), useful,
                           replay.resolves, replay.initial_lb, replay.final_lb);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage stochastic SCUC with learning-assisted multi-cut Benders"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  auto* scen = app.add_subcommand("gen-scenarios", "Write the scenario sets of every sample");
  add_experiment_flags(scen, o, false);

  auto* dataset = app.add_subcommand("gen-dataset", "Run conventional Benders per sample; archive alpha and cut labels");
  add_experiment_flags(dataset, o, false);
  dataset->add_flag("--no-labels", o.no_labels, "Skip replay labeling");

  auto* reg = app.add_subcommand("train-regressor", "Fit the alpha regressor");
  auto* cls = app.add_subcommand("train-classifier", "Fit the useful-cut classifier");
  for (auto* sub : {reg, cls}) {
    sub->add_option("--data", o.data, "Training set")->required()->check(CLI::ExistingFile);
    sub->add_option("--model", o.model, "Checkpoint to write")->required();
    sub->add_option("--hidden", o.hidden)->capture_default_str();
    sub->add_option("--epochs", o.epochs)->capture_default_str();
    sub->add_option("--batch", o.batch)->capture_default_str();
    sub->add_option("--lr", o.lr)->capture_default_str();
    sub->add_option("--train-seed", o.train_seed)->capture_default_str();
  }
  reg->add_option("--validation", o.validation, "Held-out share for alpha_eta calibration")->capture_default_str();
  cls->add_option("--threshold", o.threshold, "Probability above which a cut is useful")->capture_default_str();

  auto* run = app.add_subcommand("run", "Solve one instance with one strategy");
  add_experiment_flags(run, o, true);
  auto* bench = app.add_subcommand("benchmark", "Run every strategy on the same instance");
  add_experiment_flags(bench, o, true);
  auto* replay = app.add_subcommand("replay-label", "Label the cuts of one conventional run by replay");
  add_experiment_flags(replay, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto logger = spdlog::stderr_color_mt("scuc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    if (*scen) return gen_scenarios(o);
    if (*dataset) return gen_dataset(o);
    if (*reg) return train_regressor_cmd(o);
    if (*cls) return train_classifier_cmd(o);
    if (*run) return run_cmd(o);
    if (*bench) return benchmark_cmd(o);
    if (*replay) return replay_label_cmd(o);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
