#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scuc/benders.hpp"
#include "scuc/cut_pool.hpp"
#include "scuc/scenarios.hpp"

namespace scuc {

/// Per-feature min-max normalisation. Constant features map to 0.
struct Scaler {
  std::vector<double> lo;
  std::vector<double> hi;

  /// Rows are samples. Throws std::invalid_argument on empty data.
  static Scaler fit(const Eigen::MatrixXd& data);

  [[nodiscard]] int dims() const { return static_cast<int>(lo.size()); }
  /// Out-of-range values extrapolate linearly.
  [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Eigen::MatrixXd inverse(const Eigen::MatrixXd& z) const;
};

enum class OutputActivation { kIdentity, kLogistic };
enum class Loss { kMse, kWeightedBce };

/// Dense input -> ReLU hidden -> output network with its Adam moments.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, int hidden, int outputs, OutputActivation activation, std::uint64_t seed);

  [[nodiscard]] int inputs() const { return static_cast<int>(w1_.cols()); }
  [[nodiscard]] int hidden() const { return static_cast<int>(w1_.rows()); }
  [[nodiscard]] int outputs() const { return static_cast<int>(w2_.rows()); }
  [[nodiscard]] OutputActivation activation() const { return activation_; }

  /// Rows are samples.
  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// Output layer pre-activation.
  [[nodiscard]] Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;

  /// MSE averages over samples and outputs. Weighted BCE scales the positive
  /// term by `positive_weight` and averages over samples and outputs.
  [[nodiscard]] double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss kind,
                            double positive_weight = 1.0) const;
  /// d loss / d parameters, in parameters() order.
  [[nodiscard]] Eigen::VectorXd gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss kind,
                                         double positive_weight = 1.0) const;

  /// Flat copy: w1 (row-major), b1, w2 (row-major), b2.
  [[nodiscard]] Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
  [[nodiscard]] int parameter_count() const;

  /// One Adam update with the given gradient.
  void adam_step(const Eigen::VectorXd& grad, double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);
  [[nodiscard]] long steps() const { return steps_; }

 private:
  Eigen::MatrixXd w1_;  // hidden x inputs
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // outputs x hidden
  Eigen::VectorXd b2_;
  OutputActivation activation_ = OutputActivation::kIdentity;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long steps_ = 0;
};

inline constexpr int kDefaultHiddenWidth = 64;

struct TrainConfig {
  int batch = 300;  // clamped to the dataset size
  int epochs = 500;
  double lr = 1e-3;
  Loss loss = Loss::kMse;
  double positive_weight = 1.0;
  std::uint64_t seed = 0;
};

/// Mini-batch Adam over shuffled rows; returns the full-data loss after each
/// epoch. Throws SolverError when the loss or the parameters stop being finite.
std::vector<double> train(Mlp& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const TrainConfig& cfg);

/// Flattened hourly system demand of every scenario, scenario-major (n * T values).
Eigen::RowVectorXd regression_features(const ScenarioSet& scenarios);

/// Inputs and converged alpha targets, one row per sample.
struct RegressionSet {
  std::vector<int> samples;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  [[nodiscard]] int size() const { return static_cast<int>(inputs.rows()); }
};

void write_regression_set(std::ostream& out, const RegressionSet& set);
RegressionSet read_regression_set(std::istream& in);

struct AlphaRegressor {
  Scaler x_scaler;
  Scaler y_scaler;
  Mlp net;
  double alpha_eta = 1.0;

  /// Predicted alpha per scenario in $.
  [[nodiscard]] std::vector<double> predict(const ScenarioSet& scenarios) const;
  [[nodiscard]] Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;
};

struct RegressorTraining {
  int hidden = kDefaultHiddenWidth;
  TrainConfig train;
  /// Share of the samples held out for alpha_eta calibration.
  double validation_fraction = 0.2;
  double quantile = 0.95;
};

struct RegressorFit {
  AlphaRegressor model;
  std::vector<int> train_rows;
  std::vector<int> validation_rows;
  std::vector<double> history;
  double validation_mape = 0.0;  // percent
};

/// Trains on a seeded split and sets alpha_eta from the validation rows.
RegressorFit fit_regressor(const RegressionSet& set, const RegressorTraining& cfg);

/// min(1, 1 - q-quantile of the relative over-prediction), clamped at 0.
double calibrate_alpha_eta(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual, double quantile = 0.95);

/// Mean absolute percentage error in percent.
double mape(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual);

/// alpha_eta * predicted alpha per scenario; throws DimensionError on a layout mismatch.
std::vector<double> predict_alpha(const AlphaRegressor& regressor, const ScenarioSet& scenarios,
                                  double alpha_eta);

struct CutClassifierModel {
  Scaler scaler;
  Mlp net;
  double threshold = 0.5;

  [[nodiscard]] std::vector<double> probabilities(const Eigen::MatrixXd& features) const;
  /// True for cuts predicted useful. Throws DimensionError on a feature count mismatch.
  [[nodiscard]] std::vector<bool> classify(const Eigen::MatrixXd& features) const;
  [[nodiscard]] std::vector<bool> classify(std::span<const Cut> cuts) const;
};

struct ClassifierTraining {
  int hidden = kDefaultHiddenWidth;
  TrainConfig train{.batch = 300, .epochs = 500, .lr = 1e-3, .loss = Loss::kWeightedBce};
  /// Weight positives by negatives / positives when true.
  bool balance = true;
};

struct ClassifierFit {
  CutClassifierModel model;
  std::vector<double> history;
  double training_f_score = 0.0;
};

/// Rows with an unlabeled cut are ignored.
ClassifierFit fit_classifier(const std::vector<CutLabelRecord>& records, const ClassifierTraining& cfg);
ClassifierFit fit_classifier(const Eigen::MatrixXd& features, const std::vector<bool>& labels,
                             const ClassifierTraining& cfg);

/// F1 of the positive class; 0 when there are no true positives.
double f_score(const std::vector<bool>& predicted, const std::vector<bool>& truth);

CutClassifier make_cut_classifier(CutClassifierModel model);

inline constexpr int kCheckpointVersion = 1;

void save_regressor(const std::filesystem::path& path, const AlphaRegressor& model);
AlphaRegressor load_regressor(const std::filesystem::path& path);
void save_classifier(const std::filesystem::path& path, const CutClassifierModel& model);
CutClassifierModel load_classifier(const std::filesystem::path& path);

std::string regressor_to_text(const AlphaRegressor& model);
AlphaRegressor regressor_from_text(const std::string& text);
std::string classifier_to_text(const CutClassifierModel& model);
CutClassifierModel classifier_from_text(const std::string& text);

}  // namespace scuc
