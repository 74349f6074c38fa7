#include "scuc/learners.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "scuc/errors.hpp"

namespace scuc {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

/// Seeded Fisher-Yates over 0..n-1; `stream` separates independent shuffles.
std::vector<int> permutation(int n, const CounterRng& rng, std::uint64_t stream) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform(stream, static_cast<std::uint64_t>(i)) * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  return order;
}

}  // namespace

Scaler Scaler::fit(const Eigen::MatrixXd& data) {
  if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("cannot fit a scaler on empty data");
  Scaler s;
  s.lo.resize(data.cols());
  s.hi.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    s.lo[j] = data.col(j).minCoeff();
    s.hi[j] = data.col(j).maxCoeff();
  }
  return s;
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != dims()) throw DimensionError(fmt::format("scaler expects {} features, got {}", dims(), x.cols()));
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double span = hi[j] - lo[j];
    if (span > 0.0) {
      z.col(j) = (x.col(j).array() - lo[j]) / span;
    } else {
      z.col(j).setZero();
    }
  }
  return z;
}

Eigen::MatrixXd Scaler::inverse(const Eigen::MatrixXd& z) const {
  if (z.cols() != dims()) throw DimensionError(fmt::format("scaler expects {} features, got {}", dims(), z.cols()));
  Eigen::MatrixXd x(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) x.col(j) = z.col(j).array() * (hi[j] - lo[j]) + lo[j];
  return x;
}

Mlp::Mlp(int inputs, int hidden, int outputs, OutputActivation activation, std::uint64_t seed)
    : activation_(activation) {
  if (inputs <= 0 || hidden <= 0 || outputs <= 0) throw std::invalid_argument("layer sizes must be positive");
  const CounterRng rng(seed);
  w1_.resize(hidden, inputs);
  w2_.resize(outputs, hidden);
  const double r1 = std::sqrt(6.0 / inputs);
  const double r2 = std::sqrt(6.0 / hidden);
  for (int i = 0; i < hidden; ++i) {
    for (int j = 0; j < inputs; ++j) w1_(i, j) = r1 * (2.0 * rng.uniform(1, i, j) - 1.0);
  }
  for (int i = 0; i < outputs; ++i) {
    for (int j = 0; j < hidden; ++j) w2_(i, j) = r2 * (2.0 * rng.uniform(2, i, j) - 1.0);
  }
  b1_ = Eigen::VectorXd::Zero(hidden);
  b2_ = Eigen::VectorXd::Zero(outputs);
  m_ = Eigen::VectorXd::Zero(parameter_count());
  v_ = Eigen::VectorXd::Zero(parameter_count());
}

int Mlp::parameter_count() const {
  return static_cast<int>(w1_.size() + b1_.size() + w2_.size() + b2_.size());
}

Eigen::MatrixXd Mlp::logits(const Eigen::MatrixXd& x) const {
  if (x.cols() != inputs()) throw DimensionError(fmt::format("network expects {} inputs, got {}", inputs(), x.cols()));
  const Eigen::MatrixXd h = ((x * w1_.transpose()).rowwise() + b1_.transpose()).cwiseMax(0.0);
  return (h * w2_.transpose()).rowwise() + b2_.transpose();
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = logits(x);
  if (activation_ == OutputActivation::kLogistic) z = z.unaryExpr([](double v) { return sigmoid(v); });
  return z;
}

double Mlp::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss kind, double positive_weight) const {
  if (y.rows() != x.rows() || y.cols() != outputs()) throw DimensionError("target shape does not match the network");
  const double count = static_cast<double>(y.size());
  if (kind == Loss::kMse) return (forward(x) - y).squaredNorm() / count;
  if (activation_ != OutputActivation::kLogistic) throw std::invalid_argument("cross-entropy needs a logistic output");
  const Eigen::MatrixXd z = logits(x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      total += positive_weight * y(i, j) * softplus(-z(i, j)) + (1.0 - y(i, j)) * softplus(z(i, j));
    }
  }
  return total / count;
}

Eigen::VectorXd Mlp::gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Loss kind,
                              double positive_weight) const {
  if (x.cols() != inputs()) throw DimensionError(fmt::format("network expects {} inputs, got {}", inputs(), x.cols()));
  if (y.rows() != x.rows() || y.cols() != outputs()) throw DimensionError("target shape does not match the network");
  const double count = static_cast<double>(y.size());
  const Eigen::MatrixXd pre = (x * w1_.transpose()).rowwise() + b1_.transpose();
  const Eigen::MatrixXd h = pre.cwiseMax(0.0);
  const Eigen::MatrixXd z = (h * w2_.transpose()).rowwise() + b2_.transpose();

  Eigen::MatrixXd dz(z.rows(), z.cols());
  if (kind == Loss::kMse) {
    if (activation_ == OutputActivation::kLogistic) {
      const Eigen::MatrixXd p = z.unaryExpr([](double v) { return sigmoid(v); });
      dz = (2.0 / count) * ((p - y).array() * p.array() * (1.0 - p.array())).matrix();
    } else {
      dz = (2.0 / count) * (z - y);
    }
  } else {
    if (activation_ != OutputActivation::kLogistic) throw std::invalid_argument("cross-entropy needs a logistic output");
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double p = sigmoid(z(i, j));
        dz(i, j) = (positive_weight * y(i, j) * (p - 1.0) + (1.0 - y(i, j)) * p) / count;
      }
    }
  }

  const Eigen::MatrixXd gw2 = dz.transpose() * h;
  const Eigen::VectorXd gb2 = dz.colwise().sum().transpose();
  const Eigen::MatrixXd dh = ((dz * w2_).array() * (pre.array() > 0.0).cast<double>()).matrix();
  const Eigen::MatrixXd gw1 = dh.transpose() * x;
  const Eigen::VectorXd gb1 = dh.colwise().sum().transpose();

  Eigen::VectorXd g(parameter_count());
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < gw1.rows(); ++i) {
    for (Eigen::Index j = 0; j < gw1.cols(); ++j) g(at++) = gw1(i, j);
  }
  g.segment(at, gb1.size()) = gb1;
  at += gb1.size();
  for (Eigen::Index i = 0; i < gw2.rows(); ++i) {
    for (Eigen::Index j = 0; j < gw2.cols(); ++j) g(at++) = gw2(i, j);
  }
  g.segment(at, gb2.size()) = gb2;
  return g;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd theta(parameter_count());
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < w1_.rows(); ++i) {
    for (Eigen::Index j = 0; j < w1_.cols(); ++j) theta(at++) = w1_(i, j);
  }
  theta.segment(at, b1_.size()) = b1_;
  at += b1_.size();
  for (Eigen::Index i = 0; i < w2_.rows(); ++i) {
    for (Eigen::Index j = 0; j < w2_.cols(); ++j) theta(at++) = w2_(i, j);
  }
  theta.segment(at, b2_.size()) = b2_;
  return theta;
}

void Mlp::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != parameter_count()) {
    throw DimensionError(fmt::format("expected {} parameters, got {}", parameter_count(), theta.size()));
  }
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < w1_.rows(); ++i) {
    for (Eigen::Index j = 0; j < w1_.cols(); ++j) w1_(i, j) = theta(at++);
  }
  b1_ = theta.segment(at, b1_.size());
  at += b1_.size();
  for (Eigen::Index i = 0; i < w2_.rows(); ++i) {
    for (Eigen::Index j = 0; j < w2_.cols(); ++j) w2_(i, j) = theta(at++);
  }
  b2_ = theta.segment(at, b2_.size());
}

void Mlp::adam_step(const Eigen::VectorXd& grad, double lr, double beta1, double beta2, double eps) {
  if (grad.size() != parameter_count()) throw DimensionError("gradient size does not match the network");
  if (m_.size() != grad.size()) {
    m_ = Eigen::VectorXd::Zero(grad.size());
    v_ = Eigen::VectorXd::Zero(grad.size());
  }
  ++steps_;
  m_ = beta1 * m_ + (1.0 - beta1) * grad;
  v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps_));
  const Eigen::VectorXd step = lr * (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps);
  set_parameters(parameters() - step);
}

std::vector<double> train(Mlp& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const TrainConfig& cfg) {
  if (x.rows() == 0) throw std::invalid_argument("empty training set");
  if (x.rows() != y.rows()) throw DimensionError("input and target row counts differ");
  if (cfg.epochs < 0 || cfg.lr <= 0.0) throw std::invalid_argument("epochs must be >= 0 and lr > 0");
  const int n = static_cast<int>(x.rows());
  const int batch = std::clamp(cfg.batch, 1, n);
  const CounterRng rng(cfg.seed);
  std::vector<double> history;
  history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = permutation(n, rng, static_cast<std::uint64_t>(epoch));
    for (int start = 0; start < n; start += batch) {
      const std::vector<int> rows(order.begin() + start, order.begin() + std::min(n, start + batch));
      const Eigen::VectorXd g = model.gradient(select_rows(x, rows), select_rows(y, rows), cfg.loss,
                                               cfg.positive_weight);
      if (!g.allFinite()) {
        throw SolverError(fmt::format("non-finite gradient at epoch {} step {}", epoch, model.steps()));
      }
      model.adam_step(g, cfg.lr);
    }
    const double l = model.loss(x, y, cfg.loss, cfg.positive_weight);
    if (!std::isfinite(l) || !model.parameters().allFinite()) {
      throw SolverError(fmt::format("training diverged at epoch {}: loss {}", epoch, l));
    }
    history.push_back(l);
  }
  return history;
}

Eigen::RowVectorXd regression_features(const ScenarioSet& scenarios) {
  if (scenarios.size() == 0) return {};
  const Eigen::Index horizon = scenarios.demands.front().cols();
  Eigen::RowVectorXd f(scenarios.size() * horizon);
  for (int w = 0; w < scenarios.size(); ++w) {
    f.segment(w * horizon, horizon) = scenarios.demands[w].colwise().sum();
  }
  return f;
}

void write_regression_set(std::ostream& out, const RegressionSet& set) {
  out << "sample";
  for (Eigen::Index j = 0; j < set.inputs.cols(); ++j) out << ",x" << j;
  for (Eigen::Index j = 0; j < set.targets.cols(); ++j) out << ",alpha" << j;
  out << "\n";
  for (int i = 0; i < set.size(); ++i) {
    out << set.samples.at(i);
    for (Eigen::Index j = 0; j < set.inputs.cols(); ++j) out << fmt::format(",{}", set.inputs(i, j));
    for (Eigen::Index j = 0; j < set.targets.cols(); ++j) out << fmt::format(",{}", set.targets(i, j));
    out << "\n";
  }
}

RegressionSet read_regression_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("regression set: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.front() != "sample") throw ParseError("regression set: first column must be 'sample'");
  int n_in = 0;
  int n_out = 0;
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j].rfind("alpha", 0) == 0) {
      ++n_out;
    } else if (header[j].rfind('x', 0) == 0 && n_out == 0) {
      ++n_in;
    } else {
      throw ParseError("regression set: unexpected column '" + header[j] + "'");
    }
  }
  RegressionSet set;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    try {
      std::getline(ss, cell, ',');
      set.samples.push_back(std::stoi(cell));
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ParseError(fmt::format("regression set line {}: bad number", line_no));
    }
    if (static_cast<int>(row.size()) != n_in + n_out) {
      throw ParseError(fmt::format("regression set line {}: expected {} values", line_no, n_in + n_out));
    }
    rows.push_back(std::move(row));
  }
  set.inputs.resize(static_cast<Eigen::Index>(rows.size()), n_in);
  set.targets.resize(static_cast<Eigen::Index>(rows.size()), n_out);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < n_in; ++j) set.inputs(static_cast<Eigen::Index>(i), j) = rows[i][j];
    for (int j = 0; j < n_out; ++j) set.targets(static_cast<Eigen::Index>(i), j) = rows[i][n_in + j];
  }
  return set;
}

Eigen::MatrixXd AlphaRegressor::predict(const Eigen::MatrixXd& inputs) const {
  return y_scaler.inverse(net.forward(x_scaler.transform(inputs)));
}

std::vector<double> AlphaRegressor::predict(const ScenarioSet& scenarios) const {
  const Eigen::RowVectorXd f = regression_features(scenarios);
  if (f.size() != net.inputs() || scenarios.size() != net.outputs()) {
    throw DimensionError(fmt::format("regressor expects {} features and {} scenarios, got {} and {}", net.inputs(),
                                     net.outputs(), f.size(), scenarios.size()));
  }
  const Eigen::MatrixXd p = predict(Eigen::MatrixXd(f));
  return {p.data(), p.data() + p.size()};
}

double mape(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw DimensionError("prediction and target shapes differ");
  }
  double total = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    const double a = actual.data()[i];
    if (std::abs(a) < 1e-9) continue;
    total += std::abs(predicted.data()[i] - a) / std::abs(a);
    ++count;
  }
  return count == 0 ? 0.0 : 100.0 * total / count;
}

double calibrate_alpha_eta(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& actual, double quantile) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw DimensionError("prediction and target shapes differ");
  }
  if (quantile < 0.0 || quantile > 1.0) throw std::invalid_argument("quantile must be in [0, 1]");
  std::vector<double> over;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    const double a = actual.data()[i];
    if (std::abs(a) < 1e-9) continue;
    over.push_back(std::max(0.0, (predicted.data()[i] - a) / std::abs(a)));
  }
  if (over.empty()) return 1.0;
  std::sort(over.begin(), over.end());
  const double pos = quantile * static_cast<double>(over.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, over.size() - 1);
  const double q = over[lo] + (pos - static_cast<double>(lo)) * (over[hi] - over[lo]);
  return std::clamp(1.0 - q, 0.0, 1.0);
}

RegressorFit fit_regressor(const RegressionSet& set, const RegressorTraining& cfg) {
  if (set.size() == 0) throw std::invalid_argument("empty regression set");
  if (set.targets.rows() != set.inputs.rows()) throw DimensionError("input and target row counts differ");
  if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0) {
    throw std::invalid_argument("validation fraction must be in [0, 1)");
  }
  RegressorFit fit;
  const std::vector<int> order = permutation(set.size(), CounterRng(cfg.train.seed), 0x5157);
  const auto n_val = static_cast<int>(std::floor(cfg.validation_fraction * set.size()));
  fit.validation_rows.assign(order.begin(), order.begin() + n_val);
  fit.train_rows.assign(order.begin() + n_val, order.end());
  std::sort(fit.validation_rows.begin(), fit.validation_rows.end());
  std::sort(fit.train_rows.begin(), fit.train_rows.end());

  const Eigen::MatrixXd x = select_rows(set.inputs, fit.train_rows);
  const Eigen::MatrixXd y = select_rows(set.targets, fit.train_rows);
  AlphaRegressor& model = fit.model;
  model.x_scaler = Scaler::fit(x);
  model.y_scaler = Scaler::fit(y);
  model.net = Mlp(static_cast<int>(x.cols()), cfg.hidden, static_cast<int>(y.cols()), OutputActivation::kIdentity,
                  cfg.train.seed);
  TrainConfig tc = cfg.train;
  tc.loss = Loss::kMse;
  fit.history = train(model.net, model.x_scaler.transform(x), model.y_scaler.transform(y), tc);

  const std::vector<int>& held = fit.validation_rows.empty() ? fit.train_rows : fit.validation_rows;
  const Eigen::MatrixXd predicted = model.predict(select_rows(set.inputs, held));
  const Eigen::MatrixXd actual = select_rows(set.targets, held);
  fit.validation_mape = mape(predicted, actual);
  model.alpha_eta = calibrate_alpha_eta(predicted, actual, cfg.quantile);
  spdlog::info("regressor: {} train / {} validation rows, MAPE {:.2f}%, alpha_eta {:.4f}", fit.train_rows.size(),
               fit.validation_rows.size(), fit.validation_mape, model.alpha_eta);
  return fit;
}

std::vector<double> predict_alpha(const AlphaRegressor& regressor, const ScenarioSet& scenarios, double alpha_eta) {
  if (!(alpha_eta >= 0.0 && alpha_eta <= 1.0)) throw std::invalid_argument("alpha_eta must be in [0, 1]");
  std::vector<double> floors = regressor.predict(scenarios);
  for (double& f : floors) f *= alpha_eta;
  return floors;
}

std::vector<double> CutClassifierModel::probabilities(const Eigen::MatrixXd& features) const {
  if (features.cols() != net.inputs()) {
    throw DimensionError(fmt::format("classifier expects {} features, got {}", net.inputs(), features.cols()));
  }
  const Eigen::MatrixXd p = net.forward(scaler.transform(features));
  return {p.data(), p.data() + p.size()};
}

std::vector<bool> CutClassifierModel::classify(const Eigen::MatrixXd& features) const {
  std::vector<bool> out;
  for (double p : probabilities(features)) out.push_back(p >= threshold);
  return out;
}

std::vector<bool> CutClassifierModel::classify(std::span<const Cut> cuts) const {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(cuts.size()), net.inputs());
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (static_cast<int>(cuts[i].features.size()) != net.inputs()) {
      throw DimensionError(fmt::format("cut {} carries {} features, classifier expects {}", cuts[i].id,
                                       cuts[i].features.size(), net.inputs()));
    }
    for (int j = 0; j < net.inputs(); ++j) f(static_cast<Eigen::Index>(i), j) = cuts[i].features[j];
  }
  return classify(f);
}

double f_score(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("prediction and label counts differ");
  int tp = 0;
  int fp = 0;
  int fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++tp;
    if (predicted[i] && !truth[i]) ++fp;
    if (!predicted[i] && truth[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

ClassifierFit fit_classifier(const Eigen::MatrixXd& features, const std::vector<bool>& labels,
                             const ClassifierTraining& cfg) {
  if (features.rows() == 0) throw std::invalid_argument("empty classifier training set");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DimensionError("feature and label counts differ");
  }
  Eigen::MatrixXd y(features.rows(), 1);
  int positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Eigen::Index>(i), 0) = labels[i] ? 1.0 : 0.0;
    positives += labels[i] ? 1 : 0;
  }
  ClassifierFit fit;
  CutClassifierModel& model = fit.model;
  model.scaler = Scaler::fit(features);
  model.net = Mlp(static_cast<int>(features.cols()), cfg.hidden, 1, OutputActivation::kLogistic, cfg.train.seed);
  TrainConfig tc = cfg.train;
  tc.loss = Loss::kWeightedBce;
  const int negatives = static_cast<int>(labels.size()) - positives;
  if (cfg.balance && positives > 0 && negatives > 0) {
    tc.positive_weight = static_cast<double>(negatives) / positives;
  }
  fit.history = train(model.net, model.scaler.transform(features), y, tc);
  fit.training_f_score = f_score(model.classify(features), labels);
  spdlog::info("classifier: {} cuts ({} useful), training F-score {:.3f}", labels.size(), positives,
               fit.training_f_score);
  return fit;
}

ClassifierFit fit_classifier(const std::vector<CutLabelRecord>& records, const ClassifierTraining& cfg) {
  std::vector<const CutLabelRecord*> used;
  for (const CutLabelRecord& r : records) {
    if (r.label != CutLabel::kUnlabeled) used.push_back(&r);
  }
  if (used.empty()) throw std::invalid_argument("no labeled cuts");
  const auto dims = static_cast<Eigen::Index>(used.front()->features.size());
  Eigen::MatrixXd f(static_cast<Eigen::Index>(used.size()), dims);
  std::vector<bool> labels;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (static_cast<Eigen::Index>(used[i]->features.size()) != dims) {
      throw DimensionError(fmt::format("cut {} has {} features, expected {}", used[i]->cut_id,
                                       used[i]->features.size(), dims));
    }
    for (Eigen::Index j = 0; j < dims; ++j) f(static_cast<Eigen::Index>(i), j) = used[i]->features[j];
    labels.push_back(used[i]->label == CutLabel::kUseful);
  }
  return fit_classifier(f, labels, cfg);
}

CutClassifier make_cut_classifier(CutClassifierModel model) {
  return [model = std::move(model)](std::span<const Cut> cuts) { return model.classify(cuts); };
}

namespace {

using nlohmann::json;

json scaler_json(const Scaler& s) { return {{"min", s.lo}, {"max", s.hi}}; }

Scaler scaler_from(const json& j, int dims, const char* what) {
  Scaler s;
  s.lo = j.at("min").get<std::vector<double>>();
  s.hi = j.at("max").get<std::vector<double>>();
  if (static_cast<int>(s.lo.size()) != dims || s.hi.size() != s.lo.size()) {
    throw ParseError(fmt::format("checkpoint: {} scaler has the wrong size", what));
  }
  for (std::size_t i = 0; i < s.lo.size(); ++i) {
    if (!(s.hi[i] >= s.lo[i])) throw ParseError(fmt::format("checkpoint: {} scaler max < min", what));
  }
  return s;
}

json net_json(const Mlp& net) {
  const Eigen::VectorXd theta = net.parameters();
  return {{"dims", {net.inputs(), net.hidden(), net.outputs()}},
          {"output", net.activation() == OutputActivation::kLogistic ? "logistic" : "identity"},
          {"weights", std::vector<double>(theta.data(), theta.data() + theta.size())}};
}

Mlp net_from(const json& j) {
  const auto dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() != 3) throw ParseError("checkpoint: dims must list input, hidden and output sizes");
  const auto output = j.at("output").get<std::string>();
  if (output != "identity" && output != "logistic") throw ParseError("checkpoint: unknown output '" + output + "'");
  Mlp net;
  try {
    net = Mlp(dims[0], dims[1], dims[2],
              output == "logistic" ? OutputActivation::kLogistic : OutputActivation::kIdentity, 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  const auto w = j.at("weights").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != net.parameter_count()) {
    throw ParseError(fmt::format("checkpoint: expected {} weights, got {}", net.parameter_count(), w.size()));
  }
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  if (!theta.allFinite()) throw ParseError("checkpoint: non-finite weight");
  net.set_parameters(theta);
  return net;
}

json parse_checkpoint(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "scuc-model") throw ParseError("checkpoint: not a model file");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ParseError(fmt::format("checkpoint: unsupported version {}", j.value("version", 0)));
  }
  if (j.value("kind", "") != kind) {
    throw ParseError(fmt::format("checkpoint: expected a {}, found '{}'", kind, j.value("kind", "")));
  }
  return j;
}

template <typename F>
auto wrap_json_errors(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string regressor_to_text(const AlphaRegressor& model) {
  json j = {{"format", "scuc-model"}, {"version", kCheckpointVersion}, {"kind", "regressor"}};
  j["network"] = net_json(model.net);
  j["x_scaler"] = scaler_json(model.x_scaler);
  j["y_scaler"] = scaler_json(model.y_scaler);
  j["alpha_eta"] = model.alpha_eta;
  return j.dump(1) + "\n";
}

AlphaRegressor regressor_from_text(const std::string& text) {
  const json j = parse_checkpoint(text, "regressor");
  return wrap_json_errors([&] {
    AlphaRegressor m;
    m.net = net_from(j.at("network"));
    m.x_scaler = scaler_from(j.at("x_scaler"), m.net.inputs(), "input");
    m.y_scaler = scaler_from(j.at("y_scaler"), m.net.outputs(), "target");
    m.alpha_eta = j.at("alpha_eta").get<double>();
    if (!(m.alpha_eta >= 0.0 && m.alpha_eta <= 1.0)) throw ParseError("checkpoint: alpha_eta outside [0, 1]");
    return m;
  });
}

std::string classifier_to_text(const CutClassifierModel& model) {
  json j = {{"format", "scuc-model"}, {"version", kCheckpointVersion}, {"kind", "classifier"}};
  j["network"] = net_json(model.net);
  j["scaler"] = scaler_json(model.scaler);
  j["threshold"] = model.threshold;
  return j.dump(1) + "\n";
}

CutClassifierModel classifier_from_text(const std::string& text) {
  const json j = parse_checkpoint(text, "classifier");
  return wrap_json_errors([&] {
    CutClassifierModel m;
    m.net = net_from(j.at("network"));
    if (m.net.outputs() != 1 || m.net.activation() != OutputActivation::kLogistic) {
      throw ParseError("checkpoint: classifier needs one logistic output");
    }
    m.scaler = scaler_from(j.at("scaler"), m.net.inputs(), "feature");
    m.threshold = j.at("threshold").get<double>();
    return m;
  });
}

void save_regressor(const std::filesystem::path& path, const AlphaRegressor& model) {
  write_text(path, regressor_to_text(model));
}
AlphaRegressor load_regressor(const std::filesystem::path& path) { return regressor_from_text(read_text(path)); }
void save_classifier(const std::filesystem::path& path, const CutClassifierModel& model) {
  write_text(path, classifier_to_text(model));
}
CutClassifierModel load_classifier(const std::filesystem::path& path) {
  return classifier_from_text(read_text(path));
}

}  // namespace scuc
