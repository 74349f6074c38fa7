#include "scuc/cut_pool.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "scuc/benders.hpp"
#include "scuc/errors.hpp"

namespace scuc {

const char* to_string(CutLabel label) {
  switch (label) {
    case CutLabel::kUseful:
      return "useful";
    case CutLabel::kNonUseful:
      return "non-useful";
    case CutLabel::kUnlabeled:
      break;
  }
  return "unlabeled";
}

int Cut::nonzero_coefficients() const {
  int n = 0;
  for (Eigen::Index j = 0; j < gradient.size(); ++j) {
    if (std::abs(gradient(j)) > 1e-12) ++n;
  }
  return n;
}

double cut_value(const Cut& cut, const Eigen::VectorXd& x) {
  if (x.size() != cut.anchor.size() || cut.gradient.size() != cut.anchor.size()) {
    throw DimensionError("cut and first-stage point have different dimensions");
  }
  return cut.value + cut.gradient.dot(x - cut.anchor);
}

double cut_value(const Cut& cut, const Commitment& commitment) { return cut_value(cut, commitment.flatten()); }

int CutPool::add(Cut cut) {
  cut.id = static_cast<int>(cuts_.size());
  cut.retained = true;
  cuts_.push_back(std::move(cut));
  return cuts_.back().id;
}

std::vector<const Cut*> CutPool::retained() const {
  std::vector<const Cut*> out;
  for (const Cut& c : cuts_) {
    if (c.retained) out.push_back(&c);
  }
  return out;
}

std::vector<int> CutPool::from_iteration(int iteration) const {
  std::vector<int> out;
  for (const Cut& c : cuts_) {
    if (c.iteration == iteration) out.push_back(c.id);
  }
  return out;
}

std::size_t CutPool::retained_count() const {
  return static_cast<std::size_t>(std::count_if(cuts_.begin(), cuts_.end(), [](const Cut& c) { return c.retained; }));
}

FilterResult filter_by_criterion(CutPool& pool, int iteration, const Eigen::VectorXd& master_point,
                                 std::span<const double> alpha, double delta) {
  FilterResult out;
  for (int id : pool.from_iteration(iteration)) {
    const Cut& cut = pool.at(id);
    const double a = alpha[static_cast<std::size_t>(cut.scenario)];
    if (std::abs(a - cut_value(cut, master_point)) <= delta) {
      out.useful.push_back(id);
    } else {
      out.non_useful.push_back(id);
      pool.drop(id);
    }
  }
  return out;
}

std::vector<int> high_load_scenarios(const ScenarioSet& scenarios, int r) {
  std::vector<int> order(static_cast<std::size_t>(scenarios.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scenarios.total_demand(a) > scenarios.total_demand(b); });
  order.resize(static_cast<std::size_t>(std::clamp(r, 0, scenarios.size())));
  return order;
}

void apply_retention(CutPool& pool, int iteration, const ScenarioSet& scenarios, int r) {
  const std::vector<int> keep = high_load_scenarios(scenarios, r);
  for (int id : pool.from_iteration(iteration)) {
    if (std::find(keep.begin(), keep.end(), pool.at(id).scenario) != keep.end()) pool.retain(id);
  }
}

void assign_cut_features(std::span<Cut> cuts, std::span<const double> alpha, int iteration, int max_iterations,
                         const ScenarioSet& scenarios) {
  double max_value = 0.0;
  double max_norm = 0.0;
  for (const Cut& c : cuts) {
    max_value = std::max(max_value, std::abs(c.value));
    max_norm = std::max(max_norm, c.gradient.lpNorm<1>());
  }
  double max_demand = 0.0;
  for (int w = 0; w < scenarios.size(); ++w) max_demand = std::max(max_demand, scenarios.total_demand(w));
  const std::vector<int> by_load = high_load_scenarios(scenarios, scenarios.size());
  const double rank_scale = scenarios.size() > 1 ? 1.0 / (scenarios.size() - 1) : 0.0;

  for (Cut& c : cuts) {
    const auto rank = std::find(by_load.begin(), by_load.end(), c.scenario) - by_load.begin();
    const double violation = (c.value - alpha[static_cast<std::size_t>(c.scenario)]) / std::max(1.0, std::abs(c.value));
    c.features = {
        max_value > 0.0 ? c.value / max_value : 0.0,
        max_norm > 0.0 ? c.gradient.lpNorm<1>() / max_norm : 0.0,
        c.gradient.size() > 0 ? static_cast<double>(c.nonzero_coefficients()) / static_cast<double>(c.gradient.size())
                              : 0.0,
        std::tanh(violation),
        max_iterations > 0 ? static_cast<double>(iteration) / max_iterations : 0.0,
        max_demand > 0.0 ? scenarios.total_demand(c.scenario) / max_demand : 0.0,
        static_cast<double>(rank) * rank_scale,
    };
  }
}

std::size_t estimate_bytes(const Cut& cut) {
  return static_cast<std::size_t>(cut.nonzero_coefficients()) * kCoefficientBytes + kCutOverheadBytes;
}

PoolStats make_pool_stats(std::size_t total, std::size_t useful, std::size_t est_bytes) {
  PoolStats s;
  s.total = total;
  s.useful = useful;
  s.fraction = total == 0 ? 0.0 : static_cast<double>(useful) / static_cast<double>(total);
  s.est_bytes = est_bytes;
  return s;
}

PoolStats pool_stats(const CutPool& pool) {
  std::size_t bytes = 0;
  for (const Cut* c : pool.retained()) bytes += estimate_bytes(*c);
  return make_pool_stats(pool.total(), pool.retained_count(), bytes);
}

ReplayResult label_by_replay(const SystemCase& system, std::vector<Cut>& archive, std::span<const double> floors) {
  std::vector<std::size_t> order(archive.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (archive[a].iteration != archive[b].iteration) return archive[a].iteration < archive[b].iteration;
    return archive[a].scenario < archive[b].scenario;
  });

  MasterProblem master = build_master(system, floors, {});
  auto solve = [&] {
    const MasterSolution sol = solve_master(master);
    if (sol.status != SolveStatus::kOptimal) throw SolverError("replay master solve failed");
    return sol.objective;
  };

  ReplayResult out;
  out.initial_lb = solve();
  double lb = out.initial_lb;
  for (std::size_t i : order) {
    Cut& cut = archive[i];
    add_cut_row(master, cut);
    const double next = solve();
    ++out.resolves;
    CutLabelRecord rec;
    rec.cut_id = cut.id;
    rec.scenario = cut.scenario;
    rec.iteration = cut.iteration;
    rec.features = cut.features;
    rec.lb_increase = next - lb;
    rec.label = rec.lb_increase > kReplayThreshold ? CutLabel::kUseful : CutLabel::kNonUseful;
    cut.label = rec.label;
    out.records.push_back(std::move(rec));
    lb = std::max(lb, next);
  }
  out.final_lb = lb;
  return out;
}

void write_label_records(std::ostream& out, const std::vector<CutLabelRecord>& records) {
  out << "cut,scenario,iteration";
  for (int f = 0; f < kCutFeatureCount; ++f) out << ",f" << f;
  out << ",label,lb_increase\n";
  for (const CutLabelRecord& r : records) {
    if (static_cast<int>(r.features.size()) != kCutFeatureCount) {
      throw DimensionError(fmt::format("cut {} carries {} features", r.cut_id, r.features.size()));
    }
    out << r.cut_id << ',' << r.scenario << ',' << r.iteration;
    for (double f : r.features) out << fmt::format(",{:.17g}", f);
    out << ',' << (r.label == CutLabel::kUseful ? 1 : 0) << fmt::format(",{:.17g}\n", r.lb_increase);
  }
}

std::vector<CutLabelRecord> read_label_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("cut,scenario,iteration", 0) != 0) {
    throw ParseError("label file has an unexpected header");
  }
  std::vector<CutLabelRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(kCutFeatureCount + 5)) {
      throw ParseError(fmt::format("label file row {}: expected {} fields", row, kCutFeatureCount + 5));
    }
    CutLabelRecord r;
    try {
      r.cut_id = std::stoi(cells[0]);
      r.scenario = std::stoi(cells[1]);
      r.iteration = std::stoi(cells[2]);
      for (int f = 0; f < kCutFeatureCount; ++f) r.features.push_back(std::stod(cells[3 + f]));
      const int label = std::stoi(cells[3 + kCutFeatureCount]);
      if (label != 0 && label != 1) throw ParseError(fmt::format("label file row {}: label must be 0 or 1", row));
      r.label = label == 1 ? CutLabel::kUseful : CutLabel::kNonUseful;
      r.lb_increase = std::stod(cells[4 + kCutFeatureCount]);
    } catch (const std::invalid_argument&) {
      throw ParseError(fmt::format("label file row {}: malformed number", row));
    } catch (const std::out_of_range&) {
      throw ParseError(fmt::format("label file row {}: number out of range", row));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace scuc
