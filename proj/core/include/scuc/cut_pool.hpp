#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scuc/scenarios.hpp"
#include "scuc/system_case.hpp"
#include "scuc/uc_model.hpp"

namespace scuc {

enum class CutLabel { kUnlabeled, kUseful, kNonUseful };

const char* to_string(CutLabel label);

/// Number of classifier features stored on every cut.
inline constexpr int kCutFeatureCount = 7;

/// Optimality cut alpha_w >= value + gradient . (x - anchor) over the flattened (u, y, z).
struct Cut {
  int id = -1;
  int scenario = 0;
  /// Iteration whose master point is the anchor (the cut enters the master at iteration + 1).
  int iteration = 0;
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::VectorXd anchor;
  CutLabel label = CutLabel::kUnlabeled;
  bool retained = true;
  std::vector<double> features;

  [[nodiscard]] int nonzero_coefficients() const;
};

/// psi(x): the right-hand side of the cut at a first-stage point.
double cut_value(const Cut& cut, const Eigen::VectorXd& x);
double cut_value(const Cut& cut, const Commitment& commitment);

/// Every cut generated during a run, with a retained flag per cut.
class CutPool {
 public:
  CutPool() = default;
  explicit CutPool(int n_scenarios) : n_scenarios_(n_scenarios) {}

  /// Stores the cut (retained) and returns its id.
  int add(Cut cut);
  void drop(int id) { cuts_.at(id).retained = false; }
  void retain(int id) { cuts_.at(id).retained = true; }

  [[nodiscard]] const std::vector<Cut>& archive() const { return cuts_; }
  [[nodiscard]] std::vector<Cut>& mutable_archive() { return cuts_; }
  [[nodiscard]] const Cut& at(int id) const { return cuts_.at(id); }
  [[nodiscard]] std::vector<const Cut*> retained() const;
  [[nodiscard]] std::vector<int> from_iteration(int iteration) const;
  [[nodiscard]] std::size_t total() const { return cuts_.size(); }
  [[nodiscard]] std::size_t retained_count() const;
  [[nodiscard]] std::size_t dropped_count() const { return total() - retained_count(); }
  [[nodiscard]] int scenarios() const { return n_scenarios_; }

 private:
  int n_scenarios_ = 0;
  std::vector<Cut> cuts_;
};

struct FilterResult {
  std::vector<int> useful;
  std::vector<int> non_useful;
};

/// Criterion on the cuts anchored at `iteration`: useful iff |alpha_w - psi(x)| <= delta
/// at the master point (x, alpha). Non-useful cuts are dropped.
FilterResult filter_by_criterion(CutPool& pool, int iteration, const Eigen::VectorXd& master_point,
                                 std::span<const double> alpha, double delta);

/// Scenarios with the r largest total demand; ties go to the lower index.
std::vector<int> high_load_scenarios(const ScenarioSet& scenarios, int r);

/// Force-retains the cuts of `iteration` that come from the r highest-load scenarios.
void apply_retention(CutPool& pool, int iteration, const ScenarioSet& scenarios, int r);

/// Fills `features` of the cuts generated in one iteration (one per scenario,
/// any order): normalised J_SP, normalised dual 1-norm, dual nonzero fraction,
/// squashed relative violation at the master point, iteration / cap,
/// normalised scenario demand and scenario demand rank (0 = highest load).
void assign_cut_features(std::span<Cut> cuts, std::span<const double> alpha, int iteration, int max_iterations,
                         const ScenarioSet& scenarios);

struct PoolStats {
  std::size_t total = 0;
  std::size_t useful = 0;
  double fraction = 0.0;
  std::size_t est_bytes = 0;
};

/// Per-cut memory estimate: 8 bytes per nonzero coefficient plus a fixed overhead.
inline constexpr std::size_t kCoefficientBytes = 8;
inline constexpr std::size_t kCutOverheadBytes = 32;
std::size_t estimate_bytes(const Cut& cut);

PoolStats make_pool_stats(std::size_t total, std::size_t useful, std::size_t est_bytes);
/// Total generated vs retained cuts; memory counts retained cuts.
PoolStats pool_stats(const CutPool& pool);

struct CutLabelRecord {
  int cut_id = -1;
  int scenario = 0;
  int iteration = 0;
  std::vector<double> features;
  CutLabel label = CutLabel::kUnlabeled;
  double lb_increase = 0.0;
};

struct ReplayResult {
  std::vector<CutLabelRecord> records;
  double initial_lb = 0.0;
  double final_lb = 0.0;
  /// Master solves after the empty-pool baseline; one per cut.
  std::size_t resolves = 0;
};

inline constexpr double kReplayThreshold = 1e-6;

/// Replays a cut archive into a master-only loop, adding cuts one at a time in
/// generation order; a cut is useful when it raises the master objective by
/// more than kReplayThreshold. Writes the labels back into `archive`.
ReplayResult label_by_replay(const SystemCase& system, std::vector<Cut>& archive, std::span<const double> floors);

void write_label_records(std::ostream& out, const std::vector<CutLabelRecord>& records);
std::vector<CutLabelRecord> read_label_records(std::istream& in);

}  // namespace scuc
