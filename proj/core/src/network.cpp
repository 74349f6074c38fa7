#include "scuc/network.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "scuc/errors.hpp"

namespace scuc {

ShiftFactors compute_ptdf(const SystemCase& system, std::optional<int> outaged_line) {
  const int n = system.num_buses();
  const int skip = outaged_line.value_or(Contingency::kBase);
  if (skip != Contingency::kBase && (skip < 0 || skip >= system.num_lines())) {
    throw std::out_of_range("outaged line index out of range");
  }
  if (!is_connected(system, skip)) {
    throw IslandingError("outage of line '" + system.lines[skip].id + "' islands the network");
  }

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < system.num_lines(); ++l) {
    if (l == skip) continue;
    const Line& line = system.lines[l];
    const double y = 1.0 / line.reactance;
    b(line.from, line.from) += y;
    b(line.to, line.to) += y;
    b(line.from, line.to) -= y;
    b(line.to, line.from) -= y;
  }

  // Reduced susceptance matrix without the reference bus; its inverse padded
  // with a zero row/column maps injections to angles with theta_ref = 0.
  const int ref = system.reference_bus;
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (i != ref) keep.push_back(i);
  }
  Eigen::MatrixXd reactance_map = Eigen::MatrixXd::Zero(n, n);
  if (!keep.empty()) {
    const int k = static_cast<int>(keep.size());
    Eigen::MatrixXd reduced(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) reduced(i, j) = b(keep[i], keep[j]);
    }
    const Eigen::MatrixXd inv = reduced.partialPivLu().inverse();
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) reactance_map(keep[i], keep[j]) = inv(i, j);
    }
  }

  ShiftFactors out;
  out.contingency.outaged_line = skip;
  out.sf = Eigen::MatrixXd::Zero(system.num_lines(), n);
  for (int l = 0; l < system.num_lines(); ++l) {
    if (l == skip) continue;
    const Line& line = system.lines[l];
    out.sf.row(l) = (reactance_map.row(line.from) - reactance_map.row(line.to)) / line.reactance;
  }
  out.sf.col(ref).setZero();
  // Roundoff residue of exact zeros; left in, it ends up as near-singular LP pivots.
  out.sf = out.sf.unaryExpr([](double v) { return std::abs(v) < kShiftFactorZero ? 0.0 : v; });
  return out;
}

std::vector<Contingency> enumerate_contingencies(const SystemCase& system) {
  std::vector<Contingency> out{Contingency{}};
  for (int l = 0; l < system.num_lines(); ++l) {
    if (!system.lines[l].outage_eligible) continue;
    if (!is_connected(system, l)) {
      spdlog::info("skipping contingency on line '{}': outage islands the network", system.lines[l].id);
      continue;
    }
    out.push_back(Contingency{l});
  }
  return out;
}

std::vector<ShiftFactors> compute_shift_factor_set(const SystemCase& system,
                                                   const std::vector<Contingency>& contingencies) {
  std::vector<ShiftFactors> out;
  out.reserve(contingencies.size());
  for (const Contingency& c : contingencies) {
    out.push_back(c.is_base() ? compute_ptdf(system) : compute_ptdf(system, c.outaged_line));
  }
  return out;
}

}  // namespace scuc
