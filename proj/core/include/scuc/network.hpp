#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "scuc/system_case.hpp"

namespace scuc {

/// Contingency identifier: the outaged line index, or the base topology.
struct Contingency {
  static constexpr int kBase = -1;
  int outaged_line = kBase;

  [[nodiscard]] bool is_base() const { return outaged_line == kBase; }
  friend bool operator==(const Contingency&, const Contingency&) = default;
};

/// DC shift factors for one topology: MW of line flow per MW injected at a bus
/// and withdrawn at the reference bus. The outaged line's row is all zeros.
struct ShiftFactors {
  Contingency contingency;
  Eigen::MatrixXd sf;  // lines x buses

  [[nodiscard]] bool line_in_service(int line) const { return line != contingency.outaged_line; }
  /// Flows for a nodal net-injection vector (MW).
  [[nodiscard]] Eigen::VectorXd flows(const Eigen::VectorXd& injection) const { return sf * injection; }
};

/// Shift factors below this magnitude are stored as exact zeros.
inline constexpr double kShiftFactorZero = 1e-12;

/// Shift factors of the base network, or with `outaged_line` removed.
/// Throws IslandingError when the outage disconnects the network.
ShiftFactors compute_ptdf(const SystemCase& system, std::optional<int> outaged_line = std::nullopt);

/// Base case followed by every outage-eligible line whose removal keeps the
/// network connected. Islanding outages are skipped with a log note.
std::vector<Contingency> enumerate_contingencies(const SystemCase& system);

/// One ShiftFactors entry per contingency, in the same order.
std::vector<ShiftFactors> compute_shift_factor_set(const SystemCase& system,
                                                   const std::vector<Contingency>& contingencies);

}  // namespace scuc
