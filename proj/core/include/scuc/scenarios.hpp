#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "scuc/system_case.hpp"

namespace scuc {

/// Two-stage load randomness: one profile-level scale per sample, then
/// independent hourly scales per scenario.
struct ScenarioConfig {
  double sample_lower = 0.70;
  double sample_upper = 1.30;
  double scenario_lower = 0.95;
  double scenario_upper = 1.05;
  int n_scenarios = 40;
  int n_samples = 1;
  std::uint64_t seed = 0;
  /// Draw a separate scenario scale for every bus; otherwise one per hour.
  bool per_bus = true;

  void validate() const;  // throws ValidationError
};

struct ScenarioSet {
  std::vector<Eigen::MatrixXd> demands;  // each buses x horizon
  std::vector<double> probabilities;

  [[nodiscard]] int size() const { return static_cast<int>(demands.size()); }
  /// Total MW over the horizon, used to rank scenarios by load.
  [[nodiscard]] double total_demand(int scenario) const { return demands.at(scenario).sum(); }
};

/// Stateless counter-based generator: every draw is a hash of its coordinates,
/// so results do not depend on evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  /// Uniform in [0, 1).
  [[nodiscard]] double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                               std::uint64_t d = 0) const;
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Draw in [0,1] for (scenario, bus, hour); used to inject fixed draws in tests.
using ScenarioDraws = std::function<double(int scenario, int bus, int hour)>;

/// base * (lower + draw * (upper - lower)).
Eigen::MatrixXd scale_profile(const Eigen::MatrixXd& base, double lower, double upper, double draw);

/// Sample `sample_index` of the daily profile: one scalar scale for the whole matrix.
Eigen::MatrixXd draw_sample(const Eigen::MatrixXd& base, const ScenarioConfig& cfg, int sample_index);
double sample_draw(const ScenarioConfig& cfg, int sample_index);

/// n equiprobable scenarios around `sample`.
ScenarioSet draw_scenarios(const Eigen::MatrixXd& sample, const ScenarioConfig& cfg, int sample_index);
ScenarioSet draw_scenarios(const Eigen::MatrixXd& sample, const ScenarioConfig& cfg, const ScenarioDraws& draws);

/// Columnar text: scenario,hour,bus,demand_mw,probability (hour 1-based, bus by id).
void write_scenarios(std::ostream& out, const ScenarioSet& set, const SystemCase& system);
void save_scenarios(const std::filesystem::path& path, const ScenarioSet& set, const SystemCase& system);
ScenarioSet read_scenarios(std::istream& in, const SystemCase& system);
ScenarioSet load_scenarios(const std::filesystem::path& path, const SystemCase& system);

}  // namespace scuc
