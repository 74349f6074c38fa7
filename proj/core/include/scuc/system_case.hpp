#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace scuc {

struct Bus {
  int id = 0;
  std::string name;
};

struct Generator {
  std::string id;
  int bus = 0;  // index into SystemCase::buses
  double p_min = 0.0;
  double p_max = 0.0;
  double cost = 0.0;  // $/MWh, linear
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  /// Output limit in the hour of a start-up / the hour before a shut-down.
  double startup_ramp = 0.0;
  double shutdown_ramp = 0.0;
  int min_up = 1;
  int min_down = 1;
  /// Positive: hours already on; negative: hours already off.
  int initial_status = -1;

  [[nodiscard]] bool initially_on() const { return initial_status > 0; }
  /// Hours at the start of the horizon the unit must stay on (UT).
  [[nodiscard]] int must_run_hours(int horizon) const;
  /// Hours at the start of the horizon the unit must stay off (DT).
  [[nodiscard]] int must_off_hours(int horizon) const;
  /// Hour-0 output (MW); unset means p_min for a unit that is on.
  std::optional<double> initial_power;

  /// Dispatch assumed for hour 0 when ramping into hour 1.
  [[nodiscard]] double initial_output() const {
    if (!initially_on()) return 0.0;
    return initial_power.value_or(p_min);
  }
};

struct Line {
  std::string id;
  int from = 0;  // bus indices
  int to = 0;
  double reactance = 0.0;  // per unit
  double flow_limit = 0.0;  // MW
  bool outage_eligible = true;
};

/// Static grid instance: topology, units and the bus x hour base demand.
struct SystemCase {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  int horizon = 0;
  int reference_bus = 0;  // bus index
  Eigen::MatrixXd demand;  // buses x horizon, MW

  [[nodiscard]] int num_buses() const { return static_cast<int>(buses.size()); }
  [[nodiscard]] int num_generators() const { return static_cast<int>(generators.size()); }
  [[nodiscard]] int num_lines() const { return static_cast<int>(lines.size()); }
  [[nodiscard]] int bus_index(int bus_id) const;  // -1 when absent

  /// Throws ValidationError naming the offending entity.
  void validate() const;
};

/// Reads and validates a case document (JSON). Unknown fields are rejected.
SystemCase load_case(const std::filesystem::path& path);
SystemCase parse_case(const std::string& text);
std::string serialize_case(const SystemCase& system);
void save_case(const SystemCase& system, const std::filesystem::path& path);

/// True when the lines (minus `skip_line`, if >= 0) connect every bus.
bool is_connected(const SystemCase& system, int skip_line = -1);

}  // namespace scuc
