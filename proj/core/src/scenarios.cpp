#include "scuc/scenarios.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "scuc/errors.hpp"

namespace scuc {

namespace {

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kSampleTag = 0x5a4d504c45ULL;
constexpr std::uint64_t kScenarioTag = 0x5343454eULL;

}  // namespace

double CounterRng::uniform(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) const {
  std::uint64_t h = mix(seed_);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  h = mix(h ^ d);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void ScenarioConfig::validate() const {
  if (!(sample_lower > 0.0 && sample_lower <= sample_upper)) {
    throw ValidationError("sample bounds must satisfy 0 < lower <= upper");
  }
  if (!(scenario_lower > 0.0 && scenario_lower <= scenario_upper)) {
    throw ValidationError("scenario bounds must satisfy 0 < lower <= upper");
  }
  if (n_scenarios < 1) throw ValidationError("need at least one scenario");
  if (n_samples < 1) throw ValidationError("need at least one sample");
}

Eigen::MatrixXd scale_profile(const Eigen::MatrixXd& base, double lower, double upper, double draw) {
  return base * (lower + draw * (upper - lower));
}

double sample_draw(const ScenarioConfig& cfg, int sample_index) {
  return CounterRng(cfg.seed).uniform(kSampleTag, static_cast<std::uint64_t>(sample_index));
}

Eigen::MatrixXd draw_sample(const Eigen::MatrixXd& base, const ScenarioConfig& cfg, int sample_index) {
  cfg.validate();
  return scale_profile(base, cfg.sample_lower, cfg.sample_upper, sample_draw(cfg, sample_index));
}

ScenarioSet draw_scenarios(const Eigen::MatrixXd& sample, const ScenarioConfig& cfg, const ScenarioDraws& draws) {
  cfg.validate();
  ScenarioSet out;
  const double span = cfg.scenario_upper - cfg.scenario_lower;
  for (int w = 0; w < cfg.n_scenarios; ++w) {
    Eigen::MatrixXd d(sample.rows(), sample.cols());
    for (Eigen::Index t = 0; t < sample.cols(); ++t) {
      for (Eigen::Index b = 0; b < sample.rows(); ++b) {
        const int bus_key = cfg.per_bus ? static_cast<int>(b) : 0;
        d(b, t) = sample(b, t) * (cfg.scenario_lower + draws(w, bus_key, static_cast<int>(t)) * span);
      }
    }
    out.demands.push_back(std::move(d));
    out.probabilities.push_back(1.0 / cfg.n_scenarios);
  }
  return out;
}

ScenarioSet draw_scenarios(const Eigen::MatrixXd& sample, const ScenarioConfig& cfg, int sample_index) {
  const CounterRng rng(cfg.seed);
  const auto s = static_cast<std::uint64_t>(sample_index);
  return draw_scenarios(sample, cfg, [&](int w, int b, int t) {
    return rng.uniform(kScenarioTag ^ (s << 8), static_cast<std::uint64_t>(w), static_cast<std::uint64_t>(b),
                       static_cast<std::uint64_t>(t));
  });
}

void write_scenarios(std::ostream& out, const ScenarioSet& set, const SystemCase& system) {
  out << "scenario,hour,bus,demand_mw,probability\n";
  for (int w = 0; w < set.size(); ++w) {
    const Eigen::MatrixXd& d = set.demands[w];
    if (d.rows() != system.num_buses() || d.cols() != system.horizon) {
      throw DimensionError("scenario matrix does not match the case dimensions");
    }
    for (int t = 0; t < system.horizon; ++t) {
      for (int b = 0; b < system.num_buses(); ++b) {
        out << fmt::format("{},{},{},{:.17g},{:.17g}\n", w, t + 1, system.buses[b].id, d(b, t),
                           set.probabilities[w]);
      }
    }
  }
}

void save_scenarios(const std::filesystem::path& path, const ScenarioSet& set, const SystemCase& system) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scenario file " + path.string());
  write_scenarios(out, set, system);
}

ScenarioSet read_scenarios(std::istream& in, const SystemCase& system) {
  std::string line;
  if (!std::getline(in, line) || line != "scenario,hour,bus,demand_mw,probability") {
    throw ParseError("scenario file has an unexpected header");
  }
  std::map<int, Eigen::MatrixXd> demands;
  std::map<int, double> probs;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[5];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) throw ParseError(fmt::format("scenario file row {}: expected 5 fields", row));
    }
    int w = 0;
    int hour = 0;
    int bus_id = 0;
    double mw = 0.0;
    double p = 0.0;
    try {
      w = std::stoi(cell[0]);
      hour = std::stoi(cell[1]);
      bus_id = std::stoi(cell[2]);
      mw = std::stod(cell[3]);
      p = std::stod(cell[4]);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("scenario file row {}: malformed number", row));
    }
    const int b = system.bus_index(bus_id);
    if (b < 0) throw ValidationError(fmt::format("scenario file row {}: unknown bus {}", row, bus_id));
    if (hour < 1 || hour > system.horizon) throw ValidationError(fmt::format("scenario file row {}: hour out of range", row));
    if (w < 0) throw ValidationError(fmt::format("scenario file row {}: negative scenario index", row));
    if (mw < 0.0) throw ValidationError(fmt::format("scenario file row {}: negative demand", row));
    auto [it, fresh] = demands.try_emplace(w, Eigen::MatrixXd::Constant(system.num_buses(), system.horizon, -1.0));
    it->second(b, hour - 1) = mw;
    probs[w] = p;
  }
  ScenarioSet set;
  int expect = 0;
  for (auto& [w, d] : demands) {
    if (w != expect++) throw ValidationError("scenario indices must be contiguous from 0");
    if ((d.array() < 0.0).any()) throw ValidationError(fmt::format("scenario {} is missing entries", w));
    set.demands.push_back(std::move(d));
    set.probabilities.push_back(probs[w]);
  }
  if (set.demands.empty()) throw ValidationError("scenario file holds no scenarios");
  double total = 0.0;
  for (double p : set.probabilities) total += p;
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("scenario probabilities must sum to 1");
  return set;
}

ScenarioSet load_scenarios(const std::filesystem::path& path, const SystemCase& system) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  return read_scenarios(in, system);
}

}  // namespace scuc
