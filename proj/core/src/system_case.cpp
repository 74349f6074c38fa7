#include "scuc/system_case.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scuc/errors.hpp"

namespace scuc {

using nlohmann::json;

int Generator::must_run_hours(int horizon) const {
  if (!initially_on()) return 0;
  return std::max(0, std::min(horizon, min_up - initial_status));
}

int Generator::must_off_hours(int horizon) const {
  if (initially_on()) return 0;
  return std::max(0, std::min(horizon, min_down + initial_status));
}

int SystemCase::bus_index(int bus_id) const {
  for (std::size_t b = 0; b < buses.size(); ++b) {
    if (buses[b].id == bus_id) return static_cast<int>(b);
  }
  return -1;
}

bool is_connected(const SystemCase& system, int skip_line) {
  const int n = system.num_buses();
  if (n == 0) return true;
  std::vector<std::vector<int>> adj(n);
  for (int l = 0; l < system.num_lines(); ++l) {
    if (l == skip_line) continue;
    adj[system.lines[l].from].push_back(system.lines[l].to);
    adj[system.lines[l].to].push_back(system.lines[l].from);
  }
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int b = frontier.front();
    frontier.pop();
    for (int next : adj[b]) {
      if (!seen[next]) {
        seen[next] = true;
        ++count;
        frontier.push(next);
      }
    }
  }
  return count == n;
}

void SystemCase::validate() const {
  if (horizon < 1) throw ValidationError("horizon must be at least 1 hour");
  if (buses.empty()) throw ValidationError("case has no buses");
  std::set<int> bus_ids;
  for (const Bus& b : buses) {
    if (!bus_ids.insert(b.id).second) {
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    }
  }
  if (reference_bus < 0 || reference_bus >= num_buses()) {
    throw ValidationError("reference bus is not a declared bus");
  }
  std::set<std::string> gen_ids;
  for (const Generator& g : generators) {
    const std::string who = "generator '" + g.id + "'";
    if (!gen_ids.insert(g.id).second) throw ValidationError("duplicate " + who);
    if (g.bus < 0 || g.bus >= num_buses()) throw ValidationError(who + " is attached to an unknown bus");
    if (g.p_min < 0.0 || g.p_min > g.p_max) throw ValidationError(who + " needs 0 <= p_min <= p_max");
    if (g.startup_cost < 0.0 || g.shutdown_cost < 0.0) {
      throw ValidationError(who + " has a negative start-up/shut-down cost");
    }
    if (g.cost < 0.0) throw ValidationError(who + " has a negative energy cost");
    if (g.ramp_up <= 0.0 || g.ramp_down <= 0.0) throw ValidationError(who + " needs positive ramp limits");
    if (g.startup_ramp < 0.0 || g.shutdown_ramp < 0.0) {
      throw ValidationError(who + " has a negative start-up/shut-down ramp");
    }
    if (g.min_up < 1 || g.min_down < 1) throw ValidationError(who + " needs min up/down of at least 1 hour");
    if (g.initial_status == 0) throw ValidationError(who + " has initial_status 0 (must be signed hours)");
    if (g.initial_power) {
      const double p0 = *g.initial_power;
      if (g.initially_on() ? (p0 < g.p_min || p0 > g.p_max) : p0 != 0.0) {
        throw ValidationError(who + " has an initial_output outside its operating range");
      }
    }
  }
  std::set<std::string> line_ids;
  for (const Line& l : lines) {
    const std::string who = "line '" + l.id + "'";
    if (!line_ids.insert(l.id).second) throw ValidationError("duplicate " + who);
    if (l.from < 0 || l.from >= num_buses() || l.to < 0 || l.to >= num_buses()) {
      throw ValidationError(who + " references an unknown bus");
    }
    if (l.from == l.to) throw ValidationError(who + " connects a bus to itself");
    if (!(l.reactance > 0.0)) throw ValidationError(who + " needs positive reactance");
    if (!(l.flow_limit > 0.0)) throw ValidationError(who + " needs a positive flow limit");
  }
  if (demand.rows() != num_buses() || demand.cols() != horizon) {
    throw ValidationError("demand matrix must be buses x horizon");
  }
  for (int b = 0; b < num_buses(); ++b) {
    for (int t = 0; t < horizon; ++t) {
      if (!(demand(b, t) >= 0.0)) {
        throw ValidationError("bus " + std::to_string(buses[b].id) + " has negative demand");
      }
    }
  }
  if (!is_connected(*this)) throw ValidationError("network is not connected");
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ParseError("unknown field '" + key + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + " is missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + " field '" + key + "': " + e.what());
  }
}

}  // namespace

SystemCase parse_case(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case file is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"name", "buses", "lines", "generators", "demand", "horizon", "reference_bus"}, "case");

  SystemCase sc;
  sc.name = doc.value("name", std::string{});
  sc.horizon = require<int>(doc, "horizon", "case");

  for (const json& b : require<json>(doc, "buses", "case")) {
    reject_unknown(b, {"id", "name"}, "bus");
    sc.buses.push_back({require<int>(b, "id", "bus"), b.value("name", std::string{})});
  }
  const int ref_id = require<int>(doc, "reference_bus", "case");
  sc.reference_bus = sc.bus_index(ref_id);
  if (sc.reference_bus < 0) throw ValidationError("reference bus " + std::to_string(ref_id) + " is not declared");

  for (const json& l : require<json>(doc, "lines", "case")) {
    reject_unknown(l, {"id", "from", "to", "reactance", "flow_limit", "outage_eligible"}, "line");
    Line line;
    line.id = require<std::string>(l, "id", "line");
    const std::string where = "line '" + line.id + "'";
    const int from = require<int>(l, "from", where);
    const int to = require<int>(l, "to", where);
    line.from = sc.bus_index(from);
    line.to = sc.bus_index(to);
    if (line.from < 0 || line.to < 0) throw ValidationError(where + " references an unknown bus");
    line.reactance = require<double>(l, "reactance", where);
    line.flow_limit = require<double>(l, "flow_limit", where);
    line.outage_eligible = l.value("outage_eligible", true);
    sc.lines.push_back(std::move(line));
  }

  for (const json& g : require<json>(doc, "generators", "case")) {
    reject_unknown(g,
                   {"id", "bus", "p_min", "p_max", "cost", "startup_cost", "shutdown_cost", "ramp_up",
                    "ramp_down", "startup_ramp", "shutdown_ramp", "min_up", "min_down", "initial_status",
                    "initial_output"},
                   "generator");
    Generator gen;
    gen.id = require<std::string>(g, "id", "generator");
    const std::string where = "generator '" + gen.id + "'";
    const int bus_id = require<int>(g, "bus", where);
    gen.bus = sc.bus_index(bus_id);
    if (gen.bus < 0) {
      throw ValidationError(where + " is attached to unknown bus " + std::to_string(bus_id));
    }
    gen.p_min = require<double>(g, "p_min", where);
    gen.p_max = require<double>(g, "p_max", where);
    gen.cost = require<double>(g, "cost", where);
    gen.startup_cost = g.value("startup_cost", 0.0);
    gen.shutdown_cost = g.value("shutdown_cost", 0.0);
    gen.ramp_up = require<double>(g, "ramp_up", where);
    gen.ramp_down = require<double>(g, "ramp_down", where);
    gen.startup_ramp = g.value("startup_ramp", gen.p_min);
    gen.shutdown_ramp = g.value("shutdown_ramp", gen.p_min);
    gen.min_up = g.value("min_up", 1);
    gen.min_down = g.value("min_down", 1);
    gen.initial_status = require<int>(g, "initial_status", where);
    if (g.contains("initial_output")) gen.initial_power = require<double>(g, "initial_output", where);
    sc.generators.push_back(std::move(gen));
  }

  if (sc.horizon < 1) throw ValidationError("horizon must be at least 1 hour");
  sc.demand = Eigen::MatrixXd::Zero(sc.num_buses(), sc.horizon);
  std::set<int> seen;
  for (const json& d : require<json>(doc, "demand", "case")) {
    reject_unknown(d, {"bus", "mw"}, "demand entry");
    const int bus_id = require<int>(d, "bus", "demand entry");
    const int b = sc.bus_index(bus_id);
    if (b < 0) throw ValidationError("demand references unknown bus " + std::to_string(bus_id));
    if (!seen.insert(b).second) throw ValidationError("duplicate demand for bus " + std::to_string(bus_id));
    const auto mw = require<std::vector<double>>(d, "mw", "demand entry");
    if (static_cast<int>(mw.size()) != sc.horizon) {
      throw ValidationError("demand for bus " + std::to_string(bus_id) + " must have one value per hour");
    }
    for (int t = 0; t < sc.horizon; ++t) sc.demand(b, t) = mw[t];
  }
  sc.validate();
  return sc;
}

SystemCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case(buffer.str());
}

std::string serialize_case(const SystemCase& sc) {
  json doc;
  doc["name"] = sc.name;
  doc["horizon"] = sc.horizon;
  doc["reference_bus"] = sc.buses.at(sc.reference_bus).id;
  doc["buses"] = json::array();
  for (const Bus& b : sc.buses) {
    json jb{{"id", b.id}};
    if (!b.name.empty()) jb["name"] = b.name;
    doc["buses"].push_back(jb);
  }
  doc["lines"] = json::array();
  for (const Line& l : sc.lines) {
    doc["lines"].push_back({{"id", l.id},
                            {"from", sc.buses[l.from].id},
                            {"to", sc.buses[l.to].id},
                            {"reactance", l.reactance},
                            {"flow_limit", l.flow_limit},
                            {"outage_eligible", l.outage_eligible}});
  }
  doc["generators"] = json::array();
  for (const Generator& g : sc.generators) {
    json jg = {{"id", g.id},
                                 {"bus", sc.buses[g.bus].id},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"cost", g.cost},
                                 {"startup_cost", g.startup_cost},
                                 {"shutdown_cost", g.shutdown_cost},
                                 {"ramp_up", g.ramp_up},
                                 {"ramp_down", g.ramp_down},
                                 {"startup_ramp", g.startup_ramp},
                                 {"shutdown_ramp", g.shutdown_ramp},
                                 {"min_up", g.min_up},
                                 {"min_down", g.min_down},
                                 {"initial_status", g.initial_status}};
    if (g.initial_power) jg["initial_output"] = *g.initial_power;
    doc["generators"].push_back(std::move(jg));
  }
  doc["demand"] = json::array();
  for (int b = 0; b < sc.num_buses(); ++b) {
    std::vector<double> mw(sc.horizon);
    for (int t = 0; t < sc.horizon; ++t) mw[t] = sc.demand(b, t);
    doc["demand"].push_back({{"bus", sc.buses[b].id}, {"mw", mw}});
  }
  return doc.dump(2);
}

void save_case(const SystemCase& system, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write case file " + path.string());
  out << serialize_case(system) << '\n';
}

}  // namespace scuc
