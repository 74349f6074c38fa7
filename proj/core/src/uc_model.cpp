#include "scuc/uc_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "scuc/errors.hpp"
#include "scuc/solver.hpp"

namespace scuc {

Commitment Commitment::from_status(const SystemCase& system, const Eigen::MatrixXd& u) {
  Commitment c;
  c.u = u;
  c.y = Eigen::MatrixXd::Zero(u.rows(), u.cols());
  c.z = Eigen::MatrixXd::Zero(u.rows(), u.cols());
  for (Eigen::Index g = 0; g < u.rows(); ++g) {
    double prev = system.generators[g].initially_on() ? 1.0 : 0.0;
    for (Eigen::Index t = 0; t < u.cols(); ++t) {
      c.y(g, t) = std::max(0.0, u(g, t) - prev);
      c.z(g, t) = std::max(0.0, prev - u(g, t));
      prev = u(g, t);
    }
  }
  return c;
}

Eigen::VectorXd Commitment::flatten() const {
  const Eigen::Index n = u.size();
  Eigen::VectorXd out(3 * n);
  for (Eigen::Index g = 0; g < u.rows(); ++g) {
    for (Eigen::Index t = 0; t < u.cols(); ++t) {
      const Eigen::Index k = g * u.cols() + t;
      out(k) = u(g, t);
      out(n + k) = y(g, t);
      out(2 * n + k) = z(g, t);
    }
  }
  return out;
}

Commitment Commitment::unflatten(const Eigen::VectorXd& flat, int generators, int hours) {
  const int n = generators * hours;
  if (flat.size() != 3 * n) throw DimensionError("flattened commitment has the wrong length");
  Commitment c;
  c.u.resize(generators, hours);
  c.y.resize(generators, hours);
  c.z.resize(generators, hours);
  for (int g = 0; g < generators; ++g) {
    for (int t = 0; t < hours; ++t) {
      const int k = g * hours + t;
      c.u(g, t) = flat(k);
      c.y(g, t) = flat(n + k);
      c.z(g, t) = flat(2 * n + k);
    }
  }
  return c;
}

std::string Commitment::violation(const SystemCase& system) const {
  if (u.rows() != system.num_generators() || u.cols() != system.horizon || y.rows() != u.rows() ||
      y.cols() != u.cols() || z.rows() != u.rows() || z.cols() != u.cols()) {
    return "commitment dimensions do not match the case";
  }
  LpModel model;
  const FirstStageLayout layout = add_first_stage(model, system);
  const Eigen::VectorXd flat = flatten();
  std::vector<double> x(flat.data(), flat.data() + flat.size());
  for (int j = 0; j < layout.size(); ++j) {
    if (x[j] != 0.0 && x[j] != 1.0) return fmt::format("entry {} is not binary", j);
    const Variable& v = model.variables()[j];
    if (x[j] < v.lower || x[j] > v.upper) return fmt::format("{} violates an initial-condition bound", v.name);
  }
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const Constraint& row = model.constraints()[r];
    const double a = model.activity(r, x);
    const bool ok = (row.sense == RowSense::kLessEqual && a <= row.rhs + 1e-9) ||
                    (row.sense == RowSense::kGreaterEqual && a >= row.rhs - 1e-9) ||
                    (row.sense == RowSense::kEqual && std::abs(a - row.rhs) <= 1e-9) ||
                    (row.sense == RowSense::kRange && a >= row.range_lower - 1e-9 && a <= row.rhs + 1e-9);
    if (!ok) return "violates " + row.name;
  }
  return {};
}

FirstStageLayout add_first_stage(LpModel& model, const SystemCase& system) {
  FirstStageLayout layout{system.num_generators(), system.horizon, static_cast<int>(model.num_variables())};
  const int G = layout.generators;
  const int T = layout.hours;
  for (int g = 0; g < G; ++g) {
    const Generator& gen = system.generators[g];
    const int up = gen.must_run_hours(T);
    const int down = gen.must_off_hours(T);
    for (int t = 0; t < T; ++t) {
      const double lo = t < up ? 1.0 : 0.0;
      const double hi = t < down ? 0.0 : 1.0;
      model.add_variable(lo, hi, 0.0, fmt::format("u_{}_{}", gen.id, t + 1), true);
    }
  }
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      model.add_binary(system.generators[g].startup_cost, fmt::format("y_{}_{}", system.generators[g].id, t + 1));
    }
  }
  for (int g = 0; g < G; ++g) {
    for (int t = 0; t < T; ++t) {
      model.add_binary(system.generators[g].shutdown_cost, fmt::format("z_{}_{}", system.generators[g].id, t + 1));
    }
  }

  std::vector<int> idx;
  std::vector<double> val;
  auto reset = [&] {
    idx.clear();
    val.clear();
  };
  for (int g = 0; g < G; ++g) {
    const Generator& gen = system.generators[g];
    const double u0 = gen.initially_on() ? 1.0 : 0.0;
    for (int t = 0; t < T; ++t) {
      // y - z - u_t + u_{t-1} = 0
      reset();
      idx = {layout.y(g, t), layout.z(g, t), layout.u(g, t)};
      val = {1.0, -1.0, -1.0};
      double rhs = 0.0;
      if (t > 0) {
        idx.push_back(layout.u(g, t - 1));
        val.push_back(1.0);
      } else {
        rhs = -u0;
      }
      model.add_constraint(idx, val, RowSense::kEqual, rhs, fmt::format("transition_{}_{}", gen.id, t + 1));
      const int yz[] = {layout.y(g, t), layout.z(g, t)};
      const double ones[] = {1.0, 1.0};
      model.add_constraint(yz, ones, RowSense::kLessEqual, 1.0, fmt::format("exclusive_{}_{}", gen.id, t + 1));
    }

    // Minimum up time, windows fully inside the horizon, then the tail.
    const int on = gen.min_up;
    for (int t = gen.must_run_hours(T); t <= T - on; ++t) {
      reset();
      for (int tau = t; tau < t + on; ++tau) {
        idx.push_back(layout.u(g, tau));
        val.push_back(1.0);
      }
      idx.push_back(layout.y(g, t));
      val.push_back(-static_cast<double>(on));
      model.add_constraint(idx, val, RowSense::kGreaterEqual, 0.0, fmt::format("min_up_{}_{}", gen.id, t + 1));
    }
    for (int t = std::max(0, T - on + 1); t < T; ++t) {
      reset();
      for (int tau = t; tau < T; ++tau) {
        idx.push_back(layout.u(g, tau));
        val.push_back(1.0);
      }
      idx.push_back(layout.y(g, t));
      val.push_back(-static_cast<double>(T - t));
      model.add_constraint(idx, val, RowSense::kGreaterEqual, 0.0, fmt::format("min_up_tail_{}_{}", gen.id, t + 1));
    }

    const int off = gen.min_down;
    for (int t = gen.must_off_hours(T); t <= T - off; ++t) {
      reset();
      for (int tau = t; tau < t + off; ++tau) {
        idx.push_back(layout.u(g, tau));
        val.push_back(-1.0);
      }
      idx.push_back(layout.z(g, t));
      val.push_back(-static_cast<double>(off));
      model.add_constraint(idx, val, RowSense::kGreaterEqual, -static_cast<double>(off),
                           fmt::format("min_down_{}_{}", gen.id, t + 1));
    }
    for (int t = std::max(0, T - off + 1); t < T; ++t) {
      reset();
      for (int tau = t; tau < T; ++tau) {
        idx.push_back(layout.u(g, tau));
        val.push_back(-1.0);
      }
      idx.push_back(layout.z(g, t));
      val.push_back(-static_cast<double>(T - t));
      model.add_constraint(idx, val, RowSense::kGreaterEqual, -static_cast<double>(T - t),
                           fmt::format("min_down_tail_{}_{}", gen.id, t + 1));
    }
  }
  return layout;
}

Commitment extract_commitment(const FirstStageLayout& layout, std::span<const double> x) {
  Commitment c;
  c.u.resize(layout.generators, layout.hours);
  c.y.resize(layout.generators, layout.hours);
  c.z.resize(layout.generators, layout.hours);
  for (int g = 0; g < layout.generators; ++g) {
    for (int t = 0; t < layout.hours; ++t) {
      c.u(g, t) = x[layout.u(g, t)] > 0.5 ? 1.0 : 0.0;
      c.y(g, t) = x[layout.y(g, t)] > 0.5 ? 1.0 : 0.0;
      c.z(g, t) = x[layout.z(g, t)] > 0.5 ? 1.0 : 0.0;
    }
  }
  return c;
}

double commitment_cost(const SystemCase& system, const Commitment& commitment) {
  double total = 0.0;
  for (int g = 0; g < system.num_generators(); ++g) {
    total += system.generators[g].startup_cost * commitment.y.row(g).sum();
    total += system.generators[g].shutdown_cost * commitment.z.row(g).sum();
  }
  return total;
}

SecondStageBlock::SecondStageBlock(const SystemCase& system, const std::vector<ShiftFactors>& shift_factors,
                                   const Eigen::MatrixXd& demand, double probability,
                                   const SecondStageOptions& options)
    : system_(system),
      sf_(shift_factors),
      demand_(demand),
      probability_(probability),
      options_(options),
      G_(system.num_generators()),
      T_(system.horizon),
      C_(static_cast<int>(shift_factors.size())) {
  if (demand.rows() != system.num_buses() || demand.cols() != system.horizon) {
    throw DimensionError(fmt::format("scenario demand is {}x{}, case needs {}x{}", demand.rows(), demand.cols(),
                                     system.num_buses(), system.horizon));
  }
  if (C_ < 1 || !shift_factors.front().contingency.is_base()) {
    throw DimensionError("shift factor set must start with the base topology");
  }
}

void SecondStageBlock::build(LpModel& model, const FirstStageLayout& layout, bool with_network) {
  build_impl(model, &layout, nullptr, with_network);
}

void SecondStageBlock::build(LpModel& model, const Commitment& fixed, bool with_network) {
  if (fixed.generators() != G_ || fixed.hours() != T_) throw DimensionError("commitment does not match the case");
  build_impl(model, nullptr, &fixed, with_network);
}

void SecondStageBlock::add_row(LpModel& model, std::vector<int> idx, std::vector<double> val, RowSense sense,
                               double rhs, const std::vector<std::pair<int, double>>& first_stage,
                               const std::string& name) {
  const int row = static_cast<int>(model.num_constraints());
  for (const auto& [j, coef] : first_stage) {
    if (coef == 0.0) continue;
    if (layout_) {
      idx.push_back(layout_->offset + j);
      val.push_back(coef);
    } else {
      rhs -= coef * fixed_flat_(j);
      links_.push_back({row, j, coef});
    }
  }
  model.add_constraint(idx, val, sense, rhs, name);
}

void SecondStageBlock::build_impl(LpModel& model, const FirstStageLayout* layout, const Commitment* fixed,
                                  bool with_network) {
  if (layout) layout_ = *layout;
  fixed_ = fixed;
  if (fixed) fixed_flat_ = fixed->flatten();
  links_.clear();
  line_slack_.clear();
  network_row_.clear();
  slack_vars_.clear();
  network_rows_ = 0;
  const double rho = options_.penalty;
  const int GT = G_ * T_;
  auto y_of = [&](int g, int t) { return GT + g * T_ + t; };
  auto z_of = [&](int g, int t) { return 2 * GT + g * T_ + t; };

  block_p0_.assign(C_, -1);
  auto add_slack = [&](const std::string& name) {
    const int v = model.add_variable(0.0, kInf, rho, name);
    slack_vars_.push_back(v);
    return v;
  };
  nu0_ = static_cast<int>(model.num_variables());
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) add_slack(fmt::format("nu_{}_{}", system_.generators[g].id, t + 1));
  }
  gamma0_ = static_cast<int>(model.num_variables());
  for (int t = 0; t < T_; ++t) add_slack(fmt::format("gamma_{}", t + 1));
  mu0_ = static_cast<int>(model.num_variables());
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) add_slack(fmt::format("mu_{}_{}", system_.generators[g].id, t + 1));
  }
  ramp_up0_ = static_cast<int>(model.num_variables());
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) add_slack(fmt::format("ramp_up_slack_{}_{}", system_.generators[g].id, t + 1));
  }
  ramp_down0_ = static_cast<int>(model.num_variables());
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) add_slack(fmt::format("ramp_down_slack_{}_{}", system_.generators[g].id, t + 1));
  }

  // Without network rows a contingency block is satisfied by copying the base
  // dispatch, so lazy subproblems defer all but the base case.
  const bool lazy_blocks = fixed != nullptr && !with_network && options_.lazy_network;
  for (int c = 0; c < (lazy_blocks ? 1 : C_); ++c) add_contingency_block(model, c);

  // Ramps on the base-case dispatch only.
  for (int g = 0; g < G_; ++g) {
    const Generator& gen = system_.generators[g];
    for (int t = 0; t < T_; ++t) {
      const int up = ramp_up0_ + g * T_ + t;
      const int down = ramp_down0_ + g * T_ + t;
      std::vector<int> idx{p(0, g, t), up};
      std::vector<double> val{1.0, -1.0};
      double rhs = gen.ramp_up;
      if (t > 0) {
        idx.push_back(p(0, g, t - 1));
        val.push_back(-1.0);
      } else {
        rhs += gen.initial_output();
      }
      add_row(model, idx, val, RowSense::kLessEqual, rhs, {{y_of(g, t), -(gen.startup_ramp - gen.ramp_up)}},
              fmt::format("ramp_up_{}_{}", gen.id, t + 1));

      idx = {p(0, g, t), down};
      val = {-1.0, -1.0};
      rhs = gen.ramp_down;
      if (t > 0) {
        idx.push_back(p(0, g, t - 1));
        val.push_back(1.0);
      } else {
        rhs -= gen.initial_output();
      }
      add_row(model, idx, val, RowSense::kLessEqual, rhs, {{z_of(g, t), -(gen.shutdown_ramp - gen.ramp_down)}},
              fmt::format("ramp_down_{}_{}", gen.id, t + 1));
    }
  }

  if (with_network) {
    for (int c = 0; c < C_; ++c) {
      for (int l = 0; l < system_.num_lines(); ++l) {
        if (!sf_[c].line_in_service(l)) continue;
        for (int t = 0; t < T_; ++t) {
          add_network_row(model, c, l, t, true);
          add_network_row(model, c, l, t, false);
        }
      }
    }
  }
}

int SecondStageBlock::blocks() const {
  return static_cast<int>(std::count_if(block_p0_.begin(), block_p0_.end(), [](int b) { return b >= 0; }));
}

void SecondStageBlock::add_contingency_block(LpModel& model, int c) {
  block_p0_[c] = static_cast<int>(model.num_variables());
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) {
      const double cost = c == 0 ? probability_ * system_.generators[g].cost : 0.0;
      model.add_variable(0.0, kInf, cost, fmt::format("p_{}_{}_{}", c, system_.generators[g].id, t + 1));
    }
  }
  for (int t = 0; t < T_; ++t) {
    std::vector<int> idx;
    std::vector<double> val;
    for (int g = 0; g < G_; ++g) {
      idx.push_back(p(c, g, t));
      val.push_back(1.0);
    }
    add_row(model, idx, val, RowSense::kEqual, demand_.col(t).sum(), {}, fmt::format("balance_{}_{}", c, t + 1));
  }
  for (int g = 0; g < G_; ++g) {
    const Generator& gen = system_.generators[g];
    for (int t = 0; t < T_; ++t) {
      const int u = g * T_ + t;
      const int nu = nu0_ + g * T_ + t;
      const int mu = mu0_ + g * T_ + t;
      add_row(model, {p(c, g, t), nu, gamma0_ + t}, {1.0, -1.0, -1.0}, RowSense::kLessEqual, 0.0,
              {{u, -gen.p_max}}, fmt::format("cap_hi_{}_{}_{}", c, gen.id, t + 1));
      add_row(model, {p(c, g, t), mu}, {1.0, 1.0}, RowSense::kGreaterEqual, 0.0, {{u, -gen.p_min}},
              fmt::format("cap_lo_{}_{}_{}", c, gen.id, t + 1));
    }
  }
}

int SecondStageBlock::line_slack(LpModel& model, int l, int t) {
  auto it = line_slack_.find({l, t});
  if (it != line_slack_.end()) return it->second;
  const int v = model.add_variable(0.0, kInf, options_.penalty, fmt::format("line_slack_{}_{}", system_.lines[l].id, t + 1));
  slack_vars_.push_back(v);
  line_slack_.emplace(std::make_pair(l, t), v);
  return v;
}

void SecondStageBlock::add_network_row(LpModel& model, int c, int l, int t, bool upper) {
  const auto key = std::make_tuple(c, l, t, upper);
  if (network_row_.count(key)) return;
  const Eigen::MatrixXd& sf = sf_[c].sf;
  std::vector<int> idx;
  std::vector<double> val;
  for (int g = 0; g < G_; ++g) {
    const double coef = sf(l, system_.generators[g].bus);
    if (coef == 0.0) continue;
    idx.push_back(p(c, g, t));
    val.push_back(coef);
  }
  const double load_flow = sf.row(l).dot(demand_.col(t));
  const double limit = system_.lines[l].flow_limit;
  idx.push_back(line_slack(model, l, t));
  const std::string name = fmt::format("flow_{}_{}_{}_{}", upper ? "hi" : "lo", c, system_.lines[l].id, t + 1);
  if (upper) {
    val.push_back(-1.0);
    add_row(model, idx, val, RowSense::kLessEqual, limit + load_flow, {}, name);
  } else {
    val.push_back(1.0);
    add_row(model, idx, val, RowSense::kGreaterEqual, -limit + load_flow, {}, name);
  }
  network_row_.emplace(key, static_cast<int>(model.num_constraints()) - 1);
  ++network_rows_;
}

int SecondStageBlock::add_violated_network_rows(LpModel& model, std::span<const double> x) {
  int added = 0;
  for (int c = 0; c < C_; ++c) {
    const Eigen::MatrixXd f = flows(x, c);
    for (int l = 0; l < system_.num_lines(); ++l) {
      if (!sf_[c].line_in_service(l)) continue;
      const double limit = system_.lines[l].flow_limit;
      for (int t = 0; t < T_; ++t) {
        // Slacks created earlier in this pass are not part of x yet.
        const auto slack = line_slack_.find({l, t});
        const bool solved = slack != line_slack_.end() && slack->second < static_cast<int>(x.size());
        const double s = solved ? x[slack->second] : 0.0;
        for (const bool upper : {true, false}) {
          const double excess = upper ? f(l, t) - limit - s : -limit - s - f(l, t);
          if (excess > options_.violation_tolerance && !network_row_.count({c, l, t, upper})) {
            if (!has_block(c)) add_contingency_block(model, c);
            add_network_row(model, c, l, t, upper);
            ++added;
          }
        }
      }
    }
  }
  return added;
}

Eigen::VectorXd SecondStageBlock::first_stage_gradient(std::span<const double> duals) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * G_ * T_);
  for (const Term& term : links_) grad(term.first_stage) -= duals[term.row] * term.coefficient;
  // Entries at round-off level are noise from the simplex, not sensitivities.
  const double floor = 1e-9 * std::max(1.0, grad.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    if (std::abs(grad(j)) < floor) grad(j) = 0.0;
  }
  return grad;
}

Eigen::MatrixXd SecondStageBlock::dispatch(std::span<const double> x, int contingency) const {
  Eigen::MatrixXd out(G_, T_);
  for (int g = 0; g < G_; ++g) {
    const int c = has_block(contingency) ? contingency : 0;
    for (int t = 0; t < T_; ++t) out(g, t) = x[p(c, g, t)];
  }
  return out;
}

Eigen::MatrixXd SecondStageBlock::flows(std::span<const double> x, int contingency) const {
  Eigen::MatrixXd injection = -demand_;
  for (int g = 0; g < G_; ++g) {
    const int c = has_block(contingency) ? contingency : 0;
    for (int t = 0; t < T_; ++t) injection(system_.generators[g].bus, t) += x[p(c, g, t)];
  }
  return sf_[contingency].sf * injection;
}

double SecondStageBlock::total_slack(std::span<const double> x) const {
  double s = 0.0;
  for (int v : slack_vars_) s += x[v];
  return s;
}

double SecondStageBlock::cost(std::span<const double> x) const {
  double total = 0.0;
  for (int g = 0; g < G_; ++g) {
    for (int t = 0; t < T_; ++t) total += probability_ * system_.generators[g].cost * x[p(0, g, t)];
  }
  return total + options_.penalty * total_slack(x);
}

ExtensiveForm build_extensive_form(const SystemCase& system, const ScenarioSet& scenarios,
                                   const std::vector<ShiftFactors>& shift_factors,
                                   const SecondStageOptions& options) {
  ExtensiveForm ef;
  ef.layout = add_first_stage(ef.model, system);
  for (int w = 0; w < scenarios.size(); ++w) {
    SecondStageBlock block(system, shift_factors, scenarios.demands[w], scenarios.probabilities[w], options);
    block.build(ef.model, ef.layout, true);
  }
  return ef;
}

ExtensiveSolution solve_extensive_form(const SystemCase& system, const ScenarioSet& scenarios,
                                       const std::vector<ShiftFactors>& shift_factors,
                                       const SecondStageOptions& options, double relative_gap) {
  LpModel model;
  const FirstStageLayout layout = add_first_stage(model, system);
  std::vector<SecondStageBlock> blocks;
  blocks.reserve(scenarios.size());
  for (int w = 0; w < scenarios.size(); ++w) {
    blocks.emplace_back(system, shift_factors, scenarios.demands[w], scenarios.probabilities[w], options);
    blocks.back().build(model, layout, true);
  }
  const LpSolution sol = default_backend().solve_milp(model, relative_gap, 1e-9);
  ExtensiveSolution out;
  out.status = sol.status;
  if (sol.x.empty()) return out;
  out.objective = sol.objective;
  out.commitment = extract_commitment(layout, sol.x);
  for (const SecondStageBlock& b : blocks) out.second_stage.push_back(b.cost(sol.x));
  return out;
}

}  // namespace scuc
