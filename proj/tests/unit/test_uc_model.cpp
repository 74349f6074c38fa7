#include <doctest.h>

#include <cmath>

#include "scuc/errors.hpp"
#include "scuc/solver.hpp"
#include "scuc/uc_model.hpp"
#include "support/desk.hpp"

using namespace scuc;
using namespace scuc::test;

namespace {

/// Exhaustive oracle: every binary u satisfying the first-stage constraints,
/// each priced by solving every scenario's dispatch LP separately.
double enumerate_optimum(const SystemCase& system, const ScenarioSet& scenarios,
                         const std::vector<ShiftFactors>& sf, int* feasible_count = nullptr) {
  const int G = system.num_generators();
  const int T = system.horizon;
  const int bits = G * T;
  double best = kInf;
  int count = 0;
  for (long mask = 0; mask < (1L << bits); ++mask) {
    Eigen::MatrixXd u(G, T);
    for (int b = 0; b < bits; ++b) u(b / T, b % T) = (mask >> b) & 1 ? 1.0 : 0.0;
    const Commitment c = Commitment::from_status(system, u);
    if (!c.violation(system).empty()) continue;
    ++count;
    double total = commitment_cost(system, c);
    for (int w = 0; w < scenarios.size(); ++w) {
      SecondStageBlock block(system, sf, scenarios.demands[w], scenarios.probabilities[w], {});
      LpModel m;
      block.build(m, c, true);
      const LpSolution sol = solve_lp(m);
      REQUIRE(sol.optimal());
      total += sol.objective;
    }
    best = std::min(best, total);
  }
  if (feasible_count) *feasible_count = count;
  return best;
}

SystemCase one_unit_case(int horizon, int min_up, int initial_status, const std::vector<double>& demand) {
  SystemCase sc = load_case(kCaseDir / "two_bus.json");
  sc.generators.resize(1);
  sc.generators[0].min_up = min_up;
  sc.generators[0].initial_status = initial_status;
  sc.horizon = horizon;
  sc.demand = Eigen::MatrixXd::Zero(2, horizon);
  for (int t = 0; t < horizon; ++t) sc.demand(1, t) = demand[t];
  sc.validate();
  return sc;
}

}  // namespace

TEST_CASE("two-unit example commits both units at cost 1550") {
  const SystemCase sc = load_case(kCaseDir / "two_bus.json");
  const ScenarioSet one = single_scenario(sc);
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  const ExtensiveSolution ef = solve_extensive_form(sc, one, sf);
  REQUIRE(ef.status == SolveStatus::kOptimal);
  // Enumeration by hand: {G1} alone cannot meet 120 MW, {G2} alone neither;
  // {G1,G2}: 100 + 50 start-up, 100*10 + 20*20 energy.
  CHECK(ef.objective == doctest::Approx(1550.0).epsilon(1e-9));
  CHECK(ef.commitment.u(0, 0) == 1.0);
  CHECK(ef.commitment.u(1, 0) == 1.0);
  CHECK(enumerate_optimum(sc, one, sf) == doctest::Approx(1550.0).epsilon(1e-9));

  LpModel m;
  SecondStageBlock block(sc, sf, sc.demand, 1.0, {});
  block.build(m, ef.commitment, true);
  const LpSolution sol = solve_lp(m);
  REQUIRE(sol.optimal());
  CHECK(block.dispatch(sol.x)(0, 0) == doctest::Approx(100.0));
  CHECK(block.dispatch(sol.x)(1, 0) == doctest::Approx(20.0));
  CHECK(block.total_slack(sol.x) == doctest::Approx(0.0));
}

TEST_CASE("zero demand with every unit off costs nothing") {
  SystemCase sc = load_case(kCaseDir / "two_bus.json");
  sc.demand.setZero();
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  const ExtensiveSolution ef = solve_extensive_form(sc, single_scenario(sc), sf);
  REQUIRE(ef.status == SolveStatus::kOptimal);
  CHECK(ef.objective == doctest::Approx(0.0));
  CHECK(ef.commitment.u.sum() == 0.0);
}

TEST_CASE("minimum up time keeps a fresh start-up online") {
  // Demand only in hour 1; the unit must stay on in hour 2 anyway.
  const SystemCase sc = one_unit_case(2, 2, -1, {50.0, 0.0});
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  const ExtensiveSolution ef = solve_extensive_form(sc, single_scenario(sc), sf);
  REQUIRE(ef.status == SolveStatus::kOptimal);
  CHECK(ef.commitment.u(0, 0) == 1.0);
  CHECK(ef.commitment.y(0, 0) == 1.0);
  CHECK(ef.commitment.u(0, 1) == 1.0);

  Eigen::MatrixXd u(1, 2);
  u << 1, 0;
  CHECK_FALSE(Commitment::from_status(sc, u).violation(sc).empty());
  u << 1, 1;
  CHECK(Commitment::from_status(sc, u).violation(sc).empty());
}

TEST_CASE("initial conditions pin the first hours") {
  SystemCase sc = one_unit_case(4, 3, 1, {10, 10, 10, 10});
  Eigen::MatrixXd u(1, 4);
  u << 1, 0, 0, 0;  // on for one hour already, needs two more
  CHECK_FALSE(Commitment::from_status(sc, u).violation(sc).empty());
  u << 1, 1, 0, 0;
  CHECK(Commitment::from_status(sc, u).violation(sc).empty());
  sc.generators[0].min_down = 2;
  sc.generators[0].initial_status = -1;
  u << 1, 1, 1, 1;
  CHECK_FALSE(Commitment::from_status(sc, u).violation(sc).empty());
  u << 0, 1, 1, 1;
  CHECK(Commitment::from_status(sc, u).violation(sc).empty());
}

TEST_CASE("commitment derivation and flattening") {
  const SystemCase sc = load_case(kCaseDir / "desk_tri3.json");
  Eigen::MatrixXd u(3, 3);
  u << 1, 1, 0,  //
      0, 1, 1,   //
      1, 1, 1;
  const Commitment c = Commitment::from_status(sc, u);
  // G1 initially on, G2 and G3 initially off.
  CHECK(c.z(0, 2) == 1.0);
  CHECK(c.y(1, 1) == 1.0);
  CHECK(c.y(2, 0) == 1.0);
  CHECK(c.y.sum() == 2.0);
  CHECK(c.z.sum() == 1.0);
  CHECK(Commitment::unflatten(c.flatten(), 3, 3) == c);
  CHECK(commitment_cost(sc, c) == doctest::Approx(20 + 120 + 40));
  CHECK_THROWS_AS(Commitment::unflatten(Eigen::VectorXd::Zero(5), 3, 3), DimensionError);
}

TEST_CASE("extensive form matches exhaustive commitment enumeration") {
  for (const char* name : {"desk_tri3", "desk_twoarea4"}) {
    CAPTURE(name);
    const Desk d = load_desk(name);
    const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
    REQUIRE(ef.status == SolveStatus::kOptimal);
    int feasible = 0;
    const double oracle = enumerate_optimum(d.system, d.scenarios, d.shift_factors, &feasible);
    CHECK(feasible > 1);
    CHECK(std::abs(ef.objective - oracle) <= 1e-6 * std::abs(oracle));
    double split = commitment_cost(d.system, ef.commitment);
    for (double v : ef.second_stage) split += v;
    CHECK(split == doctest::Approx(ef.objective).epsilon(1e-9));
  }
}

TEST_CASE("extensive form dimension checks") {
  const Desk d = load_desk("desk_tri3");
  ScenarioSet bad = d.scenarios;
  bad.demands[1] = Eigen::MatrixXd::Zero(3, 5);
  CHECK_THROWS_AS(build_extensive_form(d.system, bad, d.shift_factors), DimensionError);
  const ExtensiveForm ef = build_extensive_form(d.system, d.scenarios, d.shift_factors);
  CHECK(ef.layout.size() == 27);
  CHECK(ef.model.has_binaries());
}

TEST_CASE("lazy subproblems build contingency blocks on demand") {
  const SystemCase sc = load_case(kCaseDir / "rts24.json");
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  SecondStageOptions lazy;
  lazy.lazy_network = true;
  SecondStageBlock block(sc, sf, sc.demand * 0.5, 1.0, lazy);
  LpModel m;
  Eigen::MatrixXd u = Eigen::MatrixXd::Ones(sc.num_generators(), sc.horizon);
  for (int g = 0; g < sc.num_generators(); ++g) {
    for (int t = 0; t < sc.generators[g].must_off_hours(sc.horizon); ++t) u(g, t) = 0.0;
  }
  block.build(m, Commitment::from_status(sc, u), false);
  CHECK(block.blocks() == 1);
  CHECK(block.has_block(0));
  CHECK_FALSE(block.has_block(1));
  const LpSolution sol = solve_lp(m);
  REQUIRE(sol.optimal());
  // Unbuilt contingencies report the base dispatch.
  CHECK(block.dispatch(sol.x, 3) == block.dispatch(sol.x, 0));
}
