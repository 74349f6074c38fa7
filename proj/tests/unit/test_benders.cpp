#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "scuc/benders.hpp"
#include "scuc/errors.hpp"
#include "support/desk.hpp"

using namespace scuc;
using namespace scuc::test;

namespace {

double cheapest_commitment_cost(const SystemCase& system) {
  const int G = system.num_generators();
  const int T = system.horizon;
  double best = kInf;
  for (long mask = 0; mask < (1L << (G * T)); ++mask) {
    Eigen::MatrixXd u(G, T);
    for (int b = 0; b < G * T; ++b) u(b / T, b % T) = (mask >> b) & 1 ? 1.0 : 0.0;
    const Commitment c = Commitment::from_status(system, u);
    if (c.violation(system).empty()) best = std::min(best, commitment_cost(system, c));
  }
  return best;
}

Commitment random_commitment(const SystemCase& system, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  Eigen::MatrixXd u(system.num_generators(), system.horizon);
  for (int g = 0; g < u.rows(); ++g) {
    for (int t = 0; t < u.cols(); ++t) u(g, t) = coin(rng) ? 1.0 : 0.0;
  }
  return Commitment::from_status(system, u);
}

}  // namespace

TEST_CASE("gap arithmetic") {
  CHECK(gap(100.0, 101.0) == doctest::Approx(0.01));
  CHECK(gap(-100.0, -99.0) == doctest::Approx(0.01));
  CHECK(gap(5.0, 5.0) == 0.0);
  CHECK_THROWS_AS(gap(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gap(1e-12, 1.0), std::domain_error);
}

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::kConventional, Strategy::kRegression, Strategy::kClassification, Strategy::kCombined}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_strategy("bogus"), ValidationError);
  CHECK(uses_regressor(Strategy::kCombined));
  CHECK_FALSE(uses_regressor(Strategy::kClassification));
  CHECK(uses_classifier(Strategy::kClassification));
}

TEST_CASE("empty master sits at the floors") {
  const Desk d = load_desk("desk_tri3");
  const std::vector<double> floors{-10.0, 20.0, 30.0};
  MasterProblem master = build_master(d.system, floors, {});
  const MasterSolution ms = solve_master(master);
  REQUIRE(ms.status == SolveStatus::kOptimal);
  const double base = cheapest_commitment_cost(d.system);
  CHECK(ms.objective == doctest::Approx(base + 40.0));
  CHECK(ms.alpha == std::vector<double>{-10.0, 20.0, 30.0});

  // A flat cut lifts only its own scenario.
  Cut flat;
  flat.id = 0;
  flat.scenario = 0;
  flat.value = 75.0;
  flat.gradient = Eigen::VectorXd::Zero(master.layout.size());
  flat.anchor = Eigen::VectorXd::Zero(master.layout.size());
  add_cut_row(master, flat);
  const MasterSolution lifted = solve_master(master);
  REQUIRE(lifted.status == SolveStatus::kOptimal);
  CHECK(lifted.alpha[0] == doctest::Approx(75.0));
  CHECK(lifted.objective == doctest::Approx(base + 125.0));
}

TEST_CASE("subproblem with no unit online pays the penalty for all demand") {
  SystemCase sc = load_case(kCaseDir / "two_bus.json");
  ScenarioSet s;
  s.demands.push_back(Eigen::MatrixXd::Zero(2, 1));
  s.demands[0](1, 0) = 50.0;
  s.probabilities.push_back(1.0);
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  const Commitment off = Commitment::from_status(sc, Eigen::MatrixXd::Zero(2, 1));
  const SubproblemResult r = solve_subproblem(sc, s, 0, off, sf);
  REQUIRE(r.status == SolveStatus::kOptimal);
  // The hourly slack gamma lifts every unit's cap at once, so 25 MW of it lets
  // both units produce 25 MW: 25 * 1e4 + 25 * 10 + 25 * 20.
  CHECK(r.objective == doctest::Approx(250750.0));
  CHECK(r.total_slack == doctest::Approx(25.0));
  // Committing the cheap unit removes most of the penalty: negative gradient on its u.
  CHECK(r.gradient(0) < 0.0);
}

TEST_CASE("subproblem at the extensive-form commitment reproduces its second stage") {
  for (const char* name : kDeskCases) {
    const std::string case_name = name;
    CAPTURE(case_name);
    const Desk d = load_desk(name);
    const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
    REQUIRE(ef.status == SolveStatus::kOptimal);
    for (int w = 0; w < d.scenarios.size(); ++w) {
      const SubproblemResult full = solve_subproblem(d.system, d.scenarios, w, ef.commitment, d.shift_factors);
      SecondStageOptions lazy;
      lazy.lazy_network = true;
      const SubproblemResult lz = solve_subproblem(d.system, d.scenarios, w, ef.commitment, d.shift_factors, lazy);
      REQUIRE(full.status == SolveStatus::kOptimal);
      REQUIRE(lz.status == SolveStatus::kOptimal);
      CHECK(full.objective == doctest::Approx(ef.second_stage[w]).epsilon(1e-7));
      CHECK(lz.objective == doctest::Approx(full.objective).epsilon(1e-7));
      CHECK(lz.network_rows <= full.network_rows);
    }
  }
}

TEST_CASE("lazy network rows stay empty on an uncongested system") {
  const SystemCase sc = load_case(kCaseDir / "two_bus.json");
  const ScenarioSet s = single_scenario(sc);
  const auto sf = compute_shift_factor_set(sc, enumerate_contingencies(sc));
  Eigen::MatrixXd u(2, 1);
  u << 1, 1;
  const Commitment on = Commitment::from_status(sc, u);
  SecondStageOptions lazy;
  lazy.lazy_network = true;
  const SubproblemResult lz = solve_subproblem(sc, s, 0, on, sf, lazy);
  const SubproblemResult full = solve_subproblem(sc, s, 0, on, sf);
  CHECK(lz.network_rows == 0);
  CHECK(lz.solves == 1);
  CHECK(lz.objective == doctest::Approx(full.objective));
  CHECK(full.objective == doctest::Approx(1400.0));
}

TEST_CASE("cuts are tight at the anchor and valid elsewhere") {
  std::mt19937_64 rng(2024);
  for (const char* name : kDeskCases) {
    const std::string case_name = name;
    CAPTURE(case_name);
    const Desk d = load_desk(name);
    for (int trial = 0; trial < 6; ++trial) {
      const Commitment anchor = random_commitment(d.system, rng);
      for (int w = 0; w < d.scenarios.size(); ++w) {
        const SubproblemResult r = solve_subproblem(d.system, d.scenarios, w, anchor, d.shift_factors);
        REQUIRE(r.status == SolveStatus::kOptimal);
        const Cut cut = make_cut(r, anchor, 1);
        CHECK(cut.scenario == w);
        CHECK(cut.gradient.size() == 3 * d.system.num_generators() * d.system.horizon);
        CHECK(cut_value(cut, anchor) == doctest::Approx(r.objective).epsilon(1e-9));
        for (int probe = 0; probe < 4; ++probe) {
          const Commitment other = random_commitment(d.system, rng);
          const SubproblemResult q = solve_subproblem(d.system, d.scenarios, w, other, d.shift_factors);
          REQUIRE(q.status == SolveStatus::kOptimal);
          const double tol = 1e-6 * std::max(1.0, std::abs(q.objective));
          CHECK(cut_value(cut, other) <= q.objective + tol);
        }
      }
    }
  }
}

TEST_CASE("conventional Benders reaches the extensive-form optimum") {
  for (const char* name : kDeskCases) {
    for (bool lazy : {false, true}) {
      const std::string case_name = name;
    CAPTURE(case_name);
      CAPTURE(lazy);
      const Desk d = load_desk(name);
      const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
      REQUIRE(ef.status == SolveStatus::kOptimal);
      RunConfig cfg;
      cfg.epsilon = 1e-6;
      cfg.subproblem.lazy_network = lazy;
      const RunReport rep = run(Strategy::kConventional, d.system, d.scenarios, d.shift_factors, cfg);
      REQUIRE(rep.converged);
      CHECK(rep.objective == doctest::Approx(ef.objective).epsilon(2e-6));
      CHECK(rep.lower_bound <= ef.objective + 1e-6 * std::abs(ef.objective));

      const int n = d.scenarios.size();
      const int K = static_cast<int>(rep.iterations.size());
      CHECK(rep.pool.total() == static_cast<std::size_t>(n * (K - 1)));
      CHECK(rep.pool.retained_count() == rep.pool.total());
      for (int k = 0; k < K; ++k) {
        const IterationRecord& it = rep.iterations[k];
        CHECK(it.k == k + 1);
        CHECK(it.cuts_added == (k + 1 < K ? n : 0));
        if (k > 0) {
          CHECK(it.master_objective >= rep.iterations[k - 1].master_objective - 1e-7);
          CHECK(it.lb >= rep.iterations[k - 1].lb);
          CHECK(it.ub <= rep.iterations[k - 1].ub);
        }
        CHECK(it.lb <= it.ub + 1e-6 * std::abs(it.ub));
      }
      CHECK(rep.master_points.size() == static_cast<std::size_t>(K));
      CHECK(rep.master_alpha.size() == static_cast<std::size_t>(K));
    }
  }
}

TEST_CASE("strategies validate their inputs") {
  const Desk d = load_desk("desk_tri3");
  RunConfig cfg;
  CHECK_THROWS_AS(run(Strategy::kRegression, d.system, d.scenarios, d.shift_factors, cfg), ValidationError);
  CHECK_THROWS_AS(run(Strategy::kClassification, d.system, d.scenarios, d.shift_factors, cfg), ValidationError);
  cfg.floors = {0.0, 0.0};
  CHECK_THROWS_AS(run(Strategy::kRegression, d.system, d.scenarios, d.shift_factors, cfg), ValidationError);
}

TEST_CASE("regression strategy with exact floors") {
  for (const char* name : kDeskCases) {
    const std::string case_name = name;
    CAPTURE(case_name);
    const Desk d = load_desk(name);
    const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
    RunConfig conv_cfg;
    const RunReport conv = run(Strategy::kConventional, d.system, d.scenarios, d.shift_factors, conv_cfg);

    RunConfig cfg;
    cfg.floors = ef.second_stage;
    const RunReport rep = run(Strategy::kRegression, d.system, d.scenarios, d.shift_factors, cfg);
    REQUIRE(rep.converged);
    CHECK(rep.floors == cfg.floors);
    // Warm start: the first master already prices every scenario at its floor.
    const double first = rep.iterations.front().master_objective;
    CHECK(first >= conv.iterations.front().master_objective);
    double floor_sum = 0.0;
    for (double f : cfg.floors) floor_sum += f;
    CHECK(first >= floor_sum);
    // The upper bound is a priced commitment, so never below the true optimum.
    CHECK(rep.objective >= ef.objective - 1e-6 * std::abs(ef.objective));
    CHECK(rep.objective <= ef.objective * (1.0 + cfg.epsilon) + 1e-6);
    for (std::size_t k = 1; k < rep.iterations.size(); ++k) {
      CHECK(rep.iterations[k].lb >= rep.iterations[k - 1].lb);
      CHECK(rep.iterations[k].ub <= rep.iterations[k - 1].ub);
    }
  }
}

TEST_CASE("retention keeps the high-load cuts") {
  const Desk d = load_desk("desk_twoarea4");
  const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
  const std::vector<int> top = high_load_scenarios(d.scenarios, 1);

  RunConfig cfg;
  cfg.floors = ef.second_stage;
  for (double& f : cfg.floors) f *= 0.9;
  cfg.delta = 0.0;  // the criterion alone would drop nearly everything
  cfg.retention = 1;
  cfg.max_iterations = 25;
  const RunReport rep = run(Strategy::kRegression, d.system, d.scenarios, d.shift_factors, cfg);
  for (const Cut& c : rep.pool.archive()) {
    if (c.scenario == top[0]) CHECK(c.retained);
  }

  cfg.retention = d.scenarios.size();
  cfg.max_iterations = 400;
  const RunReport all = run(Strategy::kRegression, d.system, d.scenarios, d.shift_factors, cfg);
  CHECK(all.pool.retained_count() == all.pool.total());
  REQUIRE(all.converged);
  CHECK(all.objective <= ef.objective * (1.0 + cfg.epsilon) + 1e-6);
}

TEST_CASE("classification strategy applies the keep flags") {
  const Desk d = load_desk("desk_hex6");
  RunConfig cfg;
  cfg.retention = 1;
  cfg.max_iterations = 15;
  // Drop every cut of the lowest-load scenario; retention never protects it.
  const int victim = high_load_scenarios(d.scenarios, d.scenarios.size()).back();
  int calls = 0;
  cfg.classifier = [&](std::span<const Cut> cuts) {
    ++calls;
    std::vector<bool> keep(cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) keep[i] = cuts[i].scenario != victim;
    return keep;
  };
  const RunReport rep = run(Strategy::kClassification, d.system, d.scenarios, d.shift_factors, cfg);
  CHECK(calls >= 1);
  std::vector<bool> forced(d.scenarios.size(), false);
  for (int w : high_load_scenarios(d.scenarios, cfg.retention)) forced[w] = true;
  CHECK_FALSE(forced[victim]);
  for (const Cut& c : rep.pool.archive()) {
    // Cuts anchored at a commitment the master had already visited are pinned.
    const auto first = rep.master_points.begin();
    const bool revisit = std::find(first, first + c.iteration - 1, c.anchor) != first + c.iteration - 1;
    CHECK(c.retained == (c.scenario != victim || forced[c.scenario] || revisit));
    CHECK(c.features.size() == static_cast<std::size_t>(kCutFeatureCount));
  }
  CHECK(rep.pool.total() > rep.pool.retained_count());
}

TEST_CASE("revisited commitments pin their cuts") {
  // Dropping every cut would cycle on the first commitment forever.
  for (const char* name : {"desk_tri3", "desk_ring4"}) {
    const std::string case_name = name;
    CAPTURE(case_name);
    const Desk d = load_desk(name);
    const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
    REQUIRE(ef.status == SolveStatus::kOptimal);
    RunConfig cfg;
    cfg.retention = 0;
    cfg.classifier = [](std::span<const Cut> cuts) { return std::vector<bool>(cuts.size(), false); };
    const RunReport rep = run(Strategy::kClassification, d.system, d.scenarios, d.shift_factors, cfg);
    REQUIRE(rep.converged);
    CHECK(rep.objective <= ef.objective * (1.0 + cfg.epsilon) + 1e-6);
    CHECK(rep.objective >= ef.objective - 1e-6);
    CHECK(rep.pool.retained_count() > 0);
    // Each retained cut comes from a commitment visited earlier.
    for (const Cut* c : rep.pool.retained()) {
      const auto first = rep.master_points.begin();
      CHECK(std::find(first, first + c->iteration - 1, c->anchor) != first + c->iteration - 1);
    }
  }
}

TEST_CASE("run reports without timings are reproducible") {
  const Desk d = load_desk("desk_twoarea4");
  RunConfig cfg;
  std::ostringstream a;
  std::ostringstream b;
  write_run_report(a, run(Strategy::kConventional, d.system, d.scenarios, d.shift_factors, cfg), false);
  write_run_report(b, run(Strategy::kConventional, d.system, d.scenarios, d.shift_factors, cfg), false);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("strategy: conventional") != std::string::npos);
  CHECK(a.str().find("mp_seconds") == std::string::npos);
}

TEST_CASE("lazy and full subproblems agree at random commitments") {
  std::mt19937_64 rng(99);
  SecondStageOptions lazy;
  lazy.lazy_network = true;
  for (const char* name : kDeskCases) {
    const std::string case_name = name;
    CAPTURE(case_name);
    const Desk d = load_desk(name, 3, 7);
    for (int trial = 0; trial < 10; ++trial) {
      const Commitment c = random_commitment(d.system, rng);
      for (int w = 0; w < d.scenarios.size(); ++w) {
        const SubproblemResult full = solve_subproblem(d.system, d.scenarios, w, c, d.shift_factors);
        const SubproblemResult lz = solve_subproblem(d.system, d.scenarios, w, c, d.shift_factors, lazy);
        REQUIRE(full.status == SolveStatus::kOptimal);
        REQUIRE(lz.status == SolveStatus::kOptimal);
        CHECK(lz.objective == doctest::Approx(full.objective).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("overloaded instances still converge to the extensive form") {
  // Seed 7 draws demand beyond what these networks can serve without slack,
  // so every iterate carries large penalties.
  for (const char* name : {"desk_hex6", "desk_pjm5"}) {
    for (bool lazy : {false, true}) {
      const std::string case_name = name;
      CAPTURE(case_name);
      CAPTURE(lazy);
      const Desk d = load_desk(name, 3, 7);
      const ExtensiveSolution ef = solve_extensive_form(d.system, d.scenarios, d.shift_factors);
      REQUIRE(ef.status == SolveStatus::kOptimal);
      RunConfig cfg;
      cfg.epsilon = 1e-6;
      cfg.subproblem.lazy_network = lazy;
      const RunReport rep = run(Strategy::kConventional, d.system, d.scenarios, d.shift_factors, cfg);
      REQUIRE(rep.converged);
      CHECK(rep.objective == doctest::Approx(ef.objective).epsilon(2e-6));
      for (std::size_t k = 1; k < rep.iterations.size(); ++k) {
        CHECK(rep.iterations[k].master_objective >= rep.iterations[k - 1].master_objective - 1e-6);
      }
    }
  }
}
