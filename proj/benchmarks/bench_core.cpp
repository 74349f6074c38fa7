#include <benchmark/benchmark.h>

#include <filesystem>

#include "scuc/benders.hpp"
#include "scuc/harness.hpp"
#include "scuc/learners.hpp"

using namespace scuc;

namespace {

const std::filesystem::path kCases = std::filesystem::path(SCUC_DATA_DIR) / "cases";

Instance desk(const std::string& name) {
  ScenarioConfig cfg;
  cfg.n_scenarios = 3;
  cfg.seed = 1;
  return make_instance(load_case(kCases / (name + ".json")), cfg, 0);
}

void BM_Ptdf(benchmark::State& state, const std::string& name) {
  const SystemCase system = load_case(kCases / (name + ".json"));
  const auto contingencies = enumerate_contingencies(system);
  for (auto _ : state) benchmark::DoNotOptimize(compute_shift_factor_set(system, contingencies));
}

void BM_Subproblem(benchmark::State& state, const std::string& name, bool lazy) {
  const Instance inst = desk(name);
  const Commitment all_on = Commitment::from_status(
      inst.system, Eigen::MatrixXd::Ones(inst.system.num_generators(), inst.system.horizon));
  SecondStageOptions options;
  options.lazy_network = lazy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_subproblem(inst.system, inst.scenarios, 0, all_on, inst.shift_factors, options));
  }
}

void BM_Master(benchmark::State& state, const std::string& name) {
  const Instance inst = desk(name);
  RunConfig rc;
  rc.max_iterations = static_cast<int>(state.range(0));
  rc.subproblem.lazy_network = true;
  const RunReport report = run(Strategy::kConventional, inst.system, inst.scenarios, inst.shift_factors, rc);
  const MasterProblem master = build_master(inst.system, report.floors, report.pool.retained());
  for (auto _ : state) benchmark::DoNotOptimize(solve_master(master));
  state.counters["cuts"] = static_cast<double>(report.pool.total());
}

void BM_MlpEpoch(benchmark::State& state) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(300, 72);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(300, 3);
  Mlp net(72, kDefaultHiddenWidth, 3, OutputActivation::kIdentity, 1);
  for (auto _ : state) benchmark::DoNotOptimize(train(net, x, y, {.epochs = 1, .lr = 1e-4}));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Ptdf, hex6, std::string("desk_hex6"));
BENCHMARK_CAPTURE(BM_Ptdf, rts24, std::string("rts24"));
BENCHMARK_CAPTURE(BM_Subproblem, pjm5_lazy, std::string("desk_pjm5"), true);
BENCHMARK_CAPTURE(BM_Subproblem, pjm5_full, std::string("desk_pjm5"), false);
BENCHMARK_CAPTURE(BM_Subproblem, hex6_lazy, std::string("desk_hex6"), true);
BENCHMARK_CAPTURE(BM_Subproblem, hex6_full, std::string("desk_hex6"), false);
BENCHMARK_CAPTURE(BM_Master, twoarea4, std::string("desk_twoarea4"))->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MlpEpoch);

BENCHMARK_MAIN();
