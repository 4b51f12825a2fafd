#include <benchmark/benchmark.h>

#include <vector>

#include "ssr/dmrg.hpp"
#include "ssr/mpo.hpp"
#include "ssr/pauli.hpp"
#include "ssr/targets.hpp"

namespace {

ssr::SsrProblem make_problem(int n, bool with_disorientation) {
  std::vector<ssr::ConstraintSpec> cons;
  if (with_disorientation) cons.push_back(ssr::Disorientation{45.0, 0.005});
  ssr::SsrProblem base(ssr::AngleSet::standard_four(), n, true, ssr::LaminationPoint{}, cons);
  const auto seq = ssr::random_valid_sequence(base, 7);
  return base.with_target(ssr::lamination_parameters(base, seq));
}

void BM_Sweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int chi = static_cast<int>(state.range(1));
  const auto problem = make_problem(n, true);
  const auto terms = ssr::loss_mpo_sum(problem, true);
  ssr::DmrgPlan plan;
  plan.n_sweeps = 1;
  plan.chi_max = chi;
  plan.collapse = false;
  plan.direction = ssr::SweepDirection::Outward;
  plan.eig_max_iter = 20;
  const auto init = ssr::random_mps(n, 4, chi, 1);
  for (auto _ : state) {
    auto res = ssr::dmrg_run(problem, terms, init, plan);
    benchmark::DoNotOptimize(res.trace.records.back().expectation);
  }
}
BENCHMARK(BM_Sweep)->Args({50, 2})->Args({50, 8})->Args({200, 4})->Args({200, 8})->Unit(benchmark::kMillisecond);

void BM_LossMpoSum(benchmark::State& state) {
  const auto problem = make_problem(static_cast<int>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(ssr::loss_mpo_sum(problem, true));
}
BENCHMARK(BM_LossMpoSum)->Arg(50)->Arg(200);

void BM_Svd(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  std::vector<double> data(m * m);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>((i * 2654435761u) % 1000) / 1000.0;
  ssr::TruncationPolicy policy;
  policy.max_rank = m / 4;
  for (auto _ : state) benchmark::DoNotOptimize(ssr::svd_truncate_matrix(data.data(), m, m, policy));
}
BENCHMARK(BM_Svd)->Arg(32)->Arg(128);

void BM_PauliExpand(benchmark::State& state) {
  const auto problem = make_problem(static_cast<int>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(ssr::pauli_expand(problem, true));
}
BENCHMARK(BM_PauliExpand)->Arg(6)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
