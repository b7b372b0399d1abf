#include <benchmark/benchmark.h>

#include "qnet/estimation.hpp"
#include "qnet/failure.hpp"
#include "qnet/network.hpp"
#include "qnet/routing.hpp"
#include "qnet/seed.hpp"

namespace {

qnet::QuantumNetwork bench_network(std::size_t nodes) {
  return qnet::generate_random_network({nodes, 10.0 / static_cast<double>(nodes)}, 42);
}

void BM_ShortestPath(benchmark::State& state) {
  const auto net = bench_network(static_cast<std::size_t>(state.range(0)));
  const qnet::ConnectionMask mask(net.connection_count(), true);
  qnet::NodeId t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qnet::shortest_path(net, mask, 0, t));
    t = t + 1 == net.node_count() ? 1 : t + 1;
  }
}
BENCHMARK(BM_ShortestPath)->Arg(50)->Arg(200)->Arg(1000);

void BM_ApplyFailure(benchmark::State& state) {
  const auto net = bench_network(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qnet::apply_failure(net, {1, 0, 4.0, 1.0}, seed++));
  }
}
BENCHMARK(BM_ApplyFailure)->Arg(50)->Arg(200);

void BM_ServeDemands(benchmark::State& state) {
  const auto net = bench_network(200);
  const auto demands = qnet::generate_random_demands(
      net, {static_cast<std::size_t>(state.range(0)), 4, 1.0, 10.0}, 7);
  const auto outcome = qnet::apply_failure(net, {1, 0, 3.0, 1.0}, 11);
  for (auto _ : state) benchmark::DoNotOptimize(qnet::serve_demands(net, outcome, demands));
}
BENCHMARK(BM_ServeDemands)->Arg(5)->Arg(20)->Arg(80);

void BM_RunTrials(benchmark::State& state) {
  const auto net = bench_network(200);
  const auto demands = qnet::generate_random_demands(net, {}, 7);
  const auto domains = qnet::sample_domains(net, 100, 8.0, 3);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qnet::run_trials(net, demands, domains, 1.0, 5, threads));
  }
}
BENCHMARK(BM_RunTrials)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NsrEstimate(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Eigen::VectorXd truth = Eigen::VectorXd::LinSpaced(m, 1.0, -8.0);
  const qnet::NsrProblem problem(qnet::forward_model(truth, 2.0),
                                 Eigen::MatrixXd::Identity(m, m) * 1e-4, {0.0, 1.0, 2.0, 10.0});
  const auto init = qnet::default_initialization(problem);
  qnet::NsrOptions opts;
  opts.max_iters = 500;
  for (auto _ : state) benchmark::DoNotOptimize(qnet::nsr_estimate(problem, init, opts));
}
BENCHMARK(BM_NsrEstimate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
