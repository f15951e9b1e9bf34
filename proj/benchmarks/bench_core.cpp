#include <benchmark/benchmark.h>

#include "hybridsmooth/hybridsmooth.hpp"

namespace {

struct Cycle300 {
  hs::TimeSeries series;
  hs::SplineDesign design;
  hs::StepBasis forward;
  hs::StepBasis centered;
  Eigen::VectorXd y;

  Cycle300()
      : series([] {
          hs::Random rng(7);
          return hs::synth_cycle(hs::reference_trend(), 1.0, 150, 0.1, rng);
        }()),
        design(hs::build_design(hs::standardize_times(series).series.times_vector())),
        forward(hs::step_basis(300, hs::BasisVariant::forward)),
        centered(hs::step_basis(300, hs::BasisVariant::centered)),
        y(series.values_vector()) {}
};

const Cycle300& cycle() {
  static const Cycle300 c;
  return c;
}

void BM_SplineDesign(benchmark::State& state) {
  const auto& c = cycle();
  for (auto _ : state) benchmark::DoNotOptimize(hs::build_design(c.design.times));
}
BENCHMARK(BM_SplineDesign)->Unit(benchmark::kMillisecond);

void BM_WhitenedGram(benchmark::State& state) {
  const auto& c = cycle();
  const hs::HybridProblem problem(c.y, c.design, c.forward);
  for (auto _ : state) benchmark::DoNotOptimize(problem.reduced(1e-6));
}
BENCHMARK(BM_WhitenedGram)->Unit(benchmark::kMillisecond);

void BM_Fista(benchmark::State& state) {
  const auto& c = cycle();
  const hs::HybridProblem problem(c.y, c.design, c.forward);
  const auto reduced = problem.reduced(1e-6);
  const double lambda = 0.05 * hs::kkt_zero_threshold(reduced);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hs::fista(reduced, lambda, Eigen::VectorXd::Zero(reduced.dim())));
  }
}
BENCHMARK(BM_Fista)->Unit(benchmark::kMillisecond);

void BM_GridSearch(benchmark::State& state) {
  const auto& c = cycle();
  const auto points = static_cast<std::size_t>(state.range(0));
  const hs::HybridProblem problem(c.y, c.design, c.forward);
  const auto omegas = hs::default_omegas(c.design, points);
  const auto lambdas = hs::default_lambdas(problem, omegas.back(), points);
  for (auto _ : state) benchmark::DoNotOptimize(hs::grid_search(c.y, c.design, c.forward, lambdas, omegas));
}
BENCHMARK(BM_GridSearch)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_GibbsSweep(benchmark::State& state) {
  const auto& c = cycle();
  const hs::GibbsModel model(c.y, c.design, c.centered,
                             state.range(0) != 0 ? hs::orthogonalize(c.design, c.centered)
                                                 : hs::plain_operators(c.design, c.centered));
  const hs::Priors priors;
  hs::Random rng(1);
  auto s = hs::init_state(model, priors);
  for (auto _ : state) hs::gibbs_step(s, model, priors, rng);
}
BENCHMARK(BM_GibbsSweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
