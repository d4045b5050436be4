#include <benchmark/benchmark.h>

#include <random>

#include "brbvs/fit.hpp"
#include "brbvs/likelihood.hpp"
#include "brbvs/measures.hpp"
#include "brbvs/simulate.hpp"

using namespace brbvs;

namespace {

struct Problem {
  SimulatedData sim;
  Model model;
  Loglik lik;
  Eigen::VectorXd start;

  explicit Problem(int n)
      : sim(simulate([n] {
          ScenarioConfig c;
          c.n = n;
          c.seed = 3;
          return c;
        }())),
        model(spec(), sim.data),
        lik(model, sim.data),
        start(model.initial_point(sim.data)) {}

  static ModelSpec spec() {
    ModelSpec s = ModelSpec::margins_with(CopulaFamily::Clayton, SurvivalLink::PH, SurvivalLink::PO, {});
    s.eta1.linear = {0, 1};
    s.eta2.linear = {0, 2};
    return s;
  }
};

const Problem& problem(int n) {
  static const Problem p400(400), p800(800);
  return n == 400 ? p400 : p800;
}

void LoglikValue(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(p.lik.value(p.start));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(LoglikValue)->Arg(400)->Arg(800);

void LoglikGradient(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(p.lik.evaluate(p.start, DerivativeOrder::Gradient));
}
BENCHMARK(LoglikGradient)->Arg(400)->Arg(800);

void LoglikHessian(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(p.lik.evaluate(p.start, DerivativeOrder::Hessian));
}
BENCHMARK(LoglikHessian)->Arg(400)->Arg(800);

void TrustRegionFit(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  const Eigen::VectorXd lambdas = Eigen::VectorXd::Constant(p.model.n_smoothing(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(trust_region_fit(p.lik, lambdas, p.start));
}
BENCHMARK(TrustRegionFit)->Arg(400)->Unit(benchmark::kMillisecond);

void CopulaEntropy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = normal(rng);
    b[i] = 0.5 * a[i] + normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ce_measure(a, b));
}
BENCHMARK(CopulaEntropy)->Arg(400)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
