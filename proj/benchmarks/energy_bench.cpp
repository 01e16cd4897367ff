#include <benchmark/benchmark.h>

#include "dms/energy.hpp"
#include "dms/propagate.hpp"
#include "dms/random_field.hpp"

namespace {

dms::Problem model_case(dms::EvolutionVariant v, int quadrature) {
  dms::Problem p;
  dms::PiecewiseProfile prof;
  prof.period = 1.0;
  prof.segments = {{1.0, 1.0}};
  p.measure = dms::measure_from_profile(prof, quadrature);
  p.d_av = 1.0;
  p.lambda = 4.0;
  p.method.variant = v;
  return p;
}

// H and its gradient; range(0) is the box radius, range(1) the atom count.
template <dms::EvolutionVariant V>
void BM_EnergyWithGradient(benchmark::State& state) {
  const int radius = static_cast<int>(state.range(0));
  const dms::EnergyFunctional e(model_case(V, static_cast<int>(state.range(1))), radius);
  dms::Rng rng(11);
  const dms::LatticeField f = dms::random_field(rng, radius);
  for (auto _ : state) benchmark::DoNotOptimize(e.evaluate(f, true));
  state.counters["atoms"] = static_cast<double>(e.problem().measure.size());
}

template <dms::EvolutionVariant V>
void BM_AveragedStep(benchmark::State& state) {
  const int radius = static_cast<int>(state.range(0));
  const dms::AveragedFlow flow(dms::EnergyFunctional(model_case(V, 8), radius));
  dms::Rng rng(13);
  const dms::LatticeField f = 0.5 * dms::random_field(rng, radius);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow.step(f, 1e-2, dms::PropagationScheme::rk4));
  }
}

}  // namespace

BENCHMARK(BM_EnergyWithGradient<dms::EvolutionVariant::taylor_scaled>)
    ->ArgsProduct({{40, 160}, {8, 32}});
BENCHMARK(BM_EnergyWithGradient<dms::EvolutionVariant::spectral_ring>)
    ->ArgsProduct({{40, 160}, {8, 32}});
BENCHMARK(BM_AveragedStep<dms::EvolutionVariant::taylor_scaled>)->Arg(40)->Arg(160);
BENCHMARK(BM_AveragedStep<dms::EvolutionVariant::spectral_ring>)->Arg(40)->Arg(160);
BENCHMARK_MAIN();
