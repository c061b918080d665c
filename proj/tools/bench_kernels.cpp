// Stepping throughput of the serial reference kernel against the fused
// OpenMP kernel on the full 400x300 grid.

#include "rdc/model.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace rdc;

template <typename T>
BasicSimState<T> excited_state() {
  const OregonatorParams p;
  BasicSimState<T> s = quiescent_state(BasicField<T>(400, 300, static_cast<T>(p.phi_active)), p);
  apply_stimulus(s, {200, 150}, 20);
  // Let a front form so the kernel sees a realistic mix of states.
  Integrator<T> in(std::move(s), p, KernelKind::parallel);
  in.advance(500);
  return in.state();
}

template <typename T>
void BM_Reference(benchmark::State& st) {
  const auto c = ModelCoefficients<T>::from(OregonatorParams{});
  BasicSimState<T> a = excited_state<T>();
  BasicSimState<T> b = a;
  for (auto _ : st) {
    kernels::step_reference(a, b, c);
    std::swap(a, b);
    benchmark::DoNotOptimize(a.u.values().data());
  }
  st.SetItemsProcessed(st.iterations() * a.u.values().size());
}

template <typename T>
void BM_Parallel(benchmark::State& st) {
  const auto c = ModelCoefficients<T>::from(OregonatorParams{});
  const int threads = static_cast<int>(st.range(0));
  BasicSimState<T> a = excited_state<T>();
  BasicSimState<T> b = a;
  for (auto _ : st) {
    kernels::step_parallel(a, b, c, threads);
    std::swap(a, b);
    benchmark::DoNotOptimize(a.u.values().data());
  }
  st.SetItemsProcessed(st.iterations() * a.u.values().size());
}

BENCHMARK(BM_Reference<float>)->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Reference<double>)->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Parallel<float>)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Parallel<double>)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
