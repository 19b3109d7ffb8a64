// Serial vs parallel timings for the OpenMP kernels.
// Arg 0 selects Exec (0 serial, 1 parallel); arg 1 is the grid side.
#include <benchmark/benchmark.h>

#include "latgl/gelfand_levitan.hpp"
#include "latgl/spectral.hpp"

using namespace latgl;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

GridSpec square(int side) { return {side - 1, -(side / 2), side - 1 - side / 2}; }

Potential seeded(int side) { return make_potential(preset::SeededRandom{5, {}}, square(side)); }

SpectralModification states(const SpectralData& sd, int p) {
  SpectralModification mod;
  const auto w = static_cast<std::size_t>(sd.grid.width());
  for (int i = 0; i < p; ++i) {
    std::vector<double> gamma(w, 0.0);
    gamma[(2 * static_cast<std::size_t>(i)) % w] = 0.5;
    mod.added.push_back({sd.eigenvalues.back() + 1.0 + i, gamma});
  }
  return mod;
}

void BM_Propagate(benchmark::State& st) {
  const auto pot = seeded(static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(propagate_polynomials(pot, exec_of(st)));
}

void BM_Orthogonality(benchmark::State& st) {
  const auto pot = seeded(static_cast<int>(st.range(1)));
  const auto table = propagate_polynomials(pot);
  const auto sd = spectral_data(pot);
  for (auto _ : st) benchmark::DoNotOptimize(check_orthogonality(table, sd, exec_of(st)));
}

void BM_BuildQ(benchmark::State& st) {
  const auto pot = seeded(static_cast<int>(st.range(1)));
  const auto table = propagate_polynomials(pot);
  const auto sd = spectral_data(pot);
  const auto mod = states(sd, 3);
  for (auto _ : st) benchmark::DoNotOptimize(build_Q(table, sd, mod, exec_of(st)));
}

void BM_Degenerate(benchmark::State& st) {
  const auto pot = seeded(static_cast<int>(st.range(1)));
  const auto table = propagate_polynomials(pot);
  const auto sd = spectral_data(pot);
  const auto fk = factorize(table, sd, states(sd, 3));
  for (auto _ : st) benchmark::DoNotOptimize(solve_gl_degenerate(fk, exec_of(st)));
}

void BM_Transformed(benchmark::State& st) {
  const auto pot = seeded(static_cast<int>(st.range(1)));
  const auto table = propagate_polynomials(pot);
  const auto sd = spectral_data(pot);
  const auto k = solve_gl_degenerate(factorize(table, sd, states(sd, 3))).k;
  for (auto _ : st) benchmark::DoNotOptimize(transformed_solutions(k, table, exec_of(st)));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int e : {0, 1})
    for (int side : {6, 10, 14}) b->Args({e, side});
}

}  // namespace

BENCHMARK(BM_Propagate)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Orthogonality)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BuildQ)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Degenerate)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Transformed)->Apply(sizes)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
