// SPDX-License-Identifier: Apache-2.0
/// @file galbrun_bench.cpp
/// @brief Timings for the hot paths: form quadrature, band factorization, radial solves, numerical ranges.

#include <random>

#include <benchmark/benchmark.h>

#include "galbrun/diagnostics.hpp"
#include "galbrun/forms.hpp"
#include "galbrun/radial_solver.hpp"

namespace galbrun {
namespace {

/// rho = e^{-3r}, p = 0.5 e^{-3r}, cs = 1, phi = -1.5 r, gamma = 0.1; omega = G = 1.
BackgroundModel standard_model() {
  BackgroundModel::Profiles p{RadialProfile::exponential(1.0, 3.0), RadialProfile::constant(1.0),
                              RadialProfile::exponential(0.5, 3.0), RadialProfile::polynomial({0.0, -1.5}),
                              RadialProfile::constant(0.1)};
  return BackgroundModel(p, FlowSpec{}, Radii{0.5, 1.0, 1.5}, 1.0, Vec3::Zero(), 1.0);
}

// Argument: radial Gauss points per piece.
void BM_EvalA(benchmark::State& state) {
  QuadratureOrder order;
  order.radial = static_cast<int>(state.range(0));
  const FormContext ctx(standard_model(), 2.5, order);
  std::mt19937_64 rng(1);
  const FieldPair a{random_vector_field(rng, Support::annulus(0.4, 1.3), 2),
                    random_scalar_field(rng, Support::ball(2.4), 2)};
  const FieldPair b{random_vector_field(rng, Support::annulus(0.8, 1.6), 2),
                    random_scalar_field(rng, Support::ball(2.0), 2)};
  for (auto _ : state) benchmark::DoNotOptimize(eval_a(ctx, a, b).total());
}
BENCHMARK(BM_EvalA)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// Argument: matrix size; bandwidth 2 below and above, as in the coupled radial system.
void BM_BandedLU(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  BandedMatrix A(n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = (i < 2 ? 0 : i - 2); j <= std::min(n - 1, i + 2); ++j) {
      A.add(i, j, Complex(n01(rng), n01(rng)) + (i == j ? 8.0 : 0.0));
    }
  }
  const std::vector<Complex> rhs(n, Complex(1.0, -1.0));
  for (auto _ : state) benchmark::DoNotOptimize(BandedLU(A).solve(rhs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BandedLU)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oN);

// Argument: mesh multiplier on 32 interior and 64 exterior elements.
void BM_SolveCoupled(benchmark::State& state) {
  const Scenario s{standard_model(), Formulation::kCoupled, 3.0, RadialSource::bump(1.0, 0.2, 0.8), 32, 64,
                   std::nullopt, {}};
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scenario(s, k).coefficients.data());
}
BENCHMARK(BM_SolveCoupled)->RangeMultiplier(4)->Range(1, 64)->Unit(benchmark::kMillisecond);

void BM_SolveReference(benchmark::State& state) {
  const Scenario s{standard_model(), Formulation::kReference, 3.0, RadialSource::bump(1.0, 0.2, 0.8), 32, 64,
                   std::nullopt, {}};
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scenario(s, k).coefficients.data());
}
BENCHMARK(BM_SolveReference)->RangeMultiplier(4)->Range(1, 64)->Unit(benchmark::kMillisecond);

// Argument: number of Fibonacci directions on 50 radial shells.
void BM_ComputeTheta(benchmark::State& state) {
  const BackgroundModel m = standard_model();
  SamplingSpec sampling;
  sampling.n_radial = 50;
  sampling.n_directions = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_theta(m, sampling).theta);
  state.SetItemsProcessed(state.iterations() * 50 * state.range(0));
}
BENCHMARK(BM_ComputeTheta)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace galbrun

BENCHMARK_MAIN();
