#include <ehz/billiards.hpp>
#include <ehz/capacity.hpp>
#include <ehz/loop.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace ehz;

namespace {

ConvexBody body_by_index(int which, int n) {
  switch (which) {
    case 0: return ConvexBody::ball(n);
    case 1: return ConvexBody::pball(4.0, Vec::LinSpaced(n, 1.0, 2.0));
    case 2: return ConvexBody::cube(n);
    default: {
      const auto cube = ConvexBody::cube(n);
      return ConvexBody::polytope(std::get<shapes::Polytope>(cube.variant()).vertices, 16.0);
    }
  }
}

const char* body_name(int which) {
  static const char* names[] = {"ball", "pball4", "cube", "cube-smoothed"};
  return names[which];
}

Vec random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

void BM_Support(benchmark::State& state) {
  const auto which = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto body = body_by_index(which, n);
  std::mt19937_64 rng(1);
  const Vec u = random_direction(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(body.support(u));
  state.SetLabel(body_name(which));
}
BENCHMARK(BM_Support)->ArgsProduct({{0, 1, 2, 3}, {2, 4}});

void BM_Gauge(benchmark::State& state) {
  const auto which = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto body = body_by_index(which, n);
  std::mt19937_64 rng(2);
  const Vec x = random_direction(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(body.gauge(x));
  state.SetLabel(body_name(which));
}
BENCHMARK(BM_Gauge)->ArgsProduct({{0, 1, 2, 3}, {2, 4}});

void BM_DualAction(benchmark::State& state) {
  const int samples = static_cast<int>(state.range(0));
  const auto body = ConvexBody::pball(4.0, Vec::Ones(4));
  Loop z(2, samples / 4, samples);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < samples / 4; ++k)
    for (int i = 0; i < 4; ++i) {
      z.cos_coeffs()(i, k) = g(rng) / (k + 1);
      z.sin_coeffs()(i, k) = g(rng) / (k + 1);
    }
  for (auto _ : state) benchmark::DoNotOptimize(dual_action(body, z));
}
BENCHMARK(BM_DualAction)->Arg(64)->Arg(128)->Arg(256);

void BM_BilliardStep(benchmark::State& state) {
  Vec axes(2);
  axes << 2.0, 1.0;
  const auto K = ConvexBody::ellipsoid_axes(axes);
  const auto T = ConvexBody::ball(2);
  Vec q(2), p(2);
  q << 2.0, 0.0;
  p << std::cos(0.3), std::sin(0.3);
  BilliardState s{q, p};
  for (auto _ : state) {
    s = billiard_step(K, T, s);
    benchmark::DoNotOptimize(s.q.data());
  }
}
BENCHMARK(BM_BilliardStep);

void BM_SolveDiscProduct(benchmark::State& state) {
  SolverConfig config;
  config.starts = 1;
  const LagrangianProduct P{ConvexBody::ball(2), ConvexBody::ball(2)};
  for (auto _ : state) benchmark::DoNotOptimize(minimize_capacity(P, config).value);
}
BENCHMARK(BM_SolveDiscProduct)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
