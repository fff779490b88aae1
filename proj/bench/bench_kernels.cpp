// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to taste.
#include <benchmark/benchmark.h>

#include <vector>

#include "shadowbench/kernels.hpp"
#include "shadowbench/rng.hpp"

namespace k = shadowbench::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  shadowbench::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

struct BlurInput {
  int side;
  std::vector<double> sigma, in, out;
  k::BlurPlan plan;

  explicit BlurInput(int n) : side(n), sigma(random_vector(n * n, 1, 0.5, 4.0)), in(random_vector(n * n, 2)), out(n * n) {
    plan = k::make_blur_plan(sigma, n, n);
  }
};

void BM_BlurReference(benchmark::State& st) {
  BlurInput b(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::blur_reference(b.sigma, b.side, b.side, b.in, b.out);
    benchmark::DoNotOptimize(b.out.data());
  }
}

void BM_BlurParallel(benchmark::State& st) {
  BlurInput b(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::blur(b.plan, b.in, b.out);
    benchmark::DoNotOptimize(b.out.data());
  }
}

void BM_BlurAdjointReference(benchmark::State& st) {
  BlurInput b(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::blur_adjoint_reference(b.sigma, b.side, b.side, b.in, b.out);
    benchmark::DoNotOptimize(b.out.data());
  }
}

void BM_BlurAdjointParallel(benchmark::State& st) {
  BlurInput b(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::blur_adjoint(b.plan, b.in, b.out);
    benchmark::DoNotOptimize(b.out.data());
  }
}

struct ConvInput {
  k::Conv2dShape s;
  std::vector<double> in, w, bias, out;

  explicit ConvInput(int side) {
    s.in_channels = 64;
    s.out_channels = 64;
    s.kernel = 3;
    s.pad = 1;
    s.height = s.width = side;
    in = random_vector(static_cast<std::size_t>(64) * side * side, 3);
    w = random_vector(64 * 64 * 9, 4, -0.1, 0.1);
    bias = random_vector(64, 5);
    out.resize(static_cast<std::size_t>(64) * s.out_height() * s.out_width());
  }
};

void BM_Conv2dReference(benchmark::State& st) {
  ConvInput c(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::conv2d_reference(c.s, c.in, c.w, c.bias, c.out);
    benchmark::DoNotOptimize(c.out.data());
  }
}

void BM_Conv2dParallel(benchmark::State& st) {
  ConvInput c(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    k::conv2d(c.s, c.in, c.w, c.bias, c.out);
    benchmark::DoNotOptimize(c.out.data());
  }
}

void BM_MatmulReference(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto a = random_vector(n * n, 6), b = random_vector(n * n, 7);
  std::vector<double> c(n * n);
  for (auto _ : st) {
    k::matmul_reference(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}

void BM_MatmulParallel(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto a = random_vector(n * n, 6), b = random_vector(n * n, 7);
  std::vector<double> c(n * n);
  for (auto _ : st) {
    k::matmul(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}

}  // namespace

BENCHMARK(BM_BlurReference)->Arg(64)->Arg(256);
BENCHMARK(BM_BlurParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_BlurAdjointReference)->Arg(64)->Arg(256);
BENCHMARK(BM_BlurAdjointParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_Conv2dReference)->Arg(16)->Arg(32);
BENCHMARK(BM_Conv2dParallel)->Arg(16)->Arg(32);
BENCHMARK(BM_MatmulReference)->Arg(64)->Arg(256);
BENCHMARK(BM_MatmulParallel)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
