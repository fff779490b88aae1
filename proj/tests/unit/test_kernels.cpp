#include <doctest.h>

#include <omp.h>

#include "shadowbench/kernels.hpp"
#include "support.hpp"

using namespace shadowbench;
namespace k = shadowbench::kernels;

static std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

static double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST_CASE("blur matches its serial reference") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 5 + static_cast<int>(rng.index(20)), w = 5 + static_cast<int>(rng.index(20));
    const auto sigma = random_vec(rng, h * w, 0.0, 4.0);
    const auto in = random_vec(rng, h * w);
    std::vector<double> fast(h * w), ref(h * w);
    k::blur(k::make_blur_plan(sigma, h, w), in, fast);
    k::blur_reference(sigma, h, w, in, ref);
    CHECK(max_diff(fast, ref) < 1e-12);
  }
}

TEST_CASE("blur_adjoint is the transpose of blur") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 4 + static_cast<int>(rng.index(12)), w = 4 + static_cast<int>(rng.index(12));
    const auto sigma = random_vec(rng, h * w, 0.0, 3.0);
    const auto plan = k::make_blur_plan(sigma, h, w);
    const auto x = random_vec(rng, h * w), y = random_vec(rng, h * w);
    std::vector<double> bx(h * w), bty(h * w), ref(h * w);
    k::blur(plan, x, bx);
    k::blur_adjoint(plan, y, bty);
    k::blur_adjoint_reference(sigma, h, w, y, ref);
    CHECK(max_diff(bty, ref) < 1e-12);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < h * w; ++i) {
      lhs += bx[i] * y[i];
      rhs += x[i] * bty[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("blur preserves constants and is the identity at sigma zero") {
  const int h = 9, w = 7;
  std::vector<double> sigma(h * w, 2.5), in(h * w, 0.37), out(h * w);
  k::blur(k::make_blur_plan(sigma, h, w), in, out);
  for (double v : out) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));

  Rng rng(5);
  const auto x = random_vec(rng, h * w);
  std::vector<double> zero(h * w, 0.0), id(h * w);
  k::blur(k::make_blur_plan(zero, h, w), x, id);
  CHECK(id == x);
}

TEST_CASE("blur radius follows ceil(3 sigma)") {
  const std::vector<double> sigma{0.0, 0.5, 1.0, 1.01, 3.0};
  const auto plan = k::make_blur_plan(sigma, 1, 5);
  CHECK(plan.radius == std::vector<int>{0, 2, 3, 4, 9});
  CHECK(plan.max_radius == 9);
}

TEST_CASE("conv2d matches its serial reference") {
  Rng rng(3);
  for (const auto& s : {k::Conv2dShape{3, 4, 3, 1, 1, 6, 5}, k::Conv2dShape{2, 3, 1, 1, 0, 4, 4},
                        k::Conv2dShape{4, 2, 3, 2, 1, 7, 9}, k::Conv2dShape{1, 1, 5, 1, 2, 3, 3}}) {
    const auto in = random_vec(rng, static_cast<std::size_t>(s.in_channels) * s.height * s.width);
    const auto wt = random_vec(rng, static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel);
    const auto b = random_vec(rng, s.out_channels);
    const std::size_t n = static_cast<std::size_t>(s.out_channels) * s.out_height() * s.out_width();
    std::vector<double> fast(n), ref(n);
    k::conv2d(s, in, wt, b, fast);
    k::conv2d_reference(s, in, wt, b, ref);
    CHECK(max_diff(fast, ref) < 1e-12);
  }
}

TEST_CASE("conv2d hand example") {
  // 1 channel 3x3 input, 2x2 kernel of ones, no pad: sums of 2x2 windows.
  const k::Conv2dShape s{1, 1, 2, 1, 0, 3, 3};
  const std::vector<double> in{1, 2, 3, 4, 5, 6, 7, 8, 9}, wt{1, 1, 1, 1}, b{0.5};
  std::vector<double> out(4);
  k::conv2d(s, in, wt, b, out);
  CHECK(out == std::vector<double>{12.5, 16.5, 24.5, 28.5});
}

TEST_CASE("matmul matches its serial reference and a hand product") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b{7, 8, 9, 10, 11, 12};
  std::vector<double> c(4);
  k::matmul(a, b, c, 2, 3, 2);
  CHECK(c == std::vector<double>{58, 64, 139, 154});
  Rng rng(4);
  const auto x = random_vec(rng, 17 * 13), y = random_vec(rng, 13 * 11);
  std::vector<double> fast(17 * 11), ref(17 * 11);
  k::matmul(x, y, fast, 17, 13, 11);
  k::matmul_reference(x, y, ref, 17, 13, 11);
  CHECK(max_diff(fast, ref) == 0.0);
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  std::vector<double> l{1000.0, 1001.0, 999.0, 0.0, 0.0, 0.0};
  k::softmax_rows(l, 2, 3);
  CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l[1] > l[0]);
  CHECK(l[3] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("parallel kernels are independent of the thread count") {
  Rng rng(9);
  const int h = 23, w = 19;
  const auto sigma = random_vec(rng, h * w, 0.0, 3.0);
  const auto in = random_vec(rng, h * w);
  const auto plan = k::make_blur_plan(sigma, h, w);
  std::vector<double> one(h * w), many(h * w);
  omp_set_num_threads(1);
  k::blur(plan, in, one);
  omp_set_num_threads(4);
  k::blur(plan, in, many);
  CHECK(one == many);
  k::blur_adjoint(plan, in, many);
  omp_set_num_threads(1);
  k::blur_adjoint(plan, in, one);
  CHECK(one == many);
}
