#include "shadowbench/shadow_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shadowbench {

void MatteConfig::validate() const {
  if (!(sigma_min >= 0.0 && sigma_min <= sigma_max))
    throw ConfigError("matte: require 0 <= sigma_min <= sigma_max");
  for (double s : scatter_spread)
    if (!(s >= 1.0)) throw ConfigError("matte: scatter_spread components must be >= 1");
  if (!(scatter_spread[0] >= scatter_spread[1] && scatter_spread[1] >= scatter_spread[2]))
    throw ConfigError("matte: scatter_spread must be ordered r >= g >= b");
  if (!(depth_gain >= 0.0)) throw ConfigError("matte: depth_gain must be >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas). Infinite samples never contribute a parabola.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    auto meet = [&](int p) {
      return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
    };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

// Squared distance to the nearest pixel where target[p] is true.
std::vector<double> squared_edt(const std::vector<unsigned char>& target, int h, int w) {
  std::vector<double> grid(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = target[i] ? 0.0 : kInf;
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> col_in(h), col_out(h), row_out(w);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col_in[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(col_in.data(), col_out.data(), h, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = col_out[y];
  }
  for (int y = 0; y < h; ++y) {
    double* row = grid.data() + static_cast<std::size_t>(y) * w;
    edt_1d(row, row_out.data(), w, v, z);
    std::copy(row_out.begin(), row_out.end(), row);
  }
  return grid;
}

}  // namespace

Plane boundary_distance(const Raster<1>& mask) {
  const int h = mask.height(), w = mask.width();
  std::vector<unsigned char> inside(mask.size()), outside(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    inside[i] = mask[i] >= 0.5;
    outside[i] = !inside[i];
  }
  const auto to_outside = squared_edt(outside, h, w);
  const auto to_inside = squared_edt(inside, h, w);
  Plane dist(h, w);
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = std::sqrt(inside[i] ? to_outside[i] : to_inside[i]);
  return dist;
}

Plane matte_sigma(const Raster<1>& mask, const MatteConfig& cfg) {
  Plane sigma(mask.height(), mask.width(), cfg.sigma_min);
  if (cfg.sigma_max <= 0.0) return sigma;
  const Plane dist = boundary_distance(mask);
  const double span = cfg.sigma_max - cfg.sigma_min;
  for (std::size_t i = 0; i < sigma.size(); ++i)
    sigma[i] = cfg.sigma_min + span * std::min(dist[i] / cfg.sigma_max, 1.0);
  return sigma;
}

namespace detail {

struct MatteStage {
  int height = 0;
  int width = 0;
  int planes = 0;
  std::vector<double> depth_factor;
  std::vector<unsigned char> product_clamped;
  Plane product;
  std::array<kernels::BlurPlan, 3> plans;
  std::array<Plane, 3> matte;
  std::array<std::vector<unsigned char>, 3> matte_clamped;
};

}  // namespace detail

namespace {

std::shared_ptr<detail::MatteStage> build_matte(const ScalarField& mask, const ScalarField& depth,
                                                const MatteConfig& cfg, int planes) {
  require_same_extent(mask, depth, "render_matte");
  cfg.validate();
  auto st = std::make_shared<detail::MatteStage>();
  const int h = mask.height(), w = mask.width();
  st->height = h;
  st->width = w;
  st->planes = planes;
  const std::size_t n = mask.size();
  st->depth_factor.resize(n);
  st->product_clamped.resize(n);
  st->product = Plane(h, w);
  for (std::size_t i = 0; i < n; ++i) {
    st->depth_factor[i] = 1.0 - cfg.depth_gain * (1.0 - depth[i]);
    const double raw = mask[i] * st->depth_factor[i];
    st->product_clamped[i] = raw < 0.0 || raw > 1.0;
    st->product[i] = std::clamp(raw, 0.0, 1.0);
  }
  const Plane sigma = matte_sigma(mask, cfg);
  for (int c = 0; c < planes; ++c) {
    const double spread = planes == 1 ? 1.0 : cfg.scatter_spread[c];
    Plane scaled = sigma;
    for (double& s : scaled.values()) s *= spread;
    st->plans[c] = kernels::make_blur_plan(scaled.values(), h, w);
    st->matte[c] = Plane(h, w);
    kernels::blur(st->plans[c], st->product.values(), st->matte[c].values());
    st->matte_clamped[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double& v = st->matte[c][i];
      st->matte_clamped[c][i] = v < 0.0 || v > 1.0;
      v = std::clamp(v, 0.0, 1.0);
    }
  }
  return st;
}

}  // namespace

ScalarField render_matte(const ScalarField& mask, const ScalarField& depth, const MatteConfig& cfg) {
  auto st = build_matte(mask, depth, cfg, 1);
  return ScalarField(std::move(st->matte[0]), FieldRole::matte);
}

std::array<ScalarField, 3> render_matte_rgb(const ScalarField& mask, const ScalarField& depth,
                                            const MatteConfig& cfg) {
  auto st = build_matte(mask, depth, cfg, 3);
  return {ScalarField(std::move(st->matte[0]), FieldRole::matte),
          ScalarField(std::move(st->matte[1]), FieldRole::matte),
          ScalarField(std::move(st->matte[2]), FieldRole::matte)};
}

Image compose_shadow(const Image& clean, const ShadowParams& params) { return synth_gradients(clean, params).image; }

ShadowJacobian synth_gradients(const Image& clean, const ShadowParams& params) {
  require_same_extent(clean, params.mask, "compose_shadow");
  require_same_extent(clean, params.depth, "compose_shadow");
  const auto stage = build_matte(params.mask, params.depth, params.matte, 3);
  const double alpha = clamp_alpha(params.alpha);
  const auto beta = params.beta.at(alpha);

  ShadowJacobian jac;
  const int h = clean.height(), w = clean.width();
  jac.image = Image(h, w);
  jac.d_alpha = PixelArray(h, w);
  jac.d_rho = PixelArray(h, w);
  const std::size_t n = clean.pixels();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t i = 3 * p + c;
      const double rho = stage->matte[c][p];
      const double src = clean[i];
      const double pre = (1.0 - (1.0 - alpha) * rho) * src + alpha * beta[c] * rho;
      const bool clipped = pre < 0.0 || pre > 1.0;
      jac.image[i] = std::clamp(pre, 0.0, 1.0);
      jac.d_alpha[i] = clipped ? 0.0 : rho * (src + beta[c] + alpha * params.beta.slope[c]);
      jac.d_rho[i] = clipped ? 0.0 : -(1.0 - alpha) * src + alpha * beta[c];
    }
  }
  for (int c = 0; c < 3; ++c) jac.matte[c] = ScalarField(stage->matte[c], FieldRole::matte);
  jac.stage_ = stage;
  return jac;
}

double ShadowJacobian::vjp_alpha(const PixelArray& upstream) const {
  require_same_extent(upstream, d_alpha, "vjp_alpha");
  double acc = 0.0;
  for (std::size_t i = 0; i < upstream.size(); ++i) acc += upstream[i] * d_alpha[i];
  return acc;
}

Plane ShadowJacobian::vjp_mask(const PixelArray& upstream) const {
  require_same_extent(upstream, d_rho, "vjp_mask");
  const auto& st = *stage_;
  const std::size_t n = upstream.pixels();
  Plane grad(st.height, st.width);
  Plane drho(st.height, st.width), dprod(st.height, st.width);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < n; ++p)
      drho[p] = st.matte_clamped[c][p] ? 0.0 : upstream[3 * p + c] * d_rho[3 * p + c];
    kernels::blur_adjoint(st.plans[c], drho.values(), dprod.values());
    for (std::size_t p = 0; p < n; ++p) grad[p] += dprod[p];
  }
  for (std::size_t p = 0; p < n; ++p) grad[p] = st.product_clamped[p] ? 0.0 : grad[p] * st.depth_factor[p];
  return grad;
}

double face_depth_at(double x, double y, int height, int width) noexcept {
  const double cx = width / 2, cy = height / 2;
  const double rx = 0.38 * width, ry = 0.48 * height;
  const double u = (x - cx) / rx, v = (y - cy) / ry;
  return std::clamp(std::sqrt(std::max(0.0, 1.0 - u * u - v * v)), 0.0, 1.0);
}

ScalarField synthetic_face_depth(int height, int width) {
  if (height < 8 || width < 8) throw DomainError("synthetic_face_depth: dimensions must be at least 8x8");
  ScalarField depth(height, width, 0.0, FieldRole::depth);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) depth.at(y, x) = face_depth_at(x, y, height, width);
  return depth;
}

}  // namespace shadowbench
