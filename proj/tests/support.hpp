#pragma once

// Shared generators and finite-difference checks for the unit and acceptance
// tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "shadowbench/adv_attack.hpp"
#include "shadowbench/affine_warp.hpp"
#include "shadowbench/detector.hpp"
#include "shadowbench/rng.hpp"
#include "shadowbench/shadow_synth.hpp"

namespace sbtest {

using namespace shadowbench;

inline Image random_image(Rng& rng, int h, int w, double lo = 0.0, double hi = 1.0) {
  Image img(h, w);
  for (double& v : img.values()) v = rng.uniform(lo, hi);
  return img;
}

/// Values in [0, 0.4] or [0.6, 1], so tiny perturbations never flip the
/// binarized mask (the blur sigma field only depends on it).
inline ScalarField random_mask(Rng& rng, int h, int w) {
  ScalarField m(h, w);
  for (double& v : m.values()) v = rng.uniform() < 0.5 ? rng.uniform(0.0, 0.4) : rng.uniform(0.6, 1.0);
  return m;
}

/// Binary disk-ish blob of random center and radius.
inline ScalarField random_blob(Rng& rng, int h, int w) {
  ScalarField m(h, w);
  const double cx = rng.uniform(0.3, 0.7) * w, cy = rng.uniform(0.3, 0.7) * h;
  const double r = rng.uniform(0.2, 0.4) * std::min(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(y, x) = std::hypot(x + 0.5 - cx, y + 0.5 - cy) < r ? 1.0 : 0.0;
  return m;
}

inline ScalarField random_depth(Rng& rng, int h, int w) {
  ScalarField d(h, w, 0.0, FieldRole::depth);
  for (double& v : d.values()) v = rng.uniform(0.2, 1.0);
  return d;
}

inline PixelArray random_upstream(Rng& rng, int h, int w) {
  PixelArray u(h, w);
  for (double& v : u.values()) v = rng.uniform(-1.0, 1.0);
  return u;
}

inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

template <int C>
double dot(const Raster<C>& a, const Raster<C>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Relative errors of the analytic alpha and mask derivatives of compose_shadow
/// against central differences, along a random mask direction.
struct SynthGradCheck {
  double alpha = 0.0;
  double mask = 0.0;
};

inline SynthGradCheck check_synth_gradients(Rng& rng, int h, int w) {
  const Image clean = random_image(rng, h, w, 0.05, 0.95);
  ShadowParams p;
  p.alpha = rng.uniform(0.1, 0.9);
  p.mask = random_mask(rng, h, w);
  p.depth = random_depth(rng, h, w);
  const PixelArray u = random_upstream(rng, h, w);
  const ShadowJacobian jac = synth_gradients(clean, p);

  const double ha = 1e-6;
  auto loss = [&](const ShadowParams& q) { return dot(u, static_cast<const PixelArray&>(compose_shadow(clean, q))); };
  ShadowParams up = p, dn = p;
  up.alpha += ha;
  dn.alpha -= ha;
  const double fd_alpha = (loss(up) - loss(dn)) / (2 * ha);

  Plane dir(h, w);
  for (double& v : dir.values()) v = rng.uniform(-1.0, 1.0);
  const double hm = 1e-6;
  up = p;
  dn = p;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    up.mask[i] += hm * dir[i];
    dn.mask[i] -= hm * dir[i];
  }
  const double fd_mask = (loss(up) - loss(dn)) / (2 * hm);
  const double an_mask = dot(jac.vjp_mask(u), dir);
  return {relative_error(jac.vjp_alpha(u), fd_alpha), relative_error(an_mask, fd_mask)};
}

/// Relative errors of warp_gradients (each theta entry, and the mask along a
/// random direction) against central differences.
struct WarpGradCheck {
  double theta = 0.0;  // worst of the six
  double mask = 0.0;
};

inline WarpGradCheck check_warp_gradients(Rng& rng, int h, int w) {
  Plane mask(h, w);
  for (double& v : mask.values()) v = rng.uniform();
  AffineParams th;
  th.v = {1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
          rng.uniform(-0.3, 0.3),       1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
  Plane u(h, w);
  for (double& v : u.values()) v = rng.uniform(-1.0, 1.0);
  const WarpGradients g = warp_gradients(mask, th, u);
  auto loss = [&](const Plane& m, const AffineParams& t) {
    return dot(u, static_cast<const Plane&>(affine_warp(m, t)));
  };
  WarpGradCheck out;
  const double ht = 1e-7;
  for (int k = 0; k < 6; ++k) {
    AffineParams a = th, b = th;
    a[k] += ht;
    b[k] -= ht;
    const double fd = (loss(mask, a) - loss(mask, b)) / (2 * ht);
    out.theta = std::max(out.theta, relative_error(g.d_theta[k], fd, 1e-6));
  }
  Plane dir(h, w);
  for (double& v : dir.values()) v = rng.uniform(-1.0, 1.0);
  Plane a = mask, b = mask;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    a[i] += 1e-6 * dir[i];
    b[i] -= 1e-6 * dir[i];
  }
  const double fd = (loss(a, th) - loss(b, th)) / 2e-6;
  out.mask = relative_error(dot(g.d_mask, dir), fd);
  return out;
}

/// Relative errors of attack_gradients against central differences of the
/// toy-detector loss of the synthesized image.
struct ChainCheck {
  double alpha = 0.0;
  double theta = 0.0;
  double mask = 0.0;
};

inline ChainCheck check_attack_chain(Rng& rng, int h, int w) {
  const Image clean = random_image(rng, h, w, 0.05, 0.95);
  const ScalarField depth = random_depth(rng, h, w);
  const ToyDetector toy(rng.next(), h, w);
  const Landmarks truth = toy.predict(clean);
  SynthSettings settings;
  AttackState s = AttackState::initial(random_blob(rng, h, w), rng.uniform(0.3, 0.9));
  for (int k = 0; k < 6; ++k) s.theta[k] += rng.uniform(-0.1, 0.1);
  // Keep M strictly inside (0, 1) so the product clamp stays inactive.
  for (double& v : s.mask.values()) v = 0.03 + 0.94 * v + rng.uniform(-0.02, 0.02);

  const AttackGradients g = attack_gradients(clean, depth, truth, toy, s, settings);
  auto loss = [&](const AttackState& q) { return toy.detect(synthesize_state(clean, depth, q, settings), truth).loss; };
  ChainCheck out;
  const double hh = 1e-6;
  {
    AttackState a = s, b = s;
    a.alpha += hh;
    b.alpha -= hh;
    out.alpha = relative_error(g.d_alpha, (loss(a) - loss(b)) / (2 * hh), 1e-6);
  }
  for (int k = 0; k < 6; ++k) {
    AttackState a = s, b = s;
    a.theta[k] += hh;
    b.theta[k] -= hh;
    out.theta = std::max(out.theta, relative_error(g.d_theta[k], (loss(a) - loss(b)) / (2 * hh), 1e-6));
  }
  Plane dir(h, w);
  for (double& v : dir.values()) v = rng.uniform(-1.0, 1.0);
  AttackState a = s, b = s;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    a.mask[i] += hh * dir[i];
    b.mask[i] -= hh * dir[i];
  }
  out.mask = relative_error(dot(g.d_mask, dir), (loss(a) - loss(b)) / (2 * hh), 1e-6);
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("sbtest-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace sbtest
