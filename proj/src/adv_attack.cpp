#include "shadowbench/adv_attack.hpp"

#include <algorithm>
#include <cmath>

namespace shadowbench {

void AttackConfig::validate() const {
  if (!(step_alpha > 0.0 && step_theta > 0.0 && step_mask > 0.0))
    throw ConfigError("attack: step sizes must be > 0");
  if (!(eps_alpha >= 0.0 && eps_theta >= 0.0 && eps_mask >= 0.0))
    throw ConfigError("attack: epsilon radii must be >= 0");
  if (iterations < 1) throw ConfigError("attack: iterations must be >= 1");
  if (!(alpha0 >= 0.0 && alpha0 <= kMaxAlpha)) throw ConfigError("attack: alpha0 must be in [0, 0.999]");
}

AttackState AttackState::initial(const ScalarField& mask0, double alpha0) {
  AttackState s;
  s.mask = mask0;
  s.mask0 = mask0;
  s.alpha = clamp_alpha(alpha0);
  s.alpha0 = s.alpha;
  return s;
}

double AttackState::mask_linf() const {
  double m = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) m = std::max(m, std::abs(mask[i] - mask0[i]));
  return m;
}

double AttackState::theta_linf() const {
  double m = 0.0;
  for (int k = 0; k < 6; ++k) m = std::max(m, std::abs(theta[k] - theta0[k]));
  return m;
}

bool AttackState::within(const AttackConfig& cfg, double slack) const {
  if (std::abs(alpha - alpha0) > cfg.eps_alpha + slack) return false;
  if (alpha < 0.0 || alpha > kMaxAlpha) return false;
  if (theta_linf() > cfg.eps_theta + slack) return false;
  if (mask_linf() > cfg.eps_mask + slack) return false;
  for (double v : mask.values())
    if (v < 0.0 || v > 1.0) return false;
  return true;
}

void AttackState::project(const AttackConfig& cfg) {
  alpha = clamp_alpha(std::clamp(alpha, alpha0 - cfg.eps_alpha, alpha0 + cfg.eps_alpha));
  for (int k = 0; k < 6; ++k) theta[k] = std::clamp(theta[k], theta0[k] - cfg.eps_theta, theta0[k] + cfg.eps_theta);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double lo = std::max(0.0, mask0[i] - cfg.eps_mask);
    const double hi = std::min(1.0, mask0[i] + cfg.eps_mask);
    mask[i] = std::clamp(mask[i], lo, hi);
  }
}

Image synthesize_state(const Image& clean, const ScalarField& depth, const AttackState& state,
                       const SynthSettings& settings) {
  ShadowParams params{state.alpha, settings.beta, affine_warp(state.mask, state.theta), depth, settings.matte};
  return compose_shadow(clean, params);
}

AttackGradients attack_gradients(const Image& clean, const ScalarField& depth, const Landmarks& truth,
                                 const DetectorOracle& oracle, const AttackState& state,
                                 const SynthSettings& settings) {
  require_same_extent(clean, state.mask, "attack");
  ShadowParams params{state.alpha, settings.beta, affine_warp(state.mask, state.theta), depth, settings.matte};
  ShadowJacobian jac = synth_gradients(clean, params);
  Detection det = oracle.detect(jac.image, truth);
  require_same_extent(det.loss_gradient, clean, "detector loss gradient");

  AttackGradients g;
  g.loss = det.loss;
  g.landmarks = det.landmarks;
  g.d_alpha = jac.vjp_alpha(det.loss_gradient);
  const Plane d_warped = jac.vjp_mask(det.loss_gradient);
  WarpGradients wg = warp_gradients(state.mask, state.theta, d_warped);
  g.d_theta = wg.d_theta;
  g.d_mask = std::move(wg.d_mask);
  g.image = std::move(jac.image);
  return g;
}

AttackResult attack(const Image& clean, const ScalarField& depth, const Landmarks& truth,
                    const DetectorOracle& oracle, const AttackConfig& cfg, const ScalarField& mask0,
                    const SynthSettings& settings, const AttackObserver& observer) {
  cfg.validate();
  require_same_extent(clean, mask0, "attack");
  require_same_extent(clean, depth, "attack");

  AttackState state = AttackState::initial(mask0, cfg.alpha0);
  AttackResult result;
  result.trace.reserve(cfg.iterations + 1);

  for (int it = 0; it <= cfg.iterations; ++it) {
    state.iteration = it;
    AttackGradients g;
    try {
      g = attack_gradients(clean, depth, truth, oracle, state, settings);
    } catch (const OracleError& e) {
      throw OracleError(e.what(), it);
    } catch (const ShapeError&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError(std::string("detector failed: ") + e.what(), it);
    }

    TraceEntry entry{it, g.loss, state.alpha, state.theta.v, state.mask_linf()};
    result.trace.push_back(entry);
    if (observer) observer(state, entry);

    if (it == 0) {
      result.initial_image = g.image;
      result.initial_landmarks = g.landmarks;
      result.initial_loss = g.loss;
    }
    if (it == 0 || g.loss > result.loss) {
      result.loss = g.loss;
      result.best_iteration = it;
      result.image = std::move(g.image);
      result.landmarks = g.landmarks;
      result.state = state;
    }
    if (it == cfg.iterations) break;

    state.alpha += cfg.step_alpha * sign_of(g.d_alpha);
    for (int k = 0; k < 6; ++k) state.theta[k] += cfg.step_theta * sign_of(g.d_theta[k]);
    for (std::size_t i = 0; i < state.mask.size(); ++i) state.mask[i] += cfg.step_mask * sign_of(g.d_mask[i]);
    state.project(cfg);
  }
  return result;
}

AttackState random_in_ball(const AttackState& start, const AttackConfig& cfg, Rng& rng) {
  AttackState s = start;
  s.alpha = start.alpha0 + rng.uniform(-cfg.eps_alpha, cfg.eps_alpha);
  for (int k = 0; k < 6; ++k) s.theta[k] = start.theta0[k] + rng.uniform(-cfg.eps_theta, cfg.eps_theta);
  for (std::size_t i = 0; i < s.mask.size(); ++i) s.mask[i] = start.mask0[i] + rng.uniform(-cfg.eps_mask, cfg.eps_mask);
  s.project(cfg);
  return s;
}

}  // namespace shadowbench
