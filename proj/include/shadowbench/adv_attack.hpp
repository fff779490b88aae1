#pragma once

#include <functional>
#include <vector>

#include "shadowbench/affine_warp.hpp"
#include "shadowbench/detector.hpp"
#include "shadowbench/factor_bench.hpp"
#include "shadowbench/rng.hpp"

namespace shadowbench {

/// Sign-gradient attack hyperparameters.
struct AttackConfig {
  double step_alpha = 0.01;
  double step_theta = 0.02;
  double step_mask = 0.0012;
  int iterations = 40;
  double eps_alpha = 0.4;
  double eps_theta = 0.8;
  double eps_mask = 0.048;
  double alpha0 = 0.8;

  void validate() const;
};

/// Optimization variables (pre-warp mask, alpha, theta) and their starting point.
struct AttackState {
  ScalarField mask;
  double alpha = 0.8;
  AffineParams theta;
  ScalarField mask0;
  double alpha0 = 0.8;
  AffineParams theta0;
  int iteration = 0;

  static AttackState initial(const ScalarField& mask0, double alpha0);

  double mask_linf() const;   // ||M - M0||_inf
  double theta_linf() const;  // max_k |theta_k - theta0_k|
  /// L-inf balls plus alpha in [0, 0.999] and M in [0, 1].
  bool within(const AttackConfig& cfg, double slack = 1e-12) const;
  /// Clamp every variable into its ball and validity range.
  void project(const AttackConfig& cfg);
};

struct TraceEntry {
  int iter = 0;
  double loss = 0.0;
  double alpha = 0.0;
  std::array<double, 6> theta{};
  double mask_linf = 0.0;
};

struct AttackResult {
  Image image;            // best iterate
  AttackState state;      // variables of the best iterate
  Landmarks landmarks{};  // detector output on the best iterate
  double loss = 0.0;
  int best_iteration = 0;
  Image initial_image;
  Landmarks initial_landmarks{};
  double initial_loss = 0.0;
  std::vector<TraceEntry> trace;  // iterations + 1 entries, iter 0 is the start
};

/// Shadowed image for a state: compose(clean, warp(M, theta), alpha).
Image synthesize_state(const Image& clean, const ScalarField& depth, const AttackState& state,
                       const SynthSettings& settings);

/// Chain-rule gradients of the detector loss with respect to (alpha, theta, M).
struct AttackGradients {
  double loss = 0.0;
  Landmarks landmarks{};
  Image image;
  double d_alpha = 0.0;
  std::array<double, 6> d_theta{};
  Plane d_mask;
};

AttackGradients attack_gradients(const Image& clean, const ScalarField& depth, const Landmarks& truth,
                                 const DetectorOracle& oracle, const AttackState& state,
                                 const SynthSettings& settings);

/// Called after every evaluated iterate (before the update).
using AttackObserver = std::function<void(const AttackState&, const TraceEntry&)>;

/// Maximizes the detector loss over (M, alpha, theta) by sign-gradient ascent
/// with per-variable L-inf projection; returns the highest-loss iterate (the
/// earliest one on ties).
AttackResult attack(const Image& clean, const ScalarField& depth, const Landmarks& truth,
                    const DetectorOracle& oracle, const AttackConfig& cfg, const ScalarField& mask0,
                    const SynthSettings& settings, const AttackObserver& observer = {});

/// A state drawn uniformly from the constraint set around the initialization.
AttackState random_in_ball(const AttackState& start, const AttackConfig& cfg, Rng& rng);

constexpr double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace shadowbench
