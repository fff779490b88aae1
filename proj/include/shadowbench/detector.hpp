#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "shadowbench/geometry.hpp"
#include "shadowbench/imaging.hpp"

namespace shadowbench {

/// Output of one detector call against ground truth.
struct Detection {
  Landmarks landmarks{};
  double loss = 0.0;             // >= 0
  PixelArray loss_gradient;      // dJ/dI, same extent as the image
};

/// Landmark detector used by the attack: image in, landmarks, loss against
/// ground truth and the loss gradient with respect to the image out.
class DetectorOracle {
 public:
  virtual ~DetectorOracle() = default;
  virtual Detection detect(const Image& image, const Landmarks& truth) const = 0;
  /// True when one instance may serve several threads at once.
  virtual bool share_safe() const noexcept { return true; }
};

/// Thrown when an oracle fails; carries the attack iteration when known.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, int iteration = -1) : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Mean squared coordinate error over the 136 landmark coordinates.
double landmark_mse(const Landmarks& pred, const Landmarks& truth) noexcept;

/// Deterministic linear landmark regressor: 16x16 average pooling per channel
/// (partial windows at the border), then a fixed seeded linear map to 68 x 2
/// coordinates. J = landmark_mse; dJ/dI is exact.
class ToyDetector final : public DetectorOracle {
 public:
  static constexpr int kPool = 16;

  ToyDetector(std::uint64_t weights_seed, int height, int width);

  Landmarks predict(const Image& image) const;
  Detection detect(const Image& image, const Landmarks& truth) const override;

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int feature_count() const noexcept { return features_; }

 private:
  std::vector<double> pool(const Image& image) const;

  int height_;
  int width_;
  int pooled_h_;
  int pooled_w_;
  int features_;
  std::vector<double> weight_;  // 136 x features
  std::vector<double> bias_;    // 136
};

std::unique_ptr<DetectorOracle> toy_detector(std::uint64_t weights_seed, int height, int width);

/// Loss-only detector (for example an external process).
struct BlackBoxResult {
  double loss = 0.0;
  Landmarks landmarks{};
};
using BlackBoxDetector = std::function<BlackBoxResult(const Image&, const Landmarks&)>;

struct FdOptions {
  double step = 1e-3;
  /// Images with both sides <= this use every pixel.
  int full_max_side = 64;
  /// Fraction of pixels differentiated on larger images; the rest get 0.
  double fraction = 0.25;
  std::uint64_t seed = 0;
};

/// Wraps a loss-only detector; dJ/dI by central differences per pixel channel.
/// The pixel subsample on large images is seeded from (options.seed, image
/// content), so equal inputs always give equal gradients.
class FdOracleAdapter final : public DetectorOracle {
 public:
  FdOracleAdapter(BlackBoxDetector black_box, FdOptions options, bool share_safe = false);

  Detection detect(const Image& image, const Landmarks& truth) const override;
  bool share_safe() const noexcept override { return share_safe_; }

 private:
  BlackBoxDetector black_box_;
  FdOptions options_;
  bool share_safe_;
};

std::unique_ptr<DetectorOracle> fd_oracle_adapter(BlackBoxDetector black_box, double step);

}  // namespace shadowbench
