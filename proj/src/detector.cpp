#include "shadowbench/detector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "shadowbench/rng.hpp"

namespace shadowbench {

double landmark_mse(const Landmarks& pred, const Landmarks& truth) noexcept {
  double acc = 0.0;
  for (int k = 0; k < kLandmarkCount; ++k) {
    const double dx = pred[k].x - truth[k].x, dy = pred[k].y - truth[k].y;
    acc += dx * dx + dy * dy;
  }
  return acc / (2.0 * kLandmarkCount);
}

ToyDetector::ToyDetector(std::uint64_t weights_seed, int height, int width)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ShapeError("ToyDetector: empty image extent");
  pooled_h_ = (height + kPool - 1) / kPool;
  pooled_w_ = (width + kPool - 1) / kPool;
  features_ = 3 * pooled_h_ * pooled_w_;
  constexpr int outputs = 2 * kLandmarkCount;
  weight_.resize(static_cast<std::size_t>(outputs) * features_);
  Rng rng(weights_seed);
  const double scale = 0.5 * std::max(height, width) / std::sqrt(static_cast<double>(features_));
  for (double& w : weight_) w = scale * rng.normal();

  // A mid-gray image predicts the canonical template.
  const Landmarks tmpl = landmark_template(height, width);
  bias_.resize(outputs);
  for (int o = 0; o < outputs; ++o) {
    double row = 0.0;
    for (int f = 0; f < features_; ++f) row += weight_[static_cast<std::size_t>(o) * features_ + f];
    const double target = (o % 2 == 0) ? tmpl[o / 2].x : tmpl[o / 2].y;
    bias_[o] = target - 0.5 * row;
  }
}

std::vector<double> ToyDetector::pool(const Image& image) const {
  if (image.height() != height_ || image.width() != width_)
    throw ShapeError("ToyDetector: image extent differs from the detector's");
  std::vector<double> feat(features_, 0.0);
  for (int c = 0; c < 3; ++c)
    for (int py = 0; py < pooled_h_; ++py)
      for (int px = 0; px < pooled_w_; ++px) {
        const int y0 = py * kPool, y1 = std::min(height_, y0 + kPool);
        const int x0 = px * kPool, x1 = std::min(width_, x0 + kPool);
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += image.at(y, x, c);
        feat[(c * pooled_h_ + py) * pooled_w_ + px] = acc / ((y1 - y0) * (x1 - x0));
      }
  return feat;
}

Landmarks ToyDetector::predict(const Image& image) const {
  const auto feat = pool(image);
  Landmarks out{};
  for (int o = 0; o < 2 * kLandmarkCount; ++o) {
    double v = bias_[o];
    const double* row = weight_.data() + static_cast<std::size_t>(o) * features_;
    for (int f = 0; f < features_; ++f) v += row[f] * feat[f];
    (o % 2 == 0 ? out[o / 2].x : out[o / 2].y) = v;
  }
  return out;
}

Detection ToyDetector::detect(const Image& image, const Landmarks& truth) const {
  Detection d;
  d.landmarks = predict(image);
  d.loss = landmark_mse(d.landmarks, truth);

  constexpr int outputs = 2 * kLandmarkCount;
  std::vector<double> dcoord(outputs);
  for (int k = 0; k < kLandmarkCount; ++k) {
    dcoord[2 * k] = 2.0 * (d.landmarks[k].x - truth[k].x) / outputs;
    dcoord[2 * k + 1] = 2.0 * (d.landmarks[k].y - truth[k].y) / outputs;
  }
  std::vector<double> dfeat(features_, 0.0);
  for (int o = 0; o < outputs; ++o) {
    const double* row = weight_.data() + static_cast<std::size_t>(o) * features_;
    for (int f = 0; f < features_; ++f) dfeat[f] += row[f] * dcoord[o];
  }
  d.loss_gradient = PixelArray(height_, width_);
  for (int c = 0; c < 3; ++c)
    for (int py = 0; py < pooled_h_; ++py)
      for (int px = 0; px < pooled_w_; ++px) {
        const int y0 = py * kPool, y1 = std::min(height_, y0 + kPool);
        const int x0 = px * kPool, x1 = std::min(width_, x0 + kPool);
        const double g = dfeat[(c * pooled_h_ + py) * pooled_w_ + px] / ((y1 - y0) * (x1 - x0));
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) d.loss_gradient.at(y, x, c) = g;
      }
  return d;
}

std::unique_ptr<DetectorOracle> toy_detector(std::uint64_t weights_seed, int height, int width) {
  return std::make_unique<ToyDetector>(weights_seed, height, width);
}

FdOracleAdapter::FdOracleAdapter(BlackBoxDetector black_box, FdOptions options, bool share_safe)
    : black_box_(std::move(black_box)), options_(options), share_safe_(share_safe) {
  if (!(options_.step > 0.0)) throw ConfigError("fd_oracle_adapter: step must be > 0");
  if (!(options_.fraction > 0.0 && options_.fraction <= 1.0))
    throw ConfigError("fd_oracle_adapter: fraction must be in (0, 1]");
}

Detection FdOracleAdapter::detect(const Image& image, const Landmarks& truth) const {
  auto call = [&](const Image& img) {
    try {
      return black_box_(img, truth);
    } catch (const OracleError&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError(std::string("black-box detector failed: ") + e.what());
    }
  };
  const BlackBoxResult base = call(image);
  Detection d;
  d.loss = base.loss;
  d.landmarks = base.landmarks;
  d.loss_gradient = PixelArray(image.height(), image.width());

  const std::size_t n = image.pixels();
  std::vector<unsigned char> chosen(n, 1);
  if (std::max(image.height(), image.width()) > options_.full_max_side && options_.fraction < 1.0) {
    std::uint64_t h = options_.seed;
    for (double v : image.values()) h = mix_seed(h ^ std::bit_cast<std::uint64_t>(v));
    Rng rng(h);
    for (auto& c : chosen) c = rng.uniform() < options_.fraction;
  }
  Image probe = image;
  const double step = options_.step;
  for (std::size_t p = 0; p < n; ++p) {
    if (!chosen[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const std::size_t i = 3 * p + c;
      const double v = image[i];
      probe[i] = v + step;
      const double up = call(probe).loss;
      probe[i] = v - step;
      const double down = call(probe).loss;
      probe[i] = v;
      d.loss_gradient[i] = (up - down) / (2.0 * step);
    }
  }
  return d;
}

std::unique_ptr<DetectorOracle> fd_oracle_adapter(BlackBoxDetector black_box, double step) {
  FdOptions opts;
  opts.step = step;
  return std::make_unique<FdOracleAdapter>(std::move(black_box), opts);
}

}  // namespace shadowbench
