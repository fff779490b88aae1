#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shadowbench/tensor.hpp"

namespace shadowbench {

class TensorArchive;

/// Per-stream projections. theta, phi, g are C x C'; z maps back C' x C.
struct StreamWeights {
  Matrix theta;
  Matrix phi;
  Matrix g;
  Matrix z;

  int channels() const noexcept { return theta.rows; }
  int inner() const noexcept { return theta.cols; }
  void validate(const char* stream) const;
};

/// 1x1 convolution over [F, T] giving two channels (gamma_f, gamma_t),
/// then inference-mode batch norm and ReLU.
struct GammaPredictor {
  Matrix weight;  // 2 x (C_f + C_t)
  std::vector<double> bias{0.0, 0.0};
  std::vector<double> bn_scale{1.0, 1.0};
  std::vector<double> bn_shift{0.0, 0.0};
  std::vector<double> bn_mean{0.0, 0.0};
  std::vector<double> bn_var{1.0, 1.0};
  double bn_eps = 1e-5;

  void validate(int in_channels) const;
};

struct MAFusWeights {
  StreamWeights f;
  StreamWeights t;
  GammaPredictor gamma;

  void validate() const;
  /// Gaussian init with the given std; gamma weights zero, bn identity.
  static MAFusWeights random(int c_f, int c_t, int inner, std::uint64_t seed, double scale = 0.1);
};

/// Gamma fields for one batch element: HW values each.
struct GammaFields {
  std::vector<double> f;
  std::vector<double> t;
};

/// Per-batch HW x HW logits (X W_theta)(X W_phi)^T.
std::vector<Matrix> nonlocal_similarity(const Tensor& x, const Matrix& w_theta, const Matrix& w_phi);

struct AttentionPair {
  Matrix f;
  Matrix t;
};

/// A_f = softmax_rows(L_f + gamma_t * L_t), A_t = softmax_rows(L_t + gamma_f * L_f).
/// gamma fields hold one value per column (key position) and broadcast over rows.
AttentionPair mutual_attention(const Matrix& logits_f, const Matrix& logits_t, const std::vector<double>& gamma_f,
                               const std::vector<double>& gamma_t);

std::vector<GammaFields> predict_gamma(const Tensor& f, const Tensor& t, const GammaPredictor& p);

/// Output is the channel concatenation [Z_f, Z_t].
Tensor mafus_forward(const Tensor& f, const Tensor& t, const MAFusWeights& w);

struct ConvLayer {
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  std::vector<double> weight;  // out x in x k x k
  std::vector<double> bias;    // out

  ConvLayer() = default;
  ConvLayer(std::string n, int in, int out, int k, int s, int p);
  void validate() const;
};

/// Recovery network: three two-conv branches in sequence, their second-conv
/// outputs concatenated and fused by a 1x1 conv.
struct RecoveryNetWeights {
  ConvLayer conv1_1, conv1_2, conv2_1, conv2_2, conv3_1, conv3_2, conv_fuse;

  std::vector<const ConvLayer*> layers() const;
  std::vector<ConvLayer*> layers();
  void validate() const;
  int in_channels() const noexcept { return conv1_1.in_channels; }

  /// Standard layout (256 -> 256/128/64 -> 448 -> 256), zero-initialized.
  static RecoveryNetWeights standard();
  /// Same layout with channel widths (c1, c2, c3); input = output = c1.
  static RecoveryNetWeights with_widths(int c1, int c2, int c3);
  /// He-style Gaussian init.
  static RecoveryNetWeights random(std::uint64_t seed, int c1 = 256, int c2 = 128, int c3 = 64);
};

Tensor conv_forward(const Tensor& x, const ConvLayer& layer, bool relu);
Tensor recovery_forward(const Tensor& f, const RecoveryNetWeights& w);

enum class FusionMode { concat, recovery_concat, mutual_attention };

const char* fusion_mode_name(FusionMode m);
FusionMode parse_fusion_mode(const std::string& s);

/// concat: [F, T]; recovery_concat: [F, tau(T)]; mutual_attention: MAFus(F, tau(T)).
Tensor fuse(FusionMode mode, const Tensor& f, const Tensor& t, const MAFusWeights* mafus,
            const RecoveryNetWeights* recovery);

inline constexpr double kLambdaDet = 0.1;
inline constexpr double kLambdaPep = 10.0;

struct LossTerms {
  double pix = 0.0;
  double det = 0.0;
  double pep = 0.0;
  double cons = 0.0;
  double total = 0.0;
};

double l1_mean(const Tensor& a, const Tensor& b);
double mse(const Tensor& a, const Tensor& b);
double combine_losses(double pix, double det, double cons, double pep);

/// (restored, clean, heat_pred, heat_gt, embed_pred, embed_gt, t_features).
LossTerms losses(const Tensor& restored, const Tensor& clean, const Tensor& heat_pred, const Tensor& heat_gt,
                 const Tensor& embed_pred, const Tensor& embed_gt, const Tensor& t_features);

MAFusWeights load_mafus_weights(const TensorArchive& ar);
RecoveryNetWeights load_recovery_weights(const TensorArchive& ar);
void store_mafus_weights(TensorArchive& ar, const MAFusWeights& w);
void store_recovery_weights(TensorArchive& ar, const RecoveryNetWeights& w);

}  // namespace shadowbench
