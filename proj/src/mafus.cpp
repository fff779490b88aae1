#include "shadowbench/mafus.hpp"

#include <cmath>
#include <string>

#include "shadowbench/kernels.hpp"
#include "shadowbench/rng.hpp"
#include "shadowbench/tensor_archive.hpp"

namespace shadowbench {
namespace {

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
  return out;
}

void require_finite(const Tensor& x, const char* what) {
  for (double v : x.values())
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite entry");
}

Matrix gaussian_matrix(int rows, int cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal() * scale;
  return m;
}

}  // namespace

void StreamWeights::validate(const char* stream) const {
  const std::string s(stream);
  if (theta.rows < 1 || theta.cols < 1) throw ShapeError("stream " + s + ": empty theta");
  if (phi.rows != theta.rows || phi.cols != theta.cols || g.rows != theta.rows || g.cols != theta.cols)
    throw ShapeError("stream " + s + ": theta, phi, g must share shape C x C'");
  if (z.rows != theta.cols || z.cols != theta.rows) throw ShapeError("stream " + s + ": z must be C' x C");
}

void GammaPredictor::validate(int in_channels) const {
  if (weight.rows != 2 || weight.cols != in_channels)
    throw ShapeError("gamma predictor: weight must be 2 x " + std::to_string(in_channels));
  for (const auto* v : {&bias, &bn_scale, &bn_shift, &bn_mean, &bn_var})
    if (v->size() != 2) throw ShapeError("gamma predictor: per-channel vectors must have 2 entries");
  for (double v : bn_var)
    if (!(v >= 0.0)) throw DomainError("gamma predictor: negative running variance");
  if (!(bn_eps > 0.0)) throw DomainError("gamma predictor: eps must be positive");
}

void MAFusWeights::validate() const {
  f.validate("f");
  t.validate("t");
  if (f.inner() != t.inner()) throw ShapeError("MAFus: streams must share the inner width C'");
  gamma.validate(f.channels() + t.channels());
}

MAFusWeights MAFusWeights::random(int c_f, int c_t, int inner, std::uint64_t seed, double scale) {
  Rng rng(seed);
  MAFusWeights w;
  for (auto [s, c] : {std::pair{&w.f, c_f}, std::pair{&w.t, c_t}}) {
    s->theta = gaussian_matrix(c, inner, rng, scale);
    s->phi = gaussian_matrix(c, inner, rng, scale);
    s->g = gaussian_matrix(c, inner, rng, scale);
    s->z = gaussian_matrix(inner, c, rng, scale);
  }
  w.gamma.weight = gaussian_matrix(2, c_f + c_t, rng, scale);
  return w;
}

std::vector<Matrix> nonlocal_similarity(const Tensor& x, const Matrix& w_theta, const Matrix& w_phi) {
  if (w_theta.rows != x.channels() || w_phi.rows != x.channels() || w_theta.cols != w_phi.cols)
    throw ShapeError("nonlocal_similarity: projection shapes do not match the input channels");
  std::vector<Matrix> out;
  out.reserve(x.batch());
  for (int n = 0; n < x.batch(); ++n) {
    const Matrix xm = positions_by_channels(x, n);
    out.push_back(matmul(matmul(xm, w_theta), transpose(matmul(xm, w_phi))));
  }
  return out;
}

AttentionPair mutual_attention(const Matrix& logits_f, const Matrix& logits_t, const std::vector<double>& gamma_f,
                               const std::vector<double>& gamma_t) {
  if (logits_f.rows != logits_t.rows || logits_f.cols != logits_t.cols)
    throw ShapeError("mutual_attention: logit matrices differ in shape");
  const int n = logits_f.cols;
  if (static_cast<int>(gamma_f.size()) != n || static_cast<int>(gamma_t.size()) != n)
    throw ShapeError("mutual_attention: gamma fields must have one entry per position");
  AttentionPair a{Matrix(logits_f.rows, n), Matrix(logits_f.rows, n)};
  for (int r = 0; r < logits_f.rows; ++r)
    for (int c = 0; c < n; ++c) {
      a.f(r, c) = logits_f(r, c) + gamma_t[c] * logits_t(r, c);
      a.t(r, c) = logits_t(r, c) + gamma_f[c] * logits_f(r, c);
    }
  kernels::softmax_rows(a.f.data, a.f.rows, n);
  kernels::softmax_rows(a.t.data, a.t.rows, n);
  return a;
}

std::vector<GammaFields> predict_gamma(const Tensor& f, const Tensor& t, const GammaPredictor& p) {
  if (f.batch() != t.batch() || f.height() != t.height() || f.width() != t.width())
    throw ShapeError("predict_gamma: F and T must share batch and spatial extents");
  p.validate(f.channels() + t.channels());
  const int hw = f.positions();
  std::vector<GammaFields> out(f.batch());
  for (int n = 0; n < f.batch(); ++n) {
    const auto sf = f.sample(n), st = t.sample(n);
    for (int k = 0; k < 2; ++k) {
      auto& dst = k == 0 ? out[n].f : out[n].t;
      dst.assign(hw, 0.0);
      const double inv_std = 1.0 / std::sqrt(p.bn_var[k] + p.bn_eps);
      for (int pos = 0; pos < hw; ++pos) {
        double acc = p.bias[k];
        for (int c = 0; c < f.channels(); ++c) acc += p.weight(k, c) * sf[static_cast<std::size_t>(c) * hw + pos];
        for (int c = 0; c < t.channels(); ++c)
          acc += p.weight(k, f.channels() + c) * st[static_cast<std::size_t>(c) * hw + pos];
        const double bn = (acc - p.bn_mean[k]) * inv_std * p.bn_scale[k] + p.bn_shift[k];
        dst[pos] = bn > 0.0 ? bn : 0.0;
      }
    }
  }
  return out;
}

Tensor mafus_forward(const Tensor& f, const Tensor& t, const MAFusWeights& w) {
  w.validate();
  if (f.channels() != w.f.channels() || t.channels() != w.t.channels())
    throw ShapeError("mafus_forward: input channels do not match the weights");
  require_finite(f, "mafus_forward F");
  require_finite(t, "mafus_forward T");
  const auto gammas = predict_gamma(f, t, w.gamma);
  const auto lf = nonlocal_similarity(f, w.f.theta, w.f.phi);
  const auto lt = nonlocal_similarity(t, w.t.theta, w.t.phi);
  Tensor zf = f, zt = t;
  const int hw = f.positions();
  for (int n = 0; n < f.batch(); ++n) {
    const auto att = mutual_attention(lf[n], lt[n], gammas[n].f, gammas[n].t);
    for (auto [a, x, s, z] : {std::tuple{&att.f, &f, &w.f, &zf}, std::tuple{&att.t, &t, &w.t, &zt}}) {
      const Matrix upd = matmul(matmul(*a, matmul(positions_by_channels(*x, n), s->g)), s->z);
      auto dst = z->sample(n);
      for (int c = 0; c < x->channels(); ++c)
        for (int p = 0; p < hw; ++p) dst[static_cast<std::size_t>(c) * hw + p] += upd(p, c);
    }
  }
  return concat_channels(zf, zt);
}

ConvLayer::ConvLayer(std::string n, int in, int out, int k, int s, int p)
    : name(std::move(n)), in_channels(in), out_channels(out), kernel(k), stride(s), pad(p),
      weight(static_cast<std::size_t>(out) * in * k * k, 0.0), bias(out, 0.0) {}

void ConvLayer::validate() const {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1 || pad < 0)
    throw ShapeError("conv " + name + ": invalid geometry");
  if (weight.size() != static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel)
    throw ShapeError("conv " + name + ": weight size does not match its shape");
  if (bias.size() != static_cast<std::size_t>(out_channels)) throw ShapeError("conv " + name + ": bias size");
}

std::vector<const ConvLayer*> RecoveryNetWeights::layers() const {
  return {&conv1_1, &conv1_2, &conv2_1, &conv2_2, &conv3_1, &conv3_2, &conv_fuse};
}

std::vector<ConvLayer*> RecoveryNetWeights::layers() {
  return {&conv1_1, &conv1_2, &conv2_1, &conv2_2, &conv3_1, &conv3_2, &conv_fuse};
}

void RecoveryNetWeights::validate() const {
  for (const auto* l : layers()) l->validate();
  const ConvLayer* chain[] = {&conv1_1, &conv1_2, &conv2_1, &conv2_2, &conv3_1, &conv3_2};
  for (int i = 1; i < 6; ++i)
    if (chain[i]->in_channels != chain[i - 1]->out_channels)
      throw ShapeError("recovery: " + chain[i]->name + " input does not match " + chain[i - 1]->name + " output");
  const int branches = conv1_2.out_channels + conv2_2.out_channels + conv3_2.out_channels;
  if (conv_fuse.in_channels != branches)
    throw ShapeError("recovery: conv_fuse takes " + std::to_string(conv_fuse.in_channels) +
                     " channels but the branches concatenate to " + std::to_string(branches));
  if (conv_fuse.out_channels != conv1_1.in_channels)
    throw ShapeError("recovery: conv_fuse must map back to the input channel count");
  for (const auto* l : layers()) {
    const bool same = l->stride == 1 && 2 * l->pad == l->kernel - 1;
    if (!same) throw ShapeError("recovery: " + l->name + " does not preserve spatial size");
  }
}

RecoveryNetWeights RecoveryNetWeights::with_widths(int c1, int c2, int c3) {
  RecoveryNetWeights w;
  w.conv1_1 = ConvLayer("conv1_1", c1, c1, 3, 1, 1);
  w.conv1_2 = ConvLayer("conv1_2", c1, c1, 3, 1, 1);
  w.conv2_1 = ConvLayer("conv2_1", c1, c2, 3, 1, 1);
  w.conv2_2 = ConvLayer("conv2_2", c2, c2, 3, 1, 1);
  w.conv3_1 = ConvLayer("conv3_1", c2, c3, 3, 1, 1);
  w.conv3_2 = ConvLayer("conv3_2", c3, c3, 3, 1, 1);
  w.conv_fuse = ConvLayer("conv_fuse", c1 + c2 + c3, c1, 1, 1, 0);
  return w;
}

RecoveryNetWeights RecoveryNetWeights::standard() { return with_widths(256, 128, 64); }

RecoveryNetWeights RecoveryNetWeights::random(std::uint64_t seed, int c1, int c2, int c3) {
  auto w = with_widths(c1, c2, c3);
  Rng rng(seed);
  for (auto* l : w.layers()) {
    const double std = std::sqrt(2.0 / (l->in_channels * l->kernel * l->kernel));
    for (double& v : l->weight) v = rng.normal() * std;
  }
  return w;
}

Tensor conv_forward(const Tensor& x, const ConvLayer& layer, bool relu) {
  layer.validate();
  if (x.channels() != layer.in_channels)
    throw ShapeError("conv " + layer.name + ": expected " + std::to_string(layer.in_channels) + " input channels, got " +
                     std::to_string(x.channels()));
  const kernels::Conv2dShape s{layer.in_channels, layer.out_channels, layer.kernel, layer.stride,
                               layer.pad,         x.height(),         x.width()};
  if (s.out_height() < 1 || s.out_width() < 1) throw ShapeError("conv " + layer.name + ": input too small");
  Tensor y(x.batch(), layer.out_channels, s.out_height(), s.out_width());
  for (int n = 0; n < x.batch(); ++n) kernels::conv2d(s, x.sample(n), layer.weight, layer.bias, y.sample(n));
  if (relu)
    for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor recovery_forward(const Tensor& f, const RecoveryNetWeights& w) {
  w.validate();
  if (f.channels() != w.in_channels())
    throw ShapeError("recovery_forward: expected " + std::to_string(w.in_channels()) + " channels, got " +
                     std::to_string(f.channels()));
  const Tensor b1 = conv_forward(conv_forward(f, w.conv1_1, true), w.conv1_2, true);
  const Tensor b2 = conv_forward(conv_forward(b1, w.conv2_1, true), w.conv2_2, true);
  const Tensor b3 = conv_forward(conv_forward(b2, w.conv3_1, true), w.conv3_2, true);
  return conv_forward(concat_channels(concat_channels(b1, b2), b3), w.conv_fuse, true);
}

const char* fusion_mode_name(FusionMode m) {
  switch (m) {
    case FusionMode::concat: return "concat";
    case FusionMode::recovery_concat: return "recovery_concat";
    case FusionMode::mutual_attention: return "mutual_attention";
  }
  return "?";
}

FusionMode parse_fusion_mode(const std::string& s) {
  for (auto m : {FusionMode::concat, FusionMode::recovery_concat, FusionMode::mutual_attention})
    if (s == fusion_mode_name(m)) return m;
  throw ConfigError("unknown fusion mode: " + s);
}

Tensor fuse(FusionMode mode, const Tensor& f, const Tensor& t, const MAFusWeights* mafus,
            const RecoveryNetWeights* recovery) {
  if (mode == FusionMode::concat) return concat_channels(f, t);
  if (!recovery) throw ConfigError(std::string("fusion mode ") + fusion_mode_name(mode) + " needs recovery weights");
  const Tensor aligned = recovery_forward(t, *recovery);
  if (mode == FusionMode::recovery_concat) return concat_channels(f, aligned);
  if (!mafus) throw ConfigError("fusion mode mutual_attention needs MAFus weights");
  return mafus_forward(f, aligned, *mafus);
}

double l1_mean(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1_mean");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double combine_losses(double pix, double det, double cons, double pep) {
  return pix + kLambdaDet * det + cons + kLambdaPep * pep;
}

LossTerms losses(const Tensor& restored, const Tensor& clean, const Tensor& heat_pred, const Tensor& heat_gt,
                 const Tensor& embed_pred, const Tensor& embed_gt, const Tensor& t_features) {
  LossTerms l;
  l.pix = l1_mean(clean, restored);
  l.det = mse(heat_pred, heat_gt);
  l.pep = mse(embed_gt, embed_pred);
  l.cons = mse(embed_gt, t_features);
  l.total = combine_losses(l.pix, l.det, l.cons, l.pep);
  return l;
}

namespace {

Matrix load_matrix(const TensorArchive& ar, const std::string& name) {
  const auto& e = ar.get(name);
  if (e.shape.size() != 2) throw ConfigError("tensor " + name + " must be 2-D");
  Matrix m(e.shape[0], e.shape[1]);
  m.data.assign(e.values.begin(), e.values.end());
  return m;
}

std::vector<double> load_vector(const TensorArchive& ar, const std::string& name, int n) {
  return ar.get_doubles(name, {n});
}

void store_matrix(TensorArchive& ar, const std::string& name, const Matrix& m) {
  ar.put(name, {m.rows, m.cols}, m.data);
}

}  // namespace

MAFusWeights load_mafus_weights(const TensorArchive& ar) {
  MAFusWeights w;
  for (auto [s, tag] : {std::pair{&w.f, "f"}, std::pair{&w.t, "t"}}) {
    const std::string p = std::string("mafus.") + tag + ".";
    s->theta = load_matrix(ar, p + "theta");
    s->phi = load_matrix(ar, p + "phi");
    s->g = load_matrix(ar, p + "g");
    s->z = load_matrix(ar, p + "z");
  }
  w.gamma.weight = load_matrix(ar, "mafus.gamma.weight");
  w.gamma.bias = load_vector(ar, "mafus.gamma.bias", 2);
  w.gamma.bn_scale = load_vector(ar, "mafus.gamma.bn_scale", 2);
  w.gamma.bn_shift = load_vector(ar, "mafus.gamma.bn_shift", 2);
  w.gamma.bn_mean = load_vector(ar, "mafus.gamma.bn_mean", 2);
  w.gamma.bn_var = load_vector(ar, "mafus.gamma.bn_var", 2);
  if (ar.contains("mafus.gamma.bn_eps")) w.gamma.bn_eps = load_vector(ar, "mafus.gamma.bn_eps", 1)[0];
  w.validate();
  return w;
}

void store_mafus_weights(TensorArchive& ar, const MAFusWeights& w) {
  for (auto [s, tag] : {std::pair{&w.f, "f"}, std::pair{&w.t, "t"}}) {
    const std::string p = std::string("mafus.") + tag + ".";
    store_matrix(ar, p + "theta", s->theta);
    store_matrix(ar, p + "phi", s->phi);
    store_matrix(ar, p + "g", s->g);
    store_matrix(ar, p + "z", s->z);
  }
  store_matrix(ar, "mafus.gamma.weight", w.gamma.weight);
  ar.put("mafus.gamma.bias", {2}, w.gamma.bias);
  ar.put("mafus.gamma.bn_scale", {2}, w.gamma.bn_scale);
  ar.put("mafus.gamma.bn_shift", {2}, w.gamma.bn_shift);
  ar.put("mafus.gamma.bn_mean", {2}, w.gamma.bn_mean);
  ar.put("mafus.gamma.bn_var", {2}, w.gamma.bn_var);
  ar.put("mafus.gamma.bn_eps", {1}, std::vector<double>{w.gamma.bn_eps});
}

RecoveryNetWeights load_recovery_weights(const TensorArchive& ar) {
  const auto& first = ar.get("recovery.conv1_1.weight");
  const auto& second = ar.get("recovery.conv2_1.weight");
  const auto& third = ar.get("recovery.conv3_1.weight");
  if (first.shape.size() != 4 || second.shape.size() != 4 || third.shape.size() != 4)
    throw ConfigError("recovery weights must be 4-D");
  auto w = RecoveryNetWeights::with_widths(first.shape[1], second.shape[0], third.shape[0]);
  for (auto* l : w.layers()) {
    const std::string p = "recovery." + l->name + ".";
    const auto& e = ar.get(p + "weight");
    if (e.shape.size() != 4 || e.shape[2] != e.shape[3]) throw ConfigError(p + "weight must be out x in x k x k");
    *l = ConvLayer(l->name, e.shape[1], e.shape[0], e.shape[2], 1, (e.shape[2] - 1) / 2);
    l->weight.assign(e.values.begin(), e.values.end());
    l->bias = ar.get_doubles(p + "bias", {l->out_channels});
  }
  w.validate();
  return w;
}

void store_recovery_weights(TensorArchive& ar, const RecoveryNetWeights& w) {
  for (const auto* l : w.layers()) {
    const std::string p = "recovery." + l->name + ".";
    ar.put(p + "weight", {l->out_channels, l->in_channels, l->kernel, l->kernel}, l->weight);
    ar.put(p + "bias", {l->out_channels}, l->bias);
  }
}

}  // namespace shadowbench
