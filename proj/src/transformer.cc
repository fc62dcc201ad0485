// Copyright 2026 The Geopid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geopid/transformer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {

void TransformerConfig::Validate() const {
  Require(vocab_size > 0, "transformer vocab_size must be positive");
  Require(layers >= 1 && heads >= 1 && model_dim >= 1 && context >= 2 && ff_mult >= 1,
          "transformer shape must be positive");
  Require(model_dim % heads == 0, "model_dim must be divisible by heads");
}

void SeqTrainConfig::Validate() const {
  Require(epochs >= 0 && batch_size >= 1, "bad epoch/batch settings");
  Require(learning_rate > 0, "learning rate must be > 0");
  Require(grad_clip >= 0, "grad_clip must be >= 0");
}

namespace {

constexpr double kLnEps = 1e-5;

template <typename S>
using MatT = typename TransformerT<S>::Mat;
template <typename S>
using ColVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
struct LnCache {
  MatT<S> xhat;
  ColVec<S> rstd;
};

template <typename S>
Eigen::Map<const RowVec<S>> VecAt(const std::vector<S>& p, size_t off, int n) {
  return Eigen::Map<const RowVec<S>>(p.data() + off, n);
}

template <typename S>
Eigen::Map<const MatT<S>> MatAt(const std::vector<S>& p, size_t off, int r, int c) {
  return Eigen::Map<const MatT<S>>(p.data() + off, r, c);
}

template <typename S>
Eigen::Map<RowVec<S>> GradVec(std::vector<S>& g, size_t off, int n) {
  return Eigen::Map<RowVec<S>>(g.data() + off, n);
}

template <typename S>
Eigen::Map<MatT<S>> GradMat(std::vector<S>& g, size_t off, int r, int c) {
  return Eigen::Map<MatT<S>>(g.data() + off, r, c);
}

// Column sums evaluated into an owned, aligned row. Summing straight into a
// map over the parameter vector lets Eigen pick its vectorization peel from
// that buffer's address, which makes results vary from run to run.
template <typename S>
RowVec<S> ColSum(const MatT<S>& m) {
  return m.colwise().sum();
}

template <typename S>
MatT<S> LayerNorm(const MatT<S>& x, const Eigen::Map<const RowVec<S>>& gain,
                  const Eigen::Map<const RowVec<S>>& bias, LnCache<S>* cache) {
  const int n = static_cast<int>(x.rows()), d = static_cast<int>(x.cols());
  MatT<S> xhat(n, d);
  ColVec<S> rstd(n);
  for (int i = 0; i < n; ++i) {
    const S mean = x.row(i).mean();
    const S var = (x.row(i).array() - mean).square().mean();
    rstd[i] = S(1) / std::sqrt(var + S(kLnEps));
    xhat.row(i) = (x.row(i).array() - mean) * rstd[i];
  }
  MatT<S> y = (xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename S>
MatT<S> LayerNormBackward(const MatT<S>& dy, const LnCache<S>& c,
                          const Eigen::Map<const RowVec<S>>& gain,
                          Eigen::Map<RowVec<S>> dgain, Eigen::Map<RowVec<S>> dbias) {
  dgain += ColSum<S>(dy.cwiseProduct(c.xhat));
  dbias += ColSum<S>(dy);
  MatT<S> dxhat = dy.array().rowwise() * gain.array();
  MatT<S> dx(dy.rows(), dy.cols());
  for (int i = 0; i < dy.rows(); ++i) {
    const S m1 = dxhat.row(i).mean();
    const S m2 = (dxhat.row(i).array() * c.xhat.row(i).array()).mean();
    dx.row(i) = c.rstd[i] * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
  }
  return dx;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

// tanh of the GELU inner argument, kept so the backward pass reuses it.
template <typename S>
MatT<S> GeluTanh(const MatT<S>& h) {
  auto x = h.array();
  return (S(kGeluC) * (x + S(0.044715) * x.cube())).tanh().matrix();
}

template <typename S>
MatT<S> Gelu(const MatT<S>& h, const MatT<S>& t) {
  return (S(0.5) * h.array() * (S(1) + t.array())).matrix();
}

template <typename S>
MatT<S> GeluGrad(const MatT<S>& h, const MatT<S>& t) {
  auto x = h.array();
  auto th = t.array();
  return (S(0.5) * (S(1) + th) +
          S(0.5) * x * (S(1) - th.square()) * S(kGeluC) * (S(1) + S(3 * 0.044715) * x.square()))
      .matrix();
}

// Geometric head slopes 2^(-8 (h + 1) / heads); zero when the bias is off.
template <typename S>
S RecencySlope(const TransformerConfig& config, int h) {
  if (!config.recency_bias) return S(0);
  return static_cast<S>(std::exp2(-8.0 * (h + 1) / config.heads));
}

// Row-wise softmax in place; row i sees columns 0..first_pos + i and the
// masked remainder is set to zero. Column j is first penalized by
// slope * (first_pos + i - j). The penalty is constant, so the backward
// pass through the softmax is unchanged.
template <typename S, typename Derived>
void CausalSoftmax(Eigen::MatrixBase<Derived>& scores, int first_pos, S slope) {
  for (int i = 0; i < scores.rows(); ++i) {
    const int visible = first_pos + i + 1;
    auto head = scores.row(i).head(visible).array();
    if (slope != S(0)) {
      for (int j = 0; j < visible; ++j) head(j) -= slope * S(visible - 1 - j);
    }
    head = (head - head.maxCoeff()).exp();
    head /= head.sum();
    if (visible < scores.cols()) scores.row(i).tail(scores.cols() - visible).setZero();
  }
}

}  // namespace

template <typename Scalar>
TransformerT<Scalar>::TransformerT(const TransformerConfig& config) : config_(config) {
  config_.Validate();
  const size_t v = config_.vocab_size, d = config_.model_dim, c = config_.context;
  const size_t f = d * config_.ff_mult;
  size_t at = 0;
  auto take = [&at](size_t n) {
    size_t o = at;
    at += n;
    return o;
  };
  off_.tok = take(v * d);
  off_.pos = take(c * d);
  for (int l = 0; l < config_.layers; ++l) {
    LayerOffsets lo;
    lo.ln1_g = take(d);
    lo.ln1_b = take(d);
    lo.wqkv = take(d * 3 * d);
    lo.bqkv = take(3 * d);
    lo.wo = take(d * d);
    lo.bo = take(d);
    lo.ln2_g = take(d);
    lo.ln2_b = take(d);
    lo.w1 = take(d * f);
    lo.b1 = take(f);
    lo.w2 = take(f * d);
    lo.b2 = take(d);
    off_.layers.push_back(lo);
  }
  off_.lnf_g = take(d);
  off_.lnf_b = take(d);
  off_.wout = take(d * v);
  off_.bout = take(v);
  off_.total = at;

  params_.assign(off_.total, Scalar(0));
  Rng rng(DeriveSeed(config_.seed, "transformer"));
  auto fill = [&](size_t off, size_t n, double stddev) {
    for (size_t i = 0; i < n; ++i) params_[off + i] = static_cast<Scalar>(rng.Normal(0, stddev));
  };
  auto ones = [&](size_t off, size_t n) {
    std::fill(params_.begin() + off, params_.begin() + off + n, Scalar(1));
  };
  const double residual_std = 0.02 / std::sqrt(2.0 * config_.layers);
  fill(off_.tok, v * d, 0.02);
  fill(off_.pos, c * d, 0.02);
  for (const auto& lo : off_.layers) {
    ones(lo.ln1_g, d);
    ones(lo.ln2_g, d);
    fill(lo.wqkv, d * 3 * d, 0.02);
    fill(lo.wo, d * d, residual_std);
    fill(lo.w1, d * f, 0.02);
    fill(lo.w2, f * d, residual_std);
  }
  ones(off_.lnf_g, d);
  fill(off_.wout, d * v, 0.02);
}

template <typename Scalar>
void TransformerT<Scalar>::CheckTokens(std::span<const Token> tokens) const {
  Require(!tokens.empty(), "empty token sequence");
  Require(static_cast<int>(tokens.size()) <= config_.context,
          "sequence of " + std::to_string(tokens.size()) +
              " tokens exceeds the context window of " + std::to_string(config_.context));
  for (Token t : tokens) {
    Require(t >= 0 && t < config_.vocab_size, "token id out of range: " + std::to_string(t));
  }
}

template <typename Scalar>
typename TransformerT<Scalar>::Mat TransformerT<Scalar>::ForwardIncremental(
    const KvCache& base, std::span<const Token> tokens, KvCache* out) const {
  const int d = config_.model_dim, heads = config_.heads, dh = d / heads;
  const int f = d * config_.ff_mult;
  const int start = base.keys.empty() ? 0 : static_cast<int>(base.keys[0].rows());
  const int n = static_cast<int>(tokens.size());
  Require(start + n <= config_.context, "sequence exceeds the context window");
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));

  Mat x(n, d);
  auto tok = MatAt(params_, off_.tok, config_.vocab_size, d);
  auto pos = MatAt(params_, off_.pos, config_.context, d);
  for (int i = 0; i < n; ++i) x.row(i) = tok.row(tokens[i]) + pos.row(start + i);

  if (out) {
    out->keys.resize(config_.layers);
    out->values.resize(config_.layers);
  }
  for (int l = 0; l < config_.layers; ++l) {
    const LayerOffsets& lo = off_.layers[l];
    Mat a = LayerNorm<Scalar>(x, VecAt(params_, lo.ln1_g, d), VecAt(params_, lo.ln1_b, d), nullptr);
    Mat qkv = a * MatAt(params_, lo.wqkv, d, 3 * d);
    qkv.rowwise() += VecAt(params_, lo.bqkv, 3 * d);

    Mat keys(start + n, d), values(start + n, d);
    if (start > 0) {
      keys.topRows(start) = base.keys[l];
      values.topRows(start) = base.values[l];
    }
    keys.bottomRows(n) = qkv.middleCols(d, d);
    values.bottomRows(n) = qkv.middleCols(2 * d, d);

    Mat o(n, d);
    for (int h = 0; h < heads; ++h) {
      Mat s = qkv.middleCols(h * dh, dh) * keys.middleCols(h * dh, dh).transpose() * scale;
      CausalSoftmax<Scalar>(s, start, RecencySlope<Scalar>(config_, h));
      o.middleCols(h * dh, dh) = s * values.middleCols(h * dh, dh);
    }
    Mat y = o * MatAt(params_, lo.wo, d, d);
    y.rowwise() += VecAt(params_, lo.bo, d);
    x += y;

    Mat b = LayerNorm<Scalar>(x, VecAt(params_, lo.ln2_g, d), VecAt(params_, lo.ln2_b, d), nullptr);
    Mat hid = b * MatAt(params_, lo.w1, d, f);
    hid.rowwise() += VecAt(params_, lo.b1, f);
    Mat z = Gelu<Scalar>(hid, GeluTanh<Scalar>(hid)) * MatAt(params_, lo.w2, f, d);
    z.rowwise() += VecAt(params_, lo.b2, d);
    x += z;

    if (out) {
      out->keys[l] = std::move(keys);
      out->values[l] = std::move(values);
    }
  }
  return LayerNorm<Scalar>(x, VecAt(params_, off_.lnf_g, d), VecAt(params_, off_.lnf_b, d), nullptr);
}

template <typename Scalar>
typename TransformerT<Scalar>::Mat TransformerT<Scalar>::AllLogits(
    std::span<const Token> tokens) const {
  CheckTokens(tokens);
  Mat hidden = ForwardIncremental(KvCache{}, tokens, nullptr);
  Mat logits = hidden * MatAt(params_, off_.wout, config_.model_dim, config_.vocab_size);
  logits.rowwise() += VecAt(params_, off_.bout, config_.vocab_size);
  return logits;
}

template <typename Scalar>
std::vector<double> TransformerT<Scalar>::NextTokenLogits(std::span<const Token> tokens) const {
  CheckTokens(tokens);
  Mat hidden = ForwardIncremental(KvCache{}, tokens, nullptr);
  RowVec<Scalar> logits =
      hidden.row(hidden.rows() - 1) *
      MatAt(params_, off_.wout, config_.model_dim, config_.vocab_size);
  logits += VecAt(params_, off_.bout, config_.vocab_size);
  return std::vector<double>(logits.data(), logits.data() + logits.size());
}

namespace {

template <typename Scalar>
class CachedSession : public ScoringSession {
 public:
  CachedSession(const TransformerT<Scalar>& model, std::span<const Token> context)
      : model_(model) {
    model_.ForwardIncremental({}, context, &cache_);
    context_len_ = static_cast<int>(context.size());
    last_token_ = context.back();
  }

  std::vector<double> Logits(std::span<const Token> continuation) override {
    const auto& cfg = model_.config();
    Require(context_len_ + static_cast<int>(continuation.size()) <= cfg.context,
            "continuation exceeds the context window");
    for (Token t : continuation) {
      Require(t >= 0 && t < cfg.vocab_size, "token id out of range");
    }
    typename TransformerT<Scalar>::Mat hidden;
    if (continuation.empty()) {
      // Re-run the last context token against the cache of the rest.
      if (!prefix_cache_) {
        prefix_cache_.emplace();
        for (size_t l = 0; l < cache_.keys.size(); ++l) {
          prefix_cache_->keys.push_back(cache_.keys[l].topRows(context_len_ - 1));
          prefix_cache_->values.push_back(cache_.values[l].topRows(context_len_ - 1));
        }
      }
      const Token last[1] = {last_token_};
      hidden = model_.ForwardIncremental(*prefix_cache_, last, nullptr);
    } else {
      hidden = model_.ForwardIncremental(cache_, continuation, nullptr);
    }
    const auto& p = model_.params();
    const int d = cfg.model_dim, v = cfg.vocab_size;
    Eigen::Map<const typename TransformerT<Scalar>::Mat> wout(
        p.data() + model_.output_weight_offset(), d, v);
    Eigen::Map<const RowVec<Scalar>> bout(p.data() + model_.output_weight_offset() + d * v, v);
    RowVec<Scalar> logits = hidden.row(hidden.rows() - 1) * wout + bout;
    return std::vector<double>(logits.data(), logits.data() + logits.size());
  }

 private:
  const TransformerT<Scalar>& model_;
  typename TransformerT<Scalar>::KvCache cache_;
  std::optional<typename TransformerT<Scalar>::KvCache> prefix_cache_;
  int context_len_ = 0;
  Token last_token_ = 0;
};

}  // namespace

template <typename Scalar>
std::unique_ptr<ScoringSession> TransformerT<Scalar>::StartSession(
    std::span<const Token> context) const {
  CheckTokens(context);
  return std::make_unique<CachedSession<Scalar>>(*this, context);
}

namespace {

template <typename S>
struct LayerCache {
  LnCache<S> ln1, ln2;
  MatT<S> a, qkv, o, b, hid, tanh, g;
  std::vector<MatT<S>> probs;
};

}  // namespace

template <typename Scalar>
double TransformerT<Scalar>::LossAndGradient(const TrainingExample& example,
                                             std::vector<Scalar>* grad) const {
  Require(!example.context.empty() && !example.target.empty(),
          "training example needs context and target tokens");
  std::vector<Token> input = example.context;
  input.insert(input.end(), example.target.begin(), example.target.end() - 1);
  CheckTokens(input);
  for (Token t : example.target) {
    Require(t >= 0 && t < config_.vocab_size, "target token out of range");
  }

  const int n = static_cast<int>(input.size());
  const int d = config_.model_dim, heads = config_.heads, dh = d / heads;
  const int f = d * config_.ff_mult, v = config_.vocab_size;
  const int first_row = static_cast<int>(example.context.size()) - 1;
  const int n_targets = static_cast<int>(example.target.size());
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));

  // Forward with caches.
  Mat x(n, d);
  auto tok = MatAt(params_, off_.tok, v, d);
  auto pos = MatAt(params_, off_.pos, config_.context, d);
  for (int i = 0; i < n; ++i) x.row(i) = tok.row(input[i]) + pos.row(i);

  std::vector<LayerCache<Scalar>> caches(config_.layers);
  for (int l = 0; l < config_.layers; ++l) {
    const LayerOffsets& lo = off_.layers[l];
    LayerCache<Scalar>& c = caches[l];
    c.a = LayerNorm<Scalar>(x, VecAt(params_, lo.ln1_g, d), VecAt(params_, lo.ln1_b, d), &c.ln1);
    c.qkv = c.a * MatAt(params_, lo.wqkv, d, 3 * d);
    c.qkv.rowwise() += VecAt(params_, lo.bqkv, 3 * d);
    c.o.resize(n, d);
    c.probs.resize(heads);
    for (int h = 0; h < heads; ++h) {
      Mat s = c.qkv.middleCols(h * dh, dh) * c.qkv.middleCols(d + h * dh, dh).transpose() * scale;
      CausalSoftmax<Scalar>(s, 0, RecencySlope<Scalar>(config_, h));
      c.o.middleCols(h * dh, dh) = s * c.qkv.middleCols(2 * d + h * dh, dh);
      c.probs[h] = std::move(s);
    }
    Mat y = c.o * MatAt(params_, lo.wo, d, d);
    y.rowwise() += VecAt(params_, lo.bo, d);
    x += y;
    c.b = LayerNorm<Scalar>(x, VecAt(params_, lo.ln2_g, d), VecAt(params_, lo.ln2_b, d), &c.ln2);
    c.hid = c.b * MatAt(params_, lo.w1, d, f);
    c.hid.rowwise() += VecAt(params_, lo.b1, f);
    c.tanh = GeluTanh<Scalar>(c.hid);
    c.g = Gelu<Scalar>(c.hid, c.tanh);
    Mat z = c.g * MatAt(params_, lo.w2, f, d);
    z.rowwise() += VecAt(params_, lo.b2, d);
    x += z;
  }
  LnCache<Scalar> lnf;
  Mat final_hidden =
      LayerNorm<Scalar>(x, VecAt(params_, off_.lnf_g, d), VecAt(params_, off_.lnf_b, d), &lnf);

  // Only the supervised rows reach the output projection.
  Mat rows = final_hidden.middleRows(first_row, n_targets);
  Mat logits = rows * MatAt(params_, off_.wout, d, v);
  logits.rowwise() += VecAt(params_, off_.bout, v);
  double loss = 0;
  Mat dlogits(n_targets, v);
  for (int j = 0; j < n_targets; ++j) {
    const Scalar mx = logits.row(j).maxCoeff();
    RowVec<Scalar> e = (logits.row(j).array() - mx).exp();
    const Scalar sum = e.sum();
    loss -= static_cast<double>(logits(j, example.target[j]) - mx - std::log(sum));
    dlogits.row(j) = e / sum;
    dlogits(j, example.target[j]) -= Scalar(1);
  }
  loss /= n_targets;
  if (!grad) return loss;
  dlogits /= static_cast<Scalar>(n_targets);

  std::vector<Scalar>& g = *grad;
  Require(g.size() == params_.size(), "gradient buffer has the wrong size");

  GradMat(g, off_.wout, d, v).noalias() += rows.transpose() * dlogits;
  GradVec(g, off_.bout, v) += ColSum<Scalar>(dlogits);
  Mat dfinal = Mat::Zero(n, d);
  dfinal.middleRows(first_row, n_targets) =
      dlogits * MatAt(params_, off_.wout, d, v).transpose();
  Mat dx = LayerNormBackward<Scalar>(dfinal, lnf, VecAt(params_, off_.lnf_g, d),
                                     GradVec(g, off_.lnf_g, d), GradVec(g, off_.lnf_b, d));

  for (int l = config_.layers - 1; l >= 0; --l) {
    const LayerOffsets& lo = off_.layers[l];
    const LayerCache<Scalar>& c = caches[l];
    // MLP branch.
    GradMat(g, lo.w2, f, d).noalias() += c.g.transpose() * dx;
    GradVec(g, lo.b2, d) += ColSum<Scalar>(dx);
    Mat dhid = (dx * MatAt(params_, lo.w2, f, d).transpose()).array() *
               GeluGrad<Scalar>(c.hid, c.tanh).array();
    GradMat(g, lo.w1, d, f).noalias() += c.b.transpose() * dhid;
    GradVec(g, lo.b1, f) += ColSum<Scalar>(dhid);
    Mat db = dhid * MatAt(params_, lo.w1, d, f).transpose();
    dx += LayerNormBackward<Scalar>(db, c.ln2, VecAt(params_, lo.ln2_g, d),
                                    GradVec(g, lo.ln2_g, d), GradVec(g, lo.ln2_b, d));
    // Attention branch.
    GradMat(g, lo.wo, d, d).noalias() += c.o.transpose() * dx;
    GradVec(g, lo.bo, d) += ColSum<Scalar>(dx);
    Mat d_o = dx * MatAt(params_, lo.wo, d, d).transpose();
    Mat dqkv(n, 3 * d);
    for (int h = 0; h < heads; ++h) {
      const Mat& p = c.probs[h];
      auto q = c.qkv.middleCols(h * dh, dh);
      auto k = c.qkv.middleCols(d + h * dh, dh);
      auto val = c.qkv.middleCols(2 * d + h * dh, dh);
      Mat dp = d_o.middleCols(h * dh, dh) * val.transpose();
      dqkv.middleCols(2 * d + h * dh, dh) = p.transpose() * d_o.middleCols(h * dh, dh);
      ColVec<Scalar> row_dot = (dp.array() * p.array()).rowwise().sum();
      Mat ds = p.array() * (dp.colwise() - row_dot).array();
      dqkv.middleCols(h * dh, dh) = ds * k * scale;
      dqkv.middleCols(d + h * dh, dh) = ds.transpose() * q * scale;
    }
    GradMat(g, lo.wqkv, d, 3 * d).noalias() += c.a.transpose() * dqkv;
    GradVec(g, lo.bqkv, 3 * d) += ColSum<Scalar>(dqkv);
    Mat da = dqkv * MatAt(params_, lo.wqkv, d, 3 * d).transpose();
    dx += LayerNormBackward<Scalar>(da, c.ln1, VecAt(params_, lo.ln1_g, d),
                                    GradVec(g, lo.ln1_g, d), GradVec(g, lo.ln1_b, d));
  }

  auto dtok = GradMat(g, off_.tok, v, d);
  auto dpos = GradMat(g, off_.pos, config_.context, d);
  for (int i = 0; i < n; ++i) {
    dtok.row(input[i]) += dx.row(i);
    dpos.row(i) += dx.row(i);
  }
  return loss;
}

template <typename Scalar>
typename TransformerT<Scalar>::Mat TransformerT<Scalar>::LogitGradient(
    const TrainingExample& example) const {
  std::vector<Token> input = example.context;
  input.insert(input.end(), example.target.begin(), example.target.end() - 1);
  Mat logits = AllLogits(input);
  Mat grad = Mat::Zero(logits.rows(), logits.cols());
  const int first_row = static_cast<int>(example.context.size()) - 1;
  const int n_targets = static_cast<int>(example.target.size());
  for (int j = 0; j < n_targets; ++j) {
    const int r = first_row + j;
    const Scalar mx = logits.row(r).maxCoeff();
    RowVec<Scalar> e = (logits.row(r).array() - mx).exp();
    grad.row(r) = e / e.sum();
    grad(r, example.target[j]) -= Scalar(1);
    grad.row(r) /= static_cast<Scalar>(n_targets);
  }
  return grad;
}

template <typename Scalar>
double HeldoutAccuracy(const TransformerT<Scalar>& model,
                       std::span<const TrainingExample> examples) {
  size_t correct = 0, total = 0;
  for (const auto& ex : examples) {
    std::vector<Token> input = ex.context;
    input.insert(input.end(), ex.target.begin(), ex.target.end() - 1);
    auto logits = model.AllLogits(input);
    const int first_row = static_cast<int>(ex.context.size()) - 1;
    for (size_t j = 0; j < ex.target.size(); ++j) {
      Eigen::Index arg;
      logits.row(first_row + j).maxCoeff(&arg);
      correct += (arg == ex.target[j]);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

template <typename Scalar>
SeqTrainTrace TrainTransformer(TransformerT<Scalar>& model,
                               std::span<const TrainingExample> train,
                               std::span<const TrainingExample> heldout,
                               const SeqTrainConfig& config,
                               const std::function<void(int, double)>& on_epoch) {
  config.Validate();
  Require(!train.empty(), "training set is empty");
  Rng rng(DeriveSeed(config.seed, "seqmodel-train"));
  std::vector<Scalar>& params = model.params();
  const size_t np = params.size();
  std::vector<Scalar> grad(np), m(np, Scalar(0)), v(np, Scalar(0));
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  SeqTrainTrace trace;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(std::span<size_t>(order));
    double loss_sum = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), Scalar(0));
      for (size_t i = start; i < end; ++i) {
        loss_sum += model.LossAndGradient(train[order[i]], &grad);
      }
      const Scalar inv = Scalar(1) / static_cast<Scalar>(end - start);
      double norm2 = 0;
      for (auto& gv : grad) {
        gv *= inv;
        norm2 += static_cast<double>(gv) * gv;
      }
      if (!std::isfinite(norm2)) {
        Throw(ErrorCode::kTrainingFailure,
              "non-finite gradient at epoch " + std::to_string(epoch));
      }
      const double clip = (config.grad_clip > 0 && std::sqrt(norm2) > config.grad_clip)
                              ? config.grad_clip / std::sqrt(norm2)
                              : 1.0;
      ++step;
      const double c1 = 1 - std::pow(beta1, step), c2 = 1 - std::pow(beta2, step);
      for (size_t i = 0; i < np; ++i) {
        const double gi = grad[i] * clip;
        m[i] = static_cast<Scalar>(beta1 * m[i] + (1 - beta1) * gi);
        v[i] = static_cast<Scalar>(beta2 * v[i] + (1 - beta2) * gi * gi);
        params[i] -= static_cast<Scalar>(config.learning_rate * (m[i] / c1) /
                                         (std::sqrt(v[i] / c2) + eps));
      }
    }
    const double epoch_loss = loss_sum / train.size();
    if (!std::isfinite(epoch_loss)) {
      Throw(ErrorCode::kTrainingFailure,
            "sequence model loss became non-finite at epoch " + std::to_string(epoch));
    }
    trace.epoch_loss.push_back(epoch_loss);
    if (!heldout.empty()) trace.heldout_accuracy.push_back(HeldoutAccuracy(model, heldout));
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return trace;
}

template class TransformerT<float>;
template class TransformerT<double>;
template SeqTrainTrace TrainTransformer(TransformerT<float>&, std::span<const TrainingExample>,
                                        std::span<const TrainingExample>, const SeqTrainConfig&,
                                        const std::function<void(int, double)>&);
template SeqTrainTrace TrainTransformer(TransformerT<double>&, std::span<const TrainingExample>,
                                        std::span<const TrainingExample>, const SeqTrainConfig&,
                                        const std::function<void(int, double)>&);
template double HeldoutAccuracy(const TransformerT<float>&, std::span<const TrainingExample>);
template double HeldoutAccuracy(const TransformerT<double>&, std::span<const TrainingExample>);

}  // namespace geopid
