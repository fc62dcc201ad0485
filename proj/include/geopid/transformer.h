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

#ifndef GEOPID_TRANSFORMER_H_
#define GEOPID_TRANSFORMER_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "geopid/seqmodel.h"

namespace geopid {

struct TransformerConfig {
  int vocab_size = 0;
  int layers = 4;
  int heads = 4;
  int model_dim = 128;
  int context = 256;
  int ff_mult = 4;
  // Subtract a per-head linear distance penalty from attention scores, on top
  // of the learned positions, so recency is visible at any offset.
  bool recency_bias = true;
  uint64_t seed = 0;

  void Validate() const;
  friend bool operator==(const TransformerConfig&, const TransformerConfig&) = default;
};

struct SeqTrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double grad_clip = 1.0;
  uint64_t seed = 0;

  void Validate() const;
};

struct SeqTrainTrace {
  std::vector<double> epoch_loss;
  // Teacher-forced argmax accuracy on held-out target tokens; empty when no
  // held-out set was given.
  std::vector<double> heldout_accuracy;
};

// Decoder-only transformer: learned token and absolute position embeddings,
// optional per-head linear recency bias in attention, pre-LayerNorm blocks of causal multi-head self-attention and a GELU MLP,
// final LayerNorm and an untied output projection. Parameters live in one
// flat vector so the optimizer and checkpoint code treat them uniformly.
template <typename Scalar>
class TransformerT : public Scorer {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit TransformerT(const TransformerConfig& config);

  const TransformerConfig& config() const { return config_; }
  std::vector<Scalar>& params() { return params_; }
  const std::vector<Scalar>& params() const { return params_; }

  int vocab_size() const override { return config_.vocab_size; }
  int context_window() const override { return config_.context; }
  std::vector<double> NextTokenLogits(std::span<const Token> tokens) const override;
  // Caches the context's keys and values once; each Logits call only runs
  // the continuation tokens.
  std::unique_ptr<ScoringSession> StartSession(std::span<const Token> context) const override;

  // Logits at every position (rows), for causality checks.
  Mat AllLogits(std::span<const Token> tokens) const;

  // Mean cross-entropy over the target tokens. When grad is non-null the
  // parameter gradient is added to it (same layout as params()).
  double LossAndGradient(const TrainingExample& example, std::vector<Scalar>* grad) const;
  // dLoss/dlogits for every position of context ++ target (minus the last
  // token); rows before the first supervised position are exactly zero.
  Mat LogitGradient(const TrainingExample& example) const;

  // Offset of the output projection weights inside params().
  size_t output_weight_offset() const { return off_.wout; }
  size_t output_weight_count() const {
    return static_cast<size_t>(config_.model_dim) * config_.vocab_size;
  }

  struct KvCache {
    std::vector<Mat> keys;    // per layer, rows = positions
    std::vector<Mat> values;
  };

  // Runs tokens at positions base.rows()..; appends their keys/values into
  // *out (a copy of base) when out is non-null. Returns final-norm hidden
  // states of the new rows.
  Mat ForwardIncremental(const KvCache& base, std::span<const Token> tokens,
                         KvCache* out) const;

 private:
  struct LayerOffsets {
    size_t ln1_g, ln1_b, wqkv, bqkv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  struct Offsets {
    size_t tok, pos;
    std::vector<LayerOffsets> layers;
    size_t lnf_g, lnf_b, wout, bout, total;
  };

  void CheckTokens(std::span<const Token> tokens) const;

  TransformerConfig config_;
  Offsets off_;
  std::vector<Scalar> params_;
};

using Transformer = TransformerT<float>;

// Adam with global-norm clipping over shuffled mini-batches. Deterministic
// for a fixed seed. Throws Error(kTrainingFailure) on a non-finite loss.
template <typename Scalar>
SeqTrainTrace TrainTransformer(TransformerT<Scalar>& model,
                               std::span<const TrainingExample> train,
                               std::span<const TrainingExample> heldout,
                               const SeqTrainConfig& config,
                               const std::function<void(int, double)>& on_epoch = {});

template <typename Scalar>
double HeldoutAccuracy(const TransformerT<Scalar>& model,
                       std::span<const TrainingExample> examples);

}  // namespace geopid

#endif  // GEOPID_TRANSFORMER_H_
