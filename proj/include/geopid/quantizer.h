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

#ifndef GEOPID_QUANTIZER_H_
#define GEOPID_QUANTIZER_H_

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geopid/embed.h"
#include "geopid/mlp.h"
#include "geopid/poi.h"

namespace geopid {

// levels() ordered codebooks, each an M x d matrix whose rows are codewords.
class Codebooks {
 public:
  Codebooks() = default;
  explicit Codebooks(std::vector<Eigen::MatrixXd> books);

  int levels() const { return static_cast<int>(books_.size()); }
  int size() const { return books_.empty() ? 0 : static_cast<int>(books_[0].rows()); }
  int dim() const { return books_.empty() ? 0 : static_cast<int>(books_[0].cols()); }

  const Eigen::MatrixXd& level(int l) const { return books_[l]; }
  Eigen::MatrixXd& level(int l) { return books_[l]; }

 private:
  std::vector<Eigen::MatrixXd> books_;
};

// Hierarchical semantic identifier: one codeword index per level.
struct Sid {
  std::vector<int> indices;

  friend bool operator==(const Sid&, const Sid&) = default;
  friend auto operator<=>(const Sid&, const Sid&) = default;
};

struct QuantizeResult {
  Sid sid;
  Eigen::VectorXd reconstruction;  // sum of the selected codewords
  Eigen::VectorXd residual;        // h - reconstruction
};

// Greedy residual quantization: each level picks the nearest codeword to the
// running residual (squared L2, lowest index on ties).
QuantizeResult Quantize(const Eigen::VectorXd& h, const Codebooks& books);

struct RqConfig {
  int input_dim = 64;
  std::vector<int> hidden_dims = {128, 64, 32};
  int latent_dim = 32;
  int levels = 3;
  int codebook_size = 128;
  double beta = 0.25;
  double learning_rate = 5e-4;
  int epochs = 20;
  int batch_size = 64;
  int kmeans_iters = 25;
  uint64_t seed = 0;

  // The [512, 256, 128] hidden stack used for large encoders.
  static RqConfig ProductionPreset();
  void Validate() const;
};

struct RqModel {
  RqConfig config;
  Mlp encoder;  // input_dim -> hidden... -> latent_dim
  Mlp decoder;  // latent_dim -> reversed hidden... -> input_dim
  Codebooks codebooks;

  Eigen::VectorXd Encode(const Embedding& x) const { return encoder.Apply(x); }
  Embedding Decode(const Eigen::VectorXd& h) const { return decoder.Apply(h); }
};

struct RqTrainTrace {
  std::vector<double> epoch_loss;            // reconstruction + commitment
  std::vector<double> epoch_reconstruction;  // reconstruction term only
  // Codewords reset per level over the whole run.
  std::vector<int> reseeded;
  // Assignments per level-1 codeword during the final epoch.
  std::vector<int> final_level1_usage;
  // Level-1 codewords reset after the final epoch.
  std::vector<bool> final_level1_reseeded;
};

// Mini-batch gradient descent on
//   ||x - D(h_hat)||^2 + beta * sum_l ||sg[r_{l-1}] - z_l||^2.
// The decoder gradient reaches the encoder through a straight-through copy
// (dL/dh := dL/dh_hat); codewords move only by the commitment term.
// Codebooks start from per-level k-means over the initial encoder's residuals
// and any codeword unused for a whole epoch is reset to a random residual of
// its level from the last batch. Throws Error(kTrainingFailure) when the loss
// becomes non-finite.
RqModel TrainRq(std::span<const Embedding> corpus, const RqConfig& config,
                RqTrainTrace* trace = nullptr);

// Encoder then Quantize for every POI; rotated[i] belongs to pois[i].
std::map<std::string, Sid> AssignSids(const RqModel& model,
                                      std::span<const PoiRecord> pois,
                                      std::span<const Embedding> rotated);

// Lloyd k-means over the rows of data with k-means++ seeding; returns k x dim
// centroids. Duplicate rows are allowed when k exceeds the distinct count.
Eigen::MatrixXd KMeansRows(const Eigen::MatrixXd& data, int k, int iters,
                           Rng& rng);

}  // namespace geopid

#endif  // GEOPID_QUANTIZER_H_
