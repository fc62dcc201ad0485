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

#include "geopid/quantizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geopid/error.h"

namespace geopid {

Codebooks::Codebooks(std::vector<Eigen::MatrixXd> books)
    : books_(std::move(books)) {
  Require(!books_.empty(), "at least one codebook level is required");
  for (const auto& b : books_) {
    Require(b.rows() == books_[0].rows() && b.cols() == books_[0].cols(),
            "codebook shapes must match across levels");
    Require(b.allFinite(), "codebook contains non-finite values");
  }
}

QuantizeResult Quantize(const Eigen::VectorXd& h, const Codebooks& books) {
  Require(h.size() == books.dim(), "latent dimension does not match codebooks");
  QuantizeResult out;
  out.sid.indices.reserve(books.levels());
  out.reconstruction = Eigen::VectorXd::Zero(h.size());
  Eigen::VectorXd residual = h;
  for (int l = 0; l < books.levels(); ++l) {
    const Eigen::MatrixXd& book = books.level(l);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < book.rows(); ++m) {
      const double d = (book.row(m).transpose() - residual).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    out.sid.indices.push_back(best);
    out.reconstruction += book.row(best).transpose();
    residual -= book.row(best).transpose();
  }
  out.residual = std::move(residual);
  return out;
}

RqConfig RqConfig::ProductionPreset() {
  RqConfig c;
  c.hidden_dims = {512, 256, 128};
  return c;
}

void RqConfig::Validate() const {
  Require(input_dim > 0 && latent_dim > 0, "RQ dimensions must be positive");
  for (int h : hidden_dims) Require(h > 0, "hidden dims must be positive");
  Require(levels >= 1, "levels must be >= 1");
  Require(codebook_size >= 1, "codebook size must be >= 1");
  Require(beta > 0, "beta must be > 0");
  Require(learning_rate > 0, "learning rate must be > 0");
  Require(epochs >= 0 && batch_size >= 1, "bad epoch/batch settings");
}

namespace {

// Row-wise nearest centroid by squared distance; ties to the lowest index.
std::vector<int> NearestRows(const Eigen::MatrixXd& data,
                             const Eigen::MatrixXd& centroids) {
  const Eigen::VectorXd c_norm = centroids.rowwise().squaredNorm();
  const Eigen::MatrixXd cross = data * centroids.transpose();
  std::vector<int> out(data.rows());
  for (int i = 0; i < data.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < centroids.rows(); ++k) {
      const double d = c_norm[k] - 2 * cross(i, k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[i] = best;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd KMeansRows(const Eigen::MatrixXd& data, int k, int iters,
                           Rng& rng) {
  const int n = static_cast<int>(data.rows());
  Require(n > 0 && k > 0, "k-means needs data and k > 0");
  Eigen::MatrixXd centroids(k, data.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  centroids.row(0) = data.row(static_cast<int>(rng.Below(n)));
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (data.row(i) - centroids.row(c - 1)).squaredNorm());
    }
    centroids.row(c) = data.row(static_cast<int>(rng.Weighted(d2)));
  }
  std::vector<int> assign;
  for (int it = 0; it < iters; ++it) {
    std::vector<int> next = NearestRows(data, centroids);
    if (next == assign) break;
    assign = std::move(next);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sum.row(assign[i]) += data.row(i);
      ++count[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) centroids.row(c) = sum.row(c) / count[c];
    }
  }
  return centroids;
}

namespace {

std::vector<int> Reversed(std::vector<int> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

Eigen::MatrixXd StackRows(std::span<const Embedding> corpus,
                          std::span<const int> rows) {
  Eigen::MatrixXd x(rows.size(), corpus[0].size());
  for (size_t i = 0; i < rows.size(); ++i) x.row(i) = corpus[rows[i]].transpose();
  return x;
}

}  // namespace

RqModel TrainRq(std::span<const Embedding> corpus, const RqConfig& config,
                RqTrainTrace* trace) {
  config.Validate();
  Require(!corpus.empty(), "RQ training corpus is empty");
  for (const auto& x : corpus) {
    Require(x.size() == config.input_dim,
            "corpus embedding dimension does not match input_dim");
  }
  Rng rng(DeriveSeed(config.seed, "rq"));

  RqModel model;
  model.config = config;
  std::vector<int> enc_dims = {config.input_dim};
  enc_dims.insert(enc_dims.end(), config.hidden_dims.begin(),
                  config.hidden_dims.end());
  enc_dims.push_back(config.latent_dim);
  model.encoder = Mlp(enc_dims, rng);
  model.decoder = Mlp(Reversed(enc_dims), rng);

  const int n = static_cast<int>(corpus.size());
  const int levels = config.levels;
  const int m = config.codebook_size;

  // Codebook init: k-means per level on the initial encoder's residuals.
  {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    Eigen::MatrixXd residual = model.encoder.Forward(StackRows(corpus, all), nullptr);
    std::vector<Eigen::MatrixXd> books;
    for (int l = 0; l < levels; ++l) {
      Eigen::MatrixXd book = KMeansRows(residual, m, config.kmeans_iters, rng);
      std::vector<int> nearest = NearestRows(residual, book);
      for (int i = 0; i < n; ++i) residual.row(i) -= book.row(nearest[i]);
      books.push_back(std::move(book));
    }
    model.codebooks = Codebooks(std::move(books));
  }

  RqTrainTrace local;
  RqTrainTrace& tr = trace ? *trace : local;
  tr = RqTrainTrace{};
  tr.reseeded.assign(levels, 0);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int dim = config.latent_dim;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(std::span<int>(order));
    std::vector<std::vector<int>> usage(levels, std::vector<int>(m, 0));
    std::vector<Eigen::MatrixXd> last_residuals(levels);
    double loss_sum = 0, recon_sum = 0;

    for (int start = 0; start < n; start += config.batch_size) {
      const int b = std::min(config.batch_size, n - start);
      std::span<const int> rows(order.data() + start, b);
      const Eigen::MatrixXd x = StackRows(corpus, rows);

      Mlp::Cache enc_cache, dec_cache;
      const Eigen::MatrixXd h = model.encoder.Forward(x, &enc_cache);

      // Residual quantization of the batch.
      Eigen::MatrixXd residual = h;
      Eigen::MatrixXd h_hat = Eigen::MatrixXd::Zero(b, dim);
      std::vector<Eigen::MatrixXd> book_grads(levels);
      double commit = 0;
      for (int l = 0; l < levels; ++l) {
        const Eigen::MatrixXd& book = model.codebooks.level(l);
        std::vector<int> idx = NearestRows(residual, book);
        book_grads[l] = Eigen::MatrixXd::Zero(m, dim);
        last_residuals[l] = residual;
        for (int i = 0; i < b; ++i) {
          const Eigen::RowVectorXd diff = residual.row(i) - book.row(idx[i]);
          commit += diff.squaredNorm();
          // d/dz of beta * ||sg[r] - z||^2, averaged over the batch.
          book_grads[l].row(idx[i]) -= (2.0 * config.beta / b) * diff;
          ++usage[l][idx[i]];
          h_hat.row(i) += book.row(idx[i]);
          residual.row(i) -= book.row(idx[i]);
        }
      }

      const Eigen::MatrixXd x_hat = model.decoder.Forward(h_hat, &dec_cache);
      const Eigen::MatrixXd err = x_hat - x;
      const double recon = err.squaredNorm();
      loss_sum += recon + config.beta * commit;
      recon_sum += recon;

      Mlp::Gradients dec_grads = model.decoder.ZeroGradients();
      Mlp::Gradients enc_grads = model.encoder.ZeroGradients();
      const Eigen::MatrixXd grad_h_hat =
          model.decoder.Backward(dec_cache, (2.0 / b) * err, dec_grads);
      // Straight-through: the quantizer passes dL/dh_hat to h unchanged.
      model.encoder.Backward(enc_cache, grad_h_hat, enc_grads);

      model.decoder.Step(dec_grads, config.learning_rate);
      model.encoder.Step(enc_grads, config.learning_rate);
      for (int l = 0; l < levels; ++l) {
        model.codebooks.level(l) -= config.learning_rate * book_grads[l];
      }
    }

    const double epoch_loss = loss_sum / n;
    if (!std::isfinite(epoch_loss)) {
      Throw(ErrorCode::kTrainingFailure,
            "RQ training diverged at epoch " + std::to_string(epoch));
    }
    tr.epoch_loss.push_back(epoch_loss);
    tr.epoch_reconstruction.push_back(recon_sum / n);
    tr.final_level1_usage = usage[0];
    tr.final_level1_reseeded.assign(m, false);

    for (int l = 0; l < levels; ++l) {
      const Eigen::MatrixXd& pool = last_residuals[l];
      for (int c = 0; c < m; ++c) {
        if (usage[l][c] > 0) continue;
        model.codebooks.level(l).row(c) =
            pool.row(static_cast<int>(rng.Below(pool.rows())));
        ++tr.reseeded[l];
        if (l == 0) tr.final_level1_reseeded[c] = true;
      }
    }
  }
  return model;
}

std::map<std::string, Sid> AssignSids(const RqModel& model,
                                      std::span<const PoiRecord> pois,
                                      std::span<const Embedding> rotated) {
  Require(pois.size() == rotated.size(),
          "one rotated embedding is required per POI");
  std::map<std::string, Sid> out;
  for (size_t i = 0; i < pois.size(); ++i) {
    out[pois[i].poi_id] = Quantize(model.Encode(rotated[i]), model.codebooks).sid;
  }
  return out;
}

}  // namespace geopid
