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

#include "geopid/proximity.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {

int LabelProximity(const GeoPoint& user, const GeoPoint& poi, int gid_length) {
  return CommonPrefixLength(EncodeGeohash(user, gid_length), EncodeGeohash(poi, gid_length));
}

void ProximityConfig::Validate() const {
  Require(gid_length >= 1 && gid_length <= kMaxGeohashLength, "gid_length must be in [1, 12]");
  Require(feature_dim >= 1, "feature_dim must be positive");
  Require(min_ngram >= 1 && max_ngram >= min_ngram, "bad n-gram range");
  Require(epochs >= 1 && learning_rate > 0 && l2 >= 0, "bad optimizer settings");
  Require(heldout_fraction >= 0 && heldout_fraction < 1, "heldout_fraction must be in [0, 1)");
}

ProximityModel::ProximityModel(const ProximityConfig& config, Eigen::MatrixXd weights,
                               Eigen::VectorXd bias)
    : config_(config), weights_(std::move(weights)), bias_(std::move(bias)) {
  config_.Validate();
  Require(bias_.size() == config_.gid_length + 1, "proximity model needs gid_length + 1 classes");
  Require(weights_.rows() == bias_.size() && weights_.cols() == config_.feature_dim,
          "proximity weight shape mismatch");
  Require(weights_.allFinite() && bias_.allFinite(), "proximity weights must be finite");
}

SparseFeatures ProximityModel::Features(std::string_view query) const {
  std::string text = "^";
  for (char c : query) text += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  text += '$';
  std::map<int, double> counts;
  const int n = static_cast<int>(text.size());
  for (int len = config_.min_ngram; len <= config_.max_ngram; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const uint64_t h = Fnv1a(std::string_view(text).substr(i, len));
      counts[static_cast<int>(h % static_cast<uint64_t>(config_.feature_dim))] += 1.0;
    }
  }
  double norm = 0;
  for (const auto& [k, v] : counts) norm += v * v;
  norm = std::sqrt(norm);
  SparseFeatures out;
  out.reserve(counts.size());
  for (const auto& [k, v] : counts) out.emplace_back(k, norm > 0 ? v / norm : 0.0);
  return out;
}

namespace {

Eigen::VectorXd ScoreFeatures(const SparseFeatures& f, const Eigen::MatrixXd& w,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd s = b;
  for (const auto& [k, v] : f) s += v * w.col(k);
  return s;
}

int ArgmaxLowest(const Eigen::VectorXd& s) {
  int best = 0;
  for (int c = 1; c < s.size(); ++c) {
    if (s[c] > s[best]) best = c;
  }
  return best;
}

}  // namespace

Eigen::VectorXd ProximityModel::Scores(std::string_view query) const {
  return ScoreFeatures(Features(query), weights_, bias_);
}

int ProximityModel::Predict(std::string_view query) const {
  Require(num_classes() > 0, "proximity model is not trained");
  return ArgmaxLowest(Scores(query));
}

ProximityModel TrainProximity(std::span<const ProximitySample> samples,
                              const ProximityConfig& config, ProximityReport* report) {
  config.Validate();
  const int classes = config.gid_length + 1;
  std::vector<int> present(classes, 0);
  for (const auto& s : samples) {
    Require(s.level >= 0 && s.level < classes,
            "proximity label " + std::to_string(s.level) + " outside [0, gid_length]");
    ++present[s.level];
  }
  if (std::count_if(present.begin(), present.end(), [](int c) { return c > 0; }) < 2) {
    Throw(ErrorCode::kTrainingFailure,
          "proximity corpus has fewer than two distinct levels; nothing to learn");
  }

  Rng rng(DeriveSeed(config.seed, "proximity"));
  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(std::span<size_t>(order));
  const size_t n_heldout =
      std::min(samples.size() - 1,
               static_cast<size_t>(std::floor(config.heldout_fraction * samples.size())));
  std::vector<size_t> train(order.begin() + n_heldout, order.end());
  std::vector<size_t> heldout(order.begin(), order.begin() + n_heldout);

  ProximityModel featurizer(config, Eigen::MatrixXd::Zero(classes, config.feature_dim),
                            Eigen::VectorXd::Zero(classes));
  std::vector<SparseFeatures> feats(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) feats[i] = featurizer.Features(samples[i].query);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, config.feature_dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(classes);
  // Plain SGD with a 1/sqrt(epoch) decay; L2 applied lazily on touched columns.
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(std::span<size_t>(train));
    const double lr = config.learning_rate / std::sqrt(1.0 + epoch);
    for (size_t idx : train) {
      Eigen::VectorXd s = ScoreFeatures(feats[idx], w, b);
      Eigen::VectorXd p = (s.array() - s.maxCoeff()).exp();
      p /= p.sum();
      p[samples[idx].level] -= 1.0;
      for (const auto& [k, v] : feats[idx]) {
        w.col(k) -= lr * (v * p + config.l2 * w.col(k));
      }
      b -= lr * p;
    }
    if (!w.allFinite() || !b.allFinite()) {
      Throw(ErrorCode::kTrainingFailure,
            "proximity weights became non-finite at epoch " + std::to_string(epoch));
    }
  }

  ProximityModel model(config, std::move(w), std::move(b));
  if (report) {
    std::vector<int> counts(classes, 0);
    for (size_t i : train) ++counts[samples[i].level];
    const int majority =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    auto accuracy = [&](const std::vector<size_t>& idx, bool baseline) {
      if (idx.empty()) return 0.0;
      size_t ok = 0;
      for (size_t i : idx) {
        const int pred = baseline ? majority
                                  : ArgmaxLowest(ScoreFeatures(feats[i], model.weights(),
                                                               model.bias()));
        ok += (pred == samples[i].level);
      }
      return static_cast<double>(ok) / idx.size();
    };
    report->train_size = train.size();
    report->heldout_size = heldout.size();
    report->train_accuracy = accuracy(train, false);
    report->heldout_accuracy = accuracy(heldout, false);
    report->majority_accuracy = accuracy(heldout.empty() ? train : heldout, true);
  }
  return model;
}

}  // namespace geopid
