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

#ifndef GEOPID_PROXIMITY_H_
#define GEOPID_PROXIMITY_H_

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <span>
#include <utility>
#include <vector>

#include "geopid/geocode.h"

namespace geopid {

// Observed proximity level: length of the common prefix of the user's and
// the clicked POI's geohashes at gid_length.
int LabelProximity(const GeoPoint& user, const GeoPoint& poi, int gid_length);

struct ProximitySample {
  std::string query;
  int level = 0;
};

struct ProximityConfig {
  int gid_length = 6;  // classes are levels 0..gid_length
  int feature_dim = 4096;
  int min_ngram = 1;
  int max_ngram = 4;
  int epochs = 30;
  double learning_rate = 0.5;
  double l2 = 1e-5;
  double heldout_fraction = 0.2;
  uint64_t seed = 0;

  void Validate() const;
};

struct ProximityReport {
  size_t train_size = 0;
  size_t heldout_size = 0;
  double train_accuracy = 0;
  double heldout_accuracy = 0;
  // Accuracy of always predicting the most frequent training label.
  double majority_accuracy = 0;
};

using SparseFeatures = std::vector<std::pair<int, double>>;

// Multinomial logistic regression over hashed character n-grams of the
// lowercased query.
class ProximityModel {
 public:
  ProximityModel() = default;
  ProximityModel(const ProximityConfig& config, Eigen::MatrixXd weights,
                 Eigen::VectorXd bias);

  const ProximityConfig& config() const { return config_; }
  int num_classes() const { return static_cast<int>(bias_.size()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  SparseFeatures Features(std::string_view query) const;
  Eigen::VectorXd Scores(std::string_view query) const;
  // Argmax level; ties go to the smaller level.
  int Predict(std::string_view query) const;

 private:
  ProximityConfig config_;
  Eigen::MatrixXd weights_;  // classes x feature_dim
  Eigen::VectorXd bias_;
};

// Throws Error(kTrainingFailure) when fewer than two classes are present.
ProximityModel TrainProximity(std::span<const ProximitySample> samples,
                              const ProximityConfig& config,
                              ProximityReport* report = nullptr);

}  // namespace geopid

#endif  // GEOPID_PROXIMITY_H_
