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

#ifndef GEOPID_EMBED_H_
#define GEOPID_EMBED_H_

#include <Eigen/Core>
#include <cstdint>
#include <string_view>

namespace geopid {

using Embedding = Eigen::VectorXd;

struct EmbedConfig {
  int dim = 64;
  // Character n-gram orders hashed into the buckets.
  int min_ngram = 2;
  int max_ngram = 4;
};

// Feature-hashing text embedder: character n-grams of "name | category" are
// hashed with a sign bit into dim buckets, then L2-normalized.
class TextEmbedder {
 public:
  explicit TextEmbedder(EmbedConfig config = {});

  const EmbedConfig& config() const { return config_; }

  // Throws Error(kInvalidArgument) when name is empty.
  Embedding Embed(std::string_view name, std::string_view category,
                  uint64_t seed) const;

 private:
  EmbedConfig config_;
};

// Checks dim % (2 * omega) == 0, the layout GeoPE needs.
void ValidateEmbeddingLayout(int dim, int omega);

}  // namespace geopid

#endif  // GEOPID_EMBED_H_
