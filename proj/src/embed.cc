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

#include "geopid/embed.h"

#include <cctype>
#include <string>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {

namespace {

std::string Normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

}  // namespace

TextEmbedder::TextEmbedder(EmbedConfig config) : config_(config) {
  Require(config_.dim > 0, "embedding dimension must be positive");
  Require(config_.min_ngram >= 1 && config_.max_ngram >= config_.min_ngram,
          "bad n-gram range");
}

Embedding TextEmbedder::Embed(std::string_view name, std::string_view category,
                              uint64_t seed) const {
  Require(!name.empty(), "POI name must be non-empty");
  // Boundary markers let short words contribute distinctive n-grams.
  const std::string text =
      "^" + Normalize(name) + " | " + Normalize(category) + "$";
  const uint64_t basis = DeriveSeed(seed, "embed");

  Embedding v = Embedding::Zero(config_.dim);
  const std::string_view view(text);
  for (int n = config_.min_ngram; n <= config_.max_ngram; ++n) {
    if (static_cast<size_t>(n) > view.size()) break;
    for (size_t i = 0; i + n <= view.size(); ++i) {
      const uint64_t h = Fnv1a(view.substr(i, n), basis ^ n);
      const int bucket = static_cast<int>((h >> 1) % config_.dim);
      v[bucket] += (h & 1) ? 1.0 : -1.0;
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    // Every n-gram cancelled; fall back to a deterministic unit axis.
    v[static_cast<int>(Fnv1a(text, basis) % config_.dim)] = 1.0;
    return v;
  }
  return v / norm;
}

void ValidateEmbeddingLayout(int dim, int omega) {
  Require(omega >= 1, "omega must be >= 1");
  Require(dim > 0 && dim % (2 * omega) == 0,
          "embedding dimension " + std::to_string(dim) +
              " is not divisible by 2*omega=" + std::to_string(2 * omega));
}

}  // namespace geopid
