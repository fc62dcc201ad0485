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

#ifndef GEOPID_SEQMODEL_H_
#define GEOPID_SEQMODEL_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geopid/geocode.h"
#include "geopid/pid.h"
#include "geopid/vocab.h"

namespace geopid {

struct HistoryEntry {
  std::string query;
  GeoPoint location;
  Pid clicked;
};

// History is chronological, oldest first.
struct SearchContext {
  std::vector<HistoryEntry> history;
  std::string query;
  GeoPoint location;
};

struct LinearizeOptions {
  // Geohash length for request locations; equals the PID gid_length unless
  // explicit POI identifiers are disabled.
  int location_gid_length = 6;
  bool include_history = true;
  // Budget for the context part; the target PID must still fit after it.
  int max_tokens = 256 - 10;
};

// Per history step: geohash(location) ++ text(query) ++ PID(clicked); then
// geohash(current location) ++ text(current query) ++ <target>. Oldest history
// entries are dropped first when over budget; throws Error(kInvalidArgument)
// when the current request alone does not fit.
std::vector<Token> Linearize(const SearchContext& ctx, const Vocabulary& vocab,
                             const LinearizeOptions& options);

// Incremental scoring of continuations of one fixed context.
class ScoringSession {
 public:
  virtual ~ScoringSession() = default;
  // Logits for the token following context ++ continuation.
  virtual std::vector<double> Logits(std::span<const Token> continuation) = 0;
};

// Autoregressive next-token scorer. Implementations must be safe for
// concurrent const calls.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual int vocab_size() const = 0;
  virtual int context_window() const = 0;
  // One finite score per vocabulary entry. Throws Error(kInvalidArgument)
  // when tokens exceed the context window.
  virtual std::vector<double> NextTokenLogits(std::span<const Token> tokens) const = 0;
  // The default session re-scores context ++ continuation from scratch.
  virtual std::unique_ptr<ScoringSession> StartSession(
      std::span<const Token> context) const;
};

// Context-free baseline: log relative frequency of each token among the
// training target PIDs, with add-one smoothing.
class UnigramScorer : public Scorer {
 public:
  UnigramScorer(int vocab_size, std::span<const std::vector<Token>> targets,
                int context_window = 1 << 20);

  int vocab_size() const override { return static_cast<int>(logits_.size()); }
  int context_window() const override { return context_window_; }
  std::vector<double> NextTokenLogits(std::span<const Token> tokens) const override;

 private:
  std::vector<double> logits_;
  int context_window_;
};

// Context tokens followed by the target PID tokens; only the target part is
// supervised.
struct TrainingExample {
  std::vector<Token> context;
  std::vector<Token> target;
};

}  // namespace geopid

#endif  // GEOPID_SEQMODEL_H_
