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

#include "geopid/seqmodel.h"

#include <cmath>
#include <deque>

#include "geopid/error.h"

namespace geopid {

std::vector<Token> Linearize(const SearchContext& ctx, const Vocabulary& vocab,
                             const LinearizeOptions& options) {
  const int loc_len = options.location_gid_length;
  Require(loc_len >= 1 && loc_len <= kMaxGeohashLength,
          "location geohash length must be in [1, 12]");

  std::vector<Token> current = vocab.EncodeGeohash(EncodeGeohash(ctx.location, loc_len).str());
  const auto q = vocab.EncodeText(ctx.query);
  current.insert(current.end(), q.begin(), q.end());
  current.push_back(Vocabulary::kTargetStart);
  if (static_cast<int>(current.size()) > options.max_tokens) {
    Throw(ErrorCode::kInvalidArgument,
          "current request needs " + std::to_string(current.size()) +
              " tokens, over the budget of " + std::to_string(options.max_tokens));
  }

  // Walk history newest to oldest and keep whole entries while they fit.
  std::deque<std::vector<Token>> kept;
  int used = static_cast<int>(current.size());
  if (options.include_history) {
    for (auto it = ctx.history.rbegin(); it != ctx.history.rend(); ++it) {
      std::vector<Token> step =
          vocab.EncodeGeohash(EncodeGeohash(it->location, loc_len).str());
      const auto hq = vocab.EncodeText(it->query);
      step.insert(step.end(), hq.begin(), hq.end());
      const auto pid = PidTokens(it->clicked, vocab);
      step.insert(step.end(), pid.begin(), pid.end());
      if (used + static_cast<int>(step.size()) > options.max_tokens) break;
      used += static_cast<int>(step.size());
      kept.push_front(std::move(step));
    }
  }

  std::vector<Token> out;
  out.reserve(used);
  for (const auto& step : kept) out.insert(out.end(), step.begin(), step.end());
  out.insert(out.end(), current.begin(), current.end());
  return out;
}

namespace {

class RecomputingSession : public ScoringSession {
 public:
  RecomputingSession(const Scorer& scorer, std::span<const Token> context)
      : scorer_(scorer), tokens_(context.begin(), context.end()),
        base_(tokens_.size()) {}

  std::vector<double> Logits(std::span<const Token> continuation) override {
    tokens_.resize(base_);
    tokens_.insert(tokens_.end(), continuation.begin(), continuation.end());
    return scorer_.NextTokenLogits(tokens_);
  }

 private:
  const Scorer& scorer_;
  std::vector<Token> tokens_;
  size_t base_;
};

}  // namespace

std::unique_ptr<ScoringSession> Scorer::StartSession(
    std::span<const Token> context) const {
  return std::make_unique<RecomputingSession>(*this, context);
}

UnigramScorer::UnigramScorer(int vocab_size,
                             std::span<const std::vector<Token>> targets,
                             int context_window)
    : logits_(vocab_size, 0.0), context_window_(context_window) {
  Require(vocab_size > 0, "vocabulary must be non-empty");
  std::vector<double> counts(vocab_size, 1.0);
  double total = vocab_size;
  for (const auto& t : targets) {
    for (Token tok : t) {
      Require(tok >= 0 && tok < vocab_size, "target token out of range");
      counts[tok] += 1;
      total += 1;
    }
  }
  for (int i = 0; i < vocab_size; ++i) logits_[i] = std::log(counts[i] / total);
}

std::vector<double> UnigramScorer::NextTokenLogits(std::span<const Token> tokens) const {
  Require(static_cast<int>(tokens.size()) <= context_window_,
          "token sequence exceeds the context window");
  return logits_;
}

}  // namespace geopid
