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

#include "geopid/decode.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "geopid/error.h"

namespace geopid {

void DecodeConfig::Validate() const {
  Require(k >= 1, "k must be >= 1");
  Require(beam_width >= 0, "beam_width must be >= 0");
  Require(tau > 0, "tau must be > 0");
  Require(gamma >= 1, "gamma must be >= 1");
}

std::vector<double> ConstrainedStep(std::span<const double> logits,
                                    std::span<const Token> allowed, double tau) {
  Require(tau > 0, "tau must be > 0");
  if (allowed.empty()) return {};
  std::vector<double> p(allowed.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < allowed.size(); ++i) {
    Require(allowed[i] >= 0 && static_cast<size_t>(allowed[i]) < logits.size(),
            "allowed token outside the logit vector");
    p[i] = logits[allowed[i]] / tau;
    mx = std::max(mx, p[i]);
  }
  double z = 0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<Token> SspPrefix(std::span<const Token> user_geo_tokens, int lambda, int gamma,
                             const PidTrie& trie) {
  const int want = std::max(0, lambda - gamma);
  int len = std::min<int>(want, static_cast<int>(user_geo_tokens.size()));
  while (len > 0 && !trie.HasPrefix(user_geo_tokens.first(len))) --len;
  return std::vector<Token>(user_geo_tokens.begin(), user_geo_tokens.begin() + len);
}

namespace {

struct Beam {
  std::vector<Token> tokens;
  double log_prob = 0;
};

struct Candidate {
  double log_prob;
  Token token;
  size_t beam;
};

// Log of the constrained softmax, computed directly for accuracy.
std::vector<double> ConstrainedLogProbs(std::span<const double> logits,
                                        std::span<const Token> allowed, double tau) {
  std::vector<double> lp(allowed.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < allowed.size(); ++i) {
    lp[i] = logits[allowed[i]] / tau;
    mx = std::max(mx, lp[i]);
  }
  double z = 0;
  for (double v : lp) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  for (double& v : lp) v -= log_z;
  return lp;
}

}  // namespace

RetrievalResult BeamSearch(const Scorer& scorer, const PidTrie& trie, const Vocabulary& vocab,
                           std::span<const Token> context, std::span<const Token> prefix,
                           const DecodeConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const int depth = vocab.layout().pid_length();
  Require(trie.depth() == depth, "trie depth does not match the vocabulary layout");
  Require(static_cast<int>(prefix.size()) <= depth, "forced prefix longer than a PID");
  Require(scorer.vocab_size() == vocab.size(), "scorer and vocabulary sizes differ");
  const size_t width = static_cast<size_t>(config.effective_beam_width());

  RetrievalResult result;
  result.diagnostics.prefix_length = static_cast<int>(prefix.size());
  auto session = scorer.StartSession(context);

  std::vector<Beam> beams = {Beam{std::vector<Token>(prefix.begin(), prefix.end()), 0.0}};
  if (config.tcg_enabled && !trie.HasPrefix(prefix)) beams.clear();
  for (int pos = static_cast<int>(prefix.size()); pos < depth && !beams.empty(); ++pos) {
    ++result.diagnostics.steps;
    const auto [lo, hi] = vocab.PositionRange(pos);
    std::vector<Token> region;
    if (!config.tcg_enabled) {
      for (Token t = lo; t < hi; ++t) region.push_back(t);
    }
    std::vector<Candidate> candidates;
    for (size_t b = 0; b < beams.size(); ++b) {
      const std::vector<Token> allowed =
          config.tcg_enabled ? trie.Children(beams[b].tokens) : region;
      if (allowed.empty()) {
        ++result.diagnostics.dead_ends;
        continue;
      }
      const std::vector<double> logits = session->Logits(beams[b].tokens);
      const std::vector<double> lp = ConstrainedLogProbs(logits, allowed, config.tau);
      for (size_t i = 0; i < allowed.size(); ++i) {
        candidates.push_back({beams[b].log_prob + lp[i], allowed[i], b});
      }
    }
    const size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.token != b.token) return a.token < b.token;
                        return a.beam < b.beam;
                      });
    std::vector<Beam> next;
    next.reserve(keep);
    for (size_t i = 0; i < keep; ++i) {
      Beam nb = beams[candidates[i].beam];
      nb.tokens.push_back(candidates[i].token);
      nb.log_prob = candidates[i].log_prob;
      next.push_back(std::move(nb));
    }
    beams = std::move(next);
  }

  // Beams are already ordered best first by the last selection.
  for (size_t i = 0; i < beams.size() && result.items.size() < static_cast<size_t>(config.k);
       ++i) {
    RetrievedPoi item;
    item.poi_id = trie.Lookup(beams[i].tokens);
    item.pid_tokens = std::move(beams[i].tokens);
    item.log_prob = beams[i].log_prob;
    result.items.push_back(std::move(item));
  }
  result.diagnostics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace geopid
