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

#ifndef GEOPID_DECODE_H_
#define GEOPID_DECODE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geopid/pid.h"
#include "geopid/seqmodel.h"
#include "geopid/vocab.h"

namespace geopid {

struct DecodeConfig {
  int k = 10;
  int beam_width = 0;  // 0 means k
  double tau = 1.0;
  int gamma = 2;
  bool ssp_enabled = true;
  bool tcg_enabled = true;

  void Validate() const;
  int effective_beam_width() const { return beam_width > 0 ? beam_width : k; }
};

// Temperature softmax restricted to allowed (same order). Returns an empty
// vector when allowed is empty: the caller drops that path.
std::vector<double> ConstrainedStep(std::span<const double> logits,
                                    std::span<const Token> allowed, double tau);

// The first max(0, lambda - gamma) tokens of the user's geohash tokens. When
// the trie has no node at that prefix it is shortened one token at a time.
std::vector<Token> SspPrefix(std::span<const Token> user_geo_tokens, int lambda, int gamma,
                             const PidTrie& trie);

struct RetrievedPoi {
  std::optional<std::string> poi_id;  // nullopt: the PID maps to nothing
  std::vector<Token> pid_tokens;
  double log_prob = 0;
};

struct DecodeDiagnostics {
  int lambda = -1;          // -1 when SSP was off
  int requested_prefix = 0;  // max(0, lambda - gamma) before the fallback
  int prefix_length = 0;     // tokens actually forced
  int steps = 0;             // scored decoding steps
  int dead_ends = 0;         // paths dropped for an empty allowed set
  double wall_ms = 0;
};

struct RetrievalResult {
  // Best first; at most k entries. Ties keep decoding order.
  std::vector<RetrievedPoi> items;
  DecodeDiagnostics diagnostics;
};

// Width-limited beam search over the PID positions after prefix. Forced
// prefix tokens add nothing to the log-probability. With TCG each step may
// only extend to trie children; without it each position is limited to its
// vocabulary region.
RetrievalResult BeamSearch(const Scorer& scorer, const PidTrie& trie, const Vocabulary& vocab,
                           std::span<const Token> context, std::span<const Token> prefix,
                           const DecodeConfig& config);

}  // namespace geopid

#endif  // GEOPID_DECODE_H_
