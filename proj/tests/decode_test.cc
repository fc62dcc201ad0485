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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "geopid/decode.h"
#include "geopid/random.h"
#include "geopid/transformer.h"

namespace geopid {
namespace {

// Deterministic pseudo-random logits keyed on the full token sequence.
class HashScorer : public Scorer {
 public:
  explicit HashScorer(int vocab) : vocab_(vocab) {}
  int vocab_size() const override { return vocab_; }
  int context_window() const override { return 1 << 20; }
  std::vector<double> NextTokenLogits(std::span<const Token> tokens) const override {
    std::string key;
    for (Token t : tokens) key += std::to_string(t) + ",";
    std::vector<double> out(vocab_);
    for (int v = 0; v < vocab_; ++v) {
      out[v] = static_cast<double>(Fnv1a(key + std::to_string(v)) % 10007) / 1000.0;
    }
    return out;
  }

 private:
  int vocab_;
};

const PidLayout kLayout{3, 2, 4, 3};

Vocabulary TestVocab() { return Vocabulary::Build(kLayout, std::vector<std::string>{"ab"}); }

std::map<std::string, Pid> RandomPids(int n, const std::string& gid_chars, uint64_t seed) {
  Rng rng(seed);
  std::set<std::pair<std::string, std::vector<int>>> seen;
  std::map<std::string, Pid> out;
  while (static_cast<int>(out.size()) < n) {
    std::string gid;
    for (int i = 0; i < kLayout.gid_length; ++i) gid += gid_chars[rng.Below(gid_chars.size())];
    Pid pid{gid, Sid{{static_cast<int>(rng.Below(4)), static_cast<int>(rng.Below(4))}},
            static_cast<int>(rng.Below(3))};
    if (!seen.insert({gid, {pid.sid.indices[0], pid.sid.indices[1], pid.dedup}}).second) continue;
    out["p" + std::to_string(out.size())] = pid;
  }
  return out;
}

std::vector<Token> Geo(const Vocabulary& v, const std::string& s) { return v.EncodeGeohash(s); }

TEST(ConstrainedStepTest, UniformAndLimit) {
  std::vector<double> logits = {1.0, 1.0, 5.0, 1.0};
  std::vector<Token> two = {0, 3};
  auto p = ConstrainedStep(logits, two, 1.0);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  std::vector<double> l2 = {0.3, 0.1, 0.2, 0.9};
  std::vector<Token> all = {0, 1, 2, 3};
  auto sharp = ConstrainedStep(l2, all, 1e-4);
  EXPECT_NEAR(sharp[3], 1.0, 1e-12);
  auto soft = ConstrainedStep(l2, all, 0.7);
  double sum = 0;
  for (double x : soft) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_TRUE(ConstrainedStep(l2, {}, 1.0).empty());
}

TEST(SspPrefixTest, ArithmeticAndFallback) {
  PidLayout layout{6, 1, 2, 2};
  Vocabulary vocab = Vocabulary::Build(layout, std::vector<std::string>{"a"});
  std::map<std::string, Pid> pids = {{"a", Pid{"wx4g0b", Sid{{0}}, 0}},
                                     {"b", Pid{"wx4h00", Sid{{1}}, 0}}};
  PidTrie trie = BuildTrie(pids, vocab);
  auto user = Geo(vocab, "wx4g0b");
  EXPECT_EQ(SspPrefix(user, 6, 2, trie), Geo(vocab, "wx4g"));
  EXPECT_TRUE(SspPrefix(user, 2, 2, trie).empty());
  EXPECT_TRUE(SspPrefix(user, 0, 2, trie).empty());
  // "wx4k" is unpopulated but "wx4" is not: shortened to 3.
  auto empty_cell = Geo(vocab, "wx4k00");
  EXPECT_EQ(SspPrefix(empty_cell, 6, 2, trie), Geo(vocab, "wx4"));
  // Lowering lambda never shrinks the reachable set.
  size_t prev = 0;
  for (int lambda = 6; lambda >= 0; --lambda) {
    const size_t reach = trie.LeafCount(SspPrefix(user, lambda, 2, trie));
    EXPECT_GE(reach, prev);
    prev = reach;
  }
}

// Oracle: score every leaf under prefix by the product of constrained
// per-step probabilities and sort.
std::vector<std::pair<double, std::string>> Enumerate(const Scorer& s, const PidTrie& trie,
                                                      std::span<const Token> context,
                                                      std::span<const Token> prefix,
                                                      double tau) {
  std::vector<std::pair<double, std::string>> out;
  for (const auto& leaf : trie.Leaves(prefix)) {
    double lp = 0;
    for (size_t pos = prefix.size(); pos < leaf.size(); ++pos) {
      std::vector<Token> seq(context.begin(), context.end());
      seq.insert(seq.end(), leaf.begin(), leaf.begin() + pos);
      auto logits = s.NextTokenLogits(seq);
      auto allowed = trie.Children(std::span<const Token>(leaf).first(pos));
      auto p = ConstrainedStep(logits, allowed, tau);
      const size_t idx = std::find(allowed.begin(), allowed.end(), leaf[pos]) - allowed.begin();
      lp += std::log(p[idx]);
    }
    out.emplace_back(lp, *trie.Lookup(leaf));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  return out;
}

// Contract every Scorer must satisfy under the decoder.
void CheckDecoderContract(const Scorer& scorer) {
  Vocabulary vocab = TestVocab();
  auto pids = RandomPids(80, "bcd", 12);
  PidTrie trie = BuildTrie(pids, vocab);
  const std::vector<Token> context = {Vocabulary::kQueryStart, 5, Vocabulary::kTargetStart};

  for (const std::string& pre : {std::string(), std::string("b"), std::string("cd")}) {
    auto prefix = Geo(vocab, pre);
    const size_t leaves = trie.LeafCount(prefix);
    ASSERT_GT(leaves, 0u);
    ASSERT_LE(leaves, 100u);
    DecodeConfig cfg;
    cfg.k = 10;
    cfg.beam_width = static_cast<int>(leaves);
    auto r = BeamSearch(scorer, trie, vocab, context, prefix, cfg);
    auto oracle = Enumerate(scorer, trie, context, prefix, cfg.tau);
    ASSERT_EQ(r.items.size(), std::min<size_t>(10, leaves));
    EXPECT_EQ(r.diagnostics.steps, kLayout.pid_length() - static_cast<int>(prefix.size()));
    std::map<std::string, double> oracle_lp;
    for (const auto& [lp, id] : oracle) oracle_lp[id] = lp;
    for (size_t i = 0; i < r.items.size(); ++i) {
      ASSERT_TRUE(r.items[i].poi_id.has_value());
      const std::string& id = *r.items[i].poi_id;
      // Exact ids unless the oracle has a tie at this rank, in which case
      // any member of the tied group is a correct answer.
      auto same = [&](size_t j) { return std::abs(oracle[j].first - oracle[i].first) < 1e-12; };
      const bool tied = (i > 0 && same(i - 1)) || (i + 1 < oracle.size() && same(i + 1));
      if (!tied) {
        EXPECT_EQ(id, oracle[i].second) << "rank " << i << " prefix " << pre;
      }
      EXPECT_NEAR(r.items[i].log_prob, oracle[i].first, 1e-9);
      EXPECT_NEAR(oracle_lp.at(id), r.items[i].log_prob, 1e-9);
      EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), r.items[i].pid_tokens.begin()));
      if (i > 0) {
        EXPECT_LE(r.items[i].log_prob, r.items[i - 1].log_prob);
      }
    }
    std::set<std::string> distinct;
    for (const auto& item : r.items) distinct.insert(*item.poi_id);
    EXPECT_EQ(distinct.size(), r.items.size());
    auto again = BeamSearch(scorer, trie, vocab, context, prefix, cfg);
    for (size_t i = 0; i < r.items.size(); ++i) {
      EXPECT_EQ(again.items[i].pid_tokens, r.items[i].pid_tokens);
    }
  }
}

TEST(BeamSearchTest, HashScorerMatchesExhaustiveOracle) {
  CheckDecoderContract(HashScorer(TestVocab().size()));
}

TEST(BeamSearchTest, UnigramScorerMatchesExhaustiveOracle) {
  Vocabulary vocab = TestVocab();
  std::vector<std::vector<Token>> targets;
  for (const auto& [id, pid] : RandomPids(30, "bcdf", 2)) targets.push_back(PidTokens(pid, vocab));
  CheckDecoderContract(UnigramScorer(vocab.size(), targets));
}

TEST(BeamSearchTest, TransformerMatchesExhaustiveOracle) {
  TransformerConfig c;
  c.vocab_size = TestVocab().size();
  c.layers = 1;
  c.heads = 2;
  c.model_dim = 16;
  c.context = 16;
  c.seed = 5;
  TransformerT<double> model(c);
  // Sharpen the untrained output so ranks are well separated.
  for (auto& p : model.params()) p *= 20;
  CheckDecoderContract(model);
}

TEST(BeamSearchTest, SinglePoiIsForced) {
  Vocabulary vocab = TestVocab();
  auto pids = RandomPids(1, "b", 3);
  PidTrie trie = BuildTrie(pids, vocab);
  DecodeConfig cfg;
  cfg.k = 5;
  auto r = BeamSearch(HashScorer(vocab.size()), trie, vocab, std::vector<Token>{3}, {}, cfg);
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(*r.items[0].poi_id, "p0");
}

TEST(BeamSearchTest, PrefixReducesStepsAndContributesNothing) {
  Vocabulary vocab = TestVocab();
  PidTrie trie = BuildTrie(RandomPids(60, "bc", 4), vocab);
  HashScorer scorer(vocab.size());
  DecodeConfig cfg;
  cfg.k = 5;
  const std::vector<Token> ctx = {3};
  auto full = BeamSearch(scorer, trie, vocab, ctx, {}, cfg);
  auto prefix = Geo(vocab, "bc");
  auto pruned = BeamSearch(scorer, trie, vocab, ctx, prefix, cfg);
  EXPECT_EQ(full.diagnostics.steps, kLayout.pid_length());
  EXPECT_EQ(pruned.diagnostics.steps, full.diagnostics.steps - 2);
  EXPECT_EQ(pruned.diagnostics.prefix_length, 2);
  for (const auto& item : pruned.items) {
    EXPECT_EQ(item.pid_tokens[0], prefix[0]);
    EXPECT_EQ(item.pid_tokens[1], prefix[1]);
  }
  // A single leaf under the full prefix has log-probability 0.
  auto leaf = trie.Leaves(prefix)[0];
  auto forced = BeamSearch(scorer, trie, vocab, ctx, leaf, cfg);
  ASSERT_EQ(forced.items.size(), 1u);
  EXPECT_EQ(forced.items[0].log_prob, 0.0);
  EXPECT_EQ(forced.diagnostics.steps, 0);
}

TEST(BeamSearchTest, DeadPrefixGivesEmptyResult) {
  Vocabulary vocab = TestVocab();
  PidTrie trie = BuildTrie(RandomPids(10, "b", 6), vocab);
  DecodeConfig cfg;
  auto r = BeamSearch(HashScorer(vocab.size()), trie, vocab, std::vector<Token>{3},
                      Geo(vocab, "z"), cfg);
  EXPECT_TRUE(r.items.empty());
}

TEST(BeamSearchTest, WithoutTrieTokensStayInPositionRegions) {
  Vocabulary vocab = TestVocab();
  PidTrie trie = BuildTrie(RandomPids(20, "bc", 7), vocab);
  DecodeConfig cfg;
  cfg.k = 20;
  cfg.tcg_enabled = false;
  auto r = BeamSearch(HashScorer(vocab.size()), trie, vocab, std::vector<Token>{3}, {}, cfg);
  ASSERT_EQ(r.items.size(), 20u);
  int invalid = 0;
  for (const auto& item : r.items) {
    for (int pos = 0; pos < kLayout.pid_length(); ++pos) {
      auto [lo, hi] = vocab.PositionRange(pos);
      EXPECT_GE(item.pid_tokens[pos], lo);
      EXPECT_LT(item.pid_tokens[pos], hi);
    }
    invalid += !item.poi_id.has_value();
  }
  // 20 PIDs out of 32^3 * 16 * 3 possible sequences: nearly all invalid.
  EXPECT_GT(invalid, 15);
}

}  // namespace
}  // namespace geopid
