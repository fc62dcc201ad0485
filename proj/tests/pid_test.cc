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

#include "geopid/pid.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "geopid/error.h"
#include "geopid/geocode.h"
#include "geopid/random.h"

namespace geopid {
namespace {

PidLayout SmallLayout() { return PidLayout{6, 3, 8, 16}; }

Vocabulary SmallVocab() {
  std::vector<std::string> corpus = {"nearby cafe", "airport"};
  return Vocabulary::Build(SmallLayout(), corpus);
}

TEST(VocabularyTest, RegionsAreDisjointAndCovering) {
  Vocabulary v = SmallVocab();
  std::map<TokenRegion, int> counts;
  for (Token t = 0; t < v.size(); ++t) ++counts[v.RegionOf(t)];
  EXPECT_EQ(counts[TokenRegion::kMarker], 4);
  EXPECT_EQ(counts[TokenRegion::kGeo], 32);
  EXPECT_EQ(counts[TokenRegion::kSid], 3 * 8);
  EXPECT_EQ(counts[TokenRegion::kDedup], 16);
  EXPECT_EQ(counts[TokenRegion::kText], 1 + 13);  // unk + " abcefinoprty"
  EXPECT_NE(v.SidToken(0, 5), v.SidToken(1, 5));
  EXPECT_EQ(v.SidLevel(v.SidToken(2, 7)), 2);
  EXPECT_EQ(v.SidIndex(v.SidToken(2, 7)), 7);
}

TEST(VocabularyTest, TextEncodingAndUnknown) {
  Vocabulary v = SmallVocab();
  auto toks = v.EncodeText("Cafe!");
  ASSERT_EQ(toks.size(), 5u);
  EXPECT_EQ(toks[0], v.EncodeText("c")[0]);
  EXPECT_EQ(toks[4], Vocabulary::kUnknownText);
}

TEST(VocabularyTest, TableRoundTrip) {
  Vocabulary v = SmallVocab();
  Vocabulary w = Vocabulary::FromTable(v.layout(), v.Table());
  EXPECT_EQ(w.Table(), v.Table());
  auto table = v.Table();
  table[5] = "xy";
  EXPECT_THROW(Vocabulary::FromTable(v.layout(), table), Error);
}

TEST(PidTokensTest, RoundTripAndRejection) {
  Vocabulary v = SmallVocab();
  Pid pid{"wx4g0b", Sid{{1, 2, 3}}, 4};
  auto toks = PidTokens(pid, v);
  ASSERT_EQ(static_cast<int>(toks.size()), SmallLayout().pid_length());
  EXPECT_EQ(PidFromTokens(toks, v), pid);
  std::swap(toks[0], toks[6]);
  EXPECT_FALSE(PidFromTokens(toks, v).has_value());
}

TEST(BuildPidsTest, SinglePoiGetsZero) {
  std::vector<PoiRecord> pois = {{"p", GeoPoint(1, 1), "n", "c", {}}};
  auto pids = BuildPids(pois, {{"p", "s00000"}}, {{"p", Sid{{0, 0, 0}}}}, 16);
  EXPECT_EQ(pids.at("p").dedup, 0);
}

TEST(BuildPidsTest, CollisionsOrderedByPoiId) {
  std::vector<PoiRecord> pois = {{"b", GeoPoint(1, 1), "n", "c", {}},
                                 {"a", GeoPoint(1, 1), "n", "c", {}},
                                 {"c", GeoPoint(1, 1), "n", "c", {}}};
  std::map<std::string, std::string> gids = {
      {"a", "s00000"}, {"b", "s00000"}, {"c", "s00001"}};
  std::map<std::string, Sid> sids = {
      {"a", Sid{{1, 1, 1}}}, {"b", Sid{{1, 1, 1}}}, {"c", Sid{{1, 1, 1}}}};
  auto pids = BuildPids(pois, gids, sids, 16);
  EXPECT_EQ(pids.at("a").dedup, 0);
  EXPECT_EQ(pids.at("b").dedup, 1);
  EXPECT_EQ(pids.at("c").dedup, 0);
}

TEST(BuildPidsTest, CapacityErrorNamesCell) {
  std::vector<PoiRecord> pois;
  std::map<std::string, std::string> gids;
  std::map<std::string, Sid> sids;
  for (int i = 0; i < 3; ++i) {
    std::string id = "p" + std::to_string(i);
    pois.push_back({id, GeoPoint(1, 1), "n", "c", {}});
    gids[id] = "s00000";
    sids[id] = Sid{{4, 5, 6}};
  }
  try {
    BuildPids(pois, gids, sids, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacity);
    EXPECT_NE(std::string(e.what()).find("s00000-4-5-6"), std::string::npos);
  }
  EXPECT_THROW(BuildPids(pois, {}, sids, 16), Error);
}

TEST(PidTrieTest, InsertAndWalk) {
  PidTrie trie(3);
  trie.Insert(std::vector<Token>{1, 2, 3}, "x");
  EXPECT_EQ(trie.Children(std::vector<Token>{}), std::vector<Token>{1});
  EXPECT_EQ(trie.Children(std::vector<Token>{1}), std::vector<Token>{2});
  EXPECT_EQ(trie.Children(std::vector<Token>{1, 2}), std::vector<Token>{3});
  EXPECT_TRUE(trie.Children(std::vector<Token>{1, 2, 3}).empty());
  EXPECT_EQ(trie.Lookup(std::vector<Token>{1, 2, 3}), "x");
  EXPECT_TRUE(trie.Children(std::vector<Token>{9}).empty());
}

TEST(PidTrieTest, DuplicateAndLengthErrors) {
  PidTrie trie(2);
  trie.Insert(std::vector<Token>{1, 2}, "x");
  try {
    trie.Insert(std::vector<Token>{1, 2}, "y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConflict);
  }
  EXPECT_THROW(trie.Insert(std::vector<Token>{1}, "z"), Error);
}

TEST(PidTrieTest, ChildrenSortedAndPrefixSets) {
  PidTrie trie(2);
  trie.Insert(std::vector<Token>{10, 30}, "b");
  trie.Insert(std::vector<Token>{10, 20}, "a");
  trie.Insert(std::vector<Token>{5, 20}, "c");
  EXPECT_EQ(trie.Children(std::vector<Token>{10}), (std::vector<Token>{20, 30}));
  EXPECT_EQ(trie.Children(std::vector<Token>{}), (std::vector<Token>{5, 10}));
  EXPECT_EQ(trie.LeafCount(std::vector<Token>{10}), 2u);
  EXPECT_EQ(trie.LeafCount(std::vector<Token>{}), 3u);
  auto leaves = trie.Leaves(std::vector<Token>{});
  EXPECT_EQ(leaves, (std::vector<std::vector<Token>>{{5, 20}, {10, 20}, {10, 30}}));
}

TEST(PidTrieTest, SharedFourTokenPrefixBranchesOnceAtDepthFour) {
  PidTrie trie(6);
  trie.Insert(std::vector<Token>{1, 2, 3, 4, 5, 6}, "a");
  trie.Insert(std::vector<Token>{1, 2, 3, 4, 7, 8}, "b");
  EXPECT_EQ(trie.BranchDepths(), std::vector<int>{4});
}

TEST(PidTrieTest, CompletenessAndSoundness) {
  Vocabulary v = SmallVocab();
  Rng rng(3);
  std::vector<PoiRecord> pois;
  std::map<std::string, std::string> gids;
  std::map<std::string, Sid> sids;
  for (int i = 0; i < 400; ++i) {
    std::string id = "poi" + std::to_string(i);
    GeoPoint p(rng.Uniform(30, 30.5), rng.Uniform(120, 120.5));
    pois.push_back({id, p, "n", "c", {}});
    gids[id] = EncodeGeohash(p, 6).str();
    sids[id] = Sid{{static_cast<int>(rng.Below(2)), static_cast<int>(rng.Below(2)),
                    static_cast<int>(rng.Below(2))}};
  }
  auto pids = BuildPids(pois, gids, sids, 16);
  PidTrie trie = BuildTrie(pids, v);
  ASSERT_EQ(trie.size(), pois.size());
  // Completeness: each PID is accepted step by step and ends at its leaf.
  for (const auto& [id, pid] : pids) {
    auto toks = PidTokens(pid, v);
    for (size_t i = 0; i < toks.size(); ++i) {
      auto ch = trie.Children(std::span<const Token>(toks.data(), i));
      ASSERT_TRUE(std::binary_search(ch.begin(), ch.end(), toks[i]));
    }
    ASSERT_EQ(trie.Lookup(toks), id);
  }
  // Soundness: random walks through Children always land on a database POI.
  for (int walk = 0; walk < 500; ++walk) {
    std::vector<Token> path;
    while (static_cast<int>(path.size()) < trie.depth()) {
      auto ch = trie.Children(path);
      ASSERT_FALSE(ch.empty());
      path.push_back(ch[rng.Below(ch.size())]);
    }
    auto id = trie.Lookup(path);
    ASSERT_TRUE(id.has_value());
    ASSERT_EQ(PidTokens(pids.at(*id), v), path);
  }
  // Spatial prefix law.
  for (int i = 0; i < 2000; ++i) {
    const auto& a = pois[rng.Below(pois.size())];
    const auto& b = pois[rng.Below(pois.size())];
    int k = CommonPrefixLength(EncodeGeohash(a.location, 6),
                               EncodeGeohash(b.location, 6));
    auto ta = PidTokens(pids.at(a.poi_id), v), tb = PidTokens(pids.at(b.poi_id), v);
    int shared = 0;
    while (shared < trie.depth() && ta[shared] == tb[shared]) ++shared;
    ASSERT_GE(shared, k);
  }
}

TEST(PidTrieTest, IncrementalInsertKeepsUnrelatedPrefixes) {
  Rng rng(9);
  PidTrie trie(4);
  std::set<std::vector<Token>> used;
  auto random_pid = [&](Token first) {
    std::vector<Token> p = {first};
    for (int i = 0; i < 3; ++i) p.push_back(static_cast<Token>(rng.Below(20)));
    return p;
  };
  for (int i = 0; i < 500; ++i) {
    auto p = random_pid(static_cast<Token>(rng.Below(5)));
    if (used.insert(p).second) trie.Insert(p, "old" + std::to_string(i));
  }
  // Snapshot of every prefix under first tokens 0..4.
  std::vector<std::pair<std::vector<Token>, std::vector<Token>>> snapshot;
  for (Token a = 0; a < 5; ++a) {
    for (Token b = 0; b < 20; ++b) {
      std::vector<Token> prefix = {a, b};
      snapshot.push_back({prefix, trie.Children(prefix)});
    }
  }
  auto leaves_before = trie.Leaves(std::vector<Token>{});
  for (int i = 0; i < 1000; ++i) {
    auto p = random_pid(static_cast<Token>(5 + rng.Below(5)));
    if (used.insert(p).second) trie.Insert(p, "new" + std::to_string(i));
  }
  for (const auto& [prefix, children] : snapshot) {
    ASSERT_EQ(trie.Children(prefix), children);
  }
  for (const auto& leaf : leaves_before) ASSERT_TRUE(trie.Lookup(leaf).has_value());
}

TEST(PidFilesTest, PidMapAndTrieSnapshotRoundTrip) {
  Vocabulary v = SmallVocab();
  std::map<std::string, Pid> pids = {{"a", Pid{"wx4g0b", Sid{{1, 2, 3}}, 0}},
                                     {"b", Pid{"wx4g0b", Sid{{1, 2, 3}}, 1}},
                                     {"c", Pid{"s00000", Sid{{0, 0, 7}}, 0}}};
  auto dir = std::filesystem::temp_directory_path();
  std::string map_path = (dir / "geopid_pid_test.pidmap").string();
  std::string trie_path = (dir / "geopid_pid_test.trie").string();
  WritePidMap(map_path, pids, v.layout());
  PidLayout layout;
  EXPECT_EQ(ReadPidMap(map_path, &layout), pids);
  EXPECT_EQ(layout, v.layout());

  PidTrie trie = BuildTrie(pids, v);
  WriteTrieSnapshot(trie_path, trie, pids, v);
  PidTrie loaded = ReadTrieSnapshot(trie_path);
  EXPECT_EQ(loaded.Leaves(std::vector<Token>{}), trie.Leaves(std::vector<Token>{}));
  EXPECT_EQ(loaded.Lookup(PidTokens(pids.at("b"), v)), "b");

  std::ofstream(map_path) << "{\"format\":\"other\"}\n";
  EXPECT_THROW(ReadPidMap(map_path, nullptr), Error);
}

TEST(TrieSnapshotTest, SwapIsVisibleToNewReaders) {
  auto first = std::make_shared<PidTrie>(1);
  first->Insert(std::vector<Token>{1}, "a");
  TrieSnapshot snap(first);
  auto reader = snap.Get();
  auto second = std::make_shared<PidTrie>(*first);
  second->Insert(std::vector<Token>{2}, "b");
  snap.Swap(second);
  EXPECT_EQ(reader->size(), 1u);
  EXPECT_EQ(snap.Get()->size(), 2u);
}

}  // namespace
}  // namespace geopid
