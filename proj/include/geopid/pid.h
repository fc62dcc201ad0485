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

#ifndef GEOPID_PID_H_
#define GEOPID_PID_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geopid/poi.h"
#include "geopid/quantizer.h"
#include "geopid/vocab.h"

namespace geopid {

// Geo-semantic POI identifier: GID characters, SID indices, dedup code.
// gid is empty when explicit geographic identifiers are disabled.
struct Pid {
  std::string gid;
  Sid sid;
  int dedup = 0;

  friend bool operator==(const Pid&, const Pid&) = default;
  friend auto operator<=>(const Pid&, const Pid&) = default;
};

std::vector<Token> PidTokens(const Pid& pid, const Vocabulary& vocab);
// Inverse of PidTokens; nullopt when tokens are not a well-formed PID.
std::optional<Pid> PidFromTokens(std::span<const Token> tokens,
                                 const Vocabulary& vocab);
std::string PidString(const Pid& pid);

// POIs sharing (gid, sid) get dedup codes 0, 1, 2, ... in ascending poi_id
// order. Throws Error(kCapacity) naming the cell when a group reaches
// dedup_max. gids may be empty to build SID-only identifiers.
std::map<std::string, Pid> BuildPids(std::span<const PoiRecord> pois,
                                     const std::map<std::string, std::string>& gids,
                                     const std::map<std::string, Sid>& sids,
                                     int dedup_max);

// Prefix tree over fixed-length PID token sequences. Children are kept sorted
// by token id. Concurrent readers are safe; Insert needs exclusive access.
class PidTrie {
 public:
  explicit PidTrie(int depth);

  int depth() const { return depth_; }
  size_t size() const { return poi_ids_.size(); }

  // Throws Error(kConflict) on a duplicate PID and kInvalidArgument on a
  // length mismatch.
  void Insert(std::span<const Token> pid, const std::string& poi_id);

  // Tokens allowed after prefix; empty when prefix is absent or a full PID.
  std::vector<Token> Children(std::span<const Token> prefix) const;

  bool HasPrefix(std::span<const Token> prefix) const;
  std::optional<std::string> Lookup(std::span<const Token> pid) const;
  // Number of leaves below prefix (0 when absent).
  size_t LeafCount(std::span<const Token> prefix) const;
  // Every complete PID under prefix, in token order.
  std::vector<std::vector<Token>> Leaves(std::span<const Token> prefix) const;
  // Depths of every node with more than one child, ascending.
  std::vector<int> BranchDepths() const;

 private:
  struct Node {
    std::vector<std::pair<Token, int>> children;  // sorted by token
    int leaf = -1;                                // index into poi_ids_
    size_t leaf_count = 0;
  };

  int Walk(std::span<const Token> prefix) const;
  int ChildOf(int node, Token t) const;

  int depth_;
  std::vector<Node> nodes_;
  std::vector<std::string> poi_ids_;
};

// Holds the live trie for readers while a writer prepares a replacement.
class TrieSnapshot {
 public:
  explicit TrieSnapshot(std::shared_ptr<const PidTrie> trie)
      : trie_(std::move(trie)) {}

  std::shared_ptr<const PidTrie> Get() const {
    std::lock_guard<std::mutex> lock(mu_);
    return trie_;
  }
  void Swap(std::shared_ptr<const PidTrie> next) {
    std::lock_guard<std::mutex> lock(mu_);
    trie_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const PidTrie> trie_;
};

PidTrie BuildTrie(const std::map<std::string, Pid>& pids, const Vocabulary& vocab);

inline constexpr int kPidFileVersion = 1;

// pid-map file: JSON lines, header then {"poi_id","gid","sid","dedup"}.
void WritePidMap(const std::string& path, const std::map<std::string, Pid>& pids,
                 const PidLayout& layout, const std::string& config_json = "{}");
std::map<std::string, Pid> ReadPidMap(const std::string& path, PidLayout* layout);

// Trie snapshot file: header with layout and vocabulary table, then one
// {"poi_id","tokens"} record per PID. The trie is rebuilt on load; vocab,
// when given, receives the stored vocabulary.
void WriteTrieSnapshot(const std::string& path, const PidTrie& trie,
                       const std::map<std::string, Pid>& pids,
                       const Vocabulary& vocab, const std::string& config_json = "{}");
PidTrie ReadTrieSnapshot(const std::string& path, Vocabulary* vocab = nullptr);

}  // namespace geopid

#endif  // GEOPID_PID_H_
