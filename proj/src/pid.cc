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

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "geopid/error.h"
#include "geopid/geocode.h"

namespace geopid {

using nlohmann::json;

std::vector<Token> PidTokens(const Pid& pid, const Vocabulary& vocab) {
  const PidLayout& layout = vocab.layout();
  Require(static_cast<int>(pid.gid.size()) == layout.gid_length,
          "PID gid length does not match the layout");
  Require(static_cast<int>(pid.sid.indices.size()) == layout.sid_levels,
          "PID sid length does not match the layout");
  std::vector<Token> out = vocab.EncodeGeohash(pid.gid);
  for (int l = 0; l < layout.sid_levels; ++l) {
    out.push_back(vocab.SidToken(l, pid.sid.indices[l]));
  }
  out.push_back(vocab.DedupToken(pid.dedup));
  return out;
}

std::optional<Pid> PidFromTokens(std::span<const Token> tokens,
                                 const Vocabulary& vocab) {
  const PidLayout& layout = vocab.layout();
  if (static_cast<int>(tokens.size()) != layout.pid_length()) return std::nullopt;
  for (int i = 0; i < layout.pid_length(); ++i) {
    auto [lo, hi] = vocab.PositionRange(i);
    if (tokens[i] < lo || tokens[i] >= hi) return std::nullopt;
  }
  Pid pid;
  for (int i = 0; i < layout.gid_length; ++i) pid.gid.push_back(vocab.GeoChar(tokens[i]));
  for (int l = 0; l < layout.sid_levels; ++l) {
    pid.sid.indices.push_back(vocab.SidIndex(tokens[layout.gid_length + l]));
  }
  pid.dedup = vocab.DedupCode(tokens.back());
  return pid;
}

std::string PidString(const Pid& pid) {
  std::string s = pid.gid;
  for (int idx : pid.sid.indices) s += "-" + std::to_string(idx);
  return s + "#" + std::to_string(pid.dedup);
}

std::map<std::string, Pid> BuildPids(std::span<const PoiRecord> pois,
                                     const std::map<std::string, std::string>& gids,
                                     const std::map<std::string, Sid>& sids,
                                     int dedup_max) {
  Require(dedup_max >= 1, "dedup_max must be >= 1");
  std::map<std::pair<std::string, Sid>, std::vector<std::string>> groups;
  for (const auto& p : pois) {
    auto g = gids.find(p.poi_id);
    auto s = sids.find(p.poi_id);
    Require(g != gids.end(), "missing GID for " + p.poi_id);
    Require(s != sids.end(), "missing SID for " + p.poi_id);
    groups[{g->second, s->second}].push_back(p.poi_id);
  }
  std::map<std::string, Pid> out;
  for (auto& [key, ids] : groups) {
    if (static_cast<int>(ids.size()) > dedup_max) {
      Throw(ErrorCode::kCapacity,
            "PID collision capacity exceeded: " + std::to_string(ids.size()) +
                " POIs share cell " + PidString(Pid{key.first, key.second, 0}) +
                " (dedup_max=" + std::to_string(dedup_max) + ")");
    }
    std::sort(ids.begin(), ids.end());
    for (size_t i = 0; i < ids.size(); ++i) {
      out[ids[i]] = Pid{key.first, key.second, static_cast<int>(i)};
    }
  }
  return out;
}

PidTrie::PidTrie(int depth) : depth_(depth), nodes_(1) {
  Require(depth >= 1, "trie depth must be >= 1");
}

int PidTrie::ChildOf(int node, Token t) const {
  const auto& ch = nodes_[node].children;
  auto it = std::lower_bound(ch.begin(), ch.end(), t,
                             [](const auto& e, Token v) { return e.first < v; });
  return (it != ch.end() && it->first == t) ? it->second : -1;
}

int PidTrie::Walk(std::span<const Token> prefix) const {
  if (static_cast<int>(prefix.size()) > depth_) return -1;
  int node = 0;
  for (Token t : prefix) {
    node = ChildOf(node, t);
    if (node < 0) return -1;
  }
  return node;
}

void PidTrie::Insert(std::span<const Token> pid, const std::string& poi_id) {
  Require(static_cast<int>(pid.size()) == depth_,
          "PID length " + std::to_string(pid.size()) + " != trie depth " +
              std::to_string(depth_));
  if (Walk(pid) >= 0) {
    Throw(ErrorCode::kConflict, "duplicate PID for " + poi_id);
  }
  int node = 0;
  std::vector<int> path = {0};
  for (Token t : pid) {
    int next = ChildOf(node, t);
    if (next < 0) {
      next = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      auto& ch = nodes_[node].children;
      auto it = std::lower_bound(ch.begin(), ch.end(), t,
                                 [](const auto& e, Token v) { return e.first < v; });
      ch.insert(it, {t, next});
    }
    node = next;
    path.push_back(node);
  }
  nodes_[node].leaf = static_cast<int>(poi_ids_.size());
  poi_ids_.push_back(poi_id);
  for (int n : path) ++nodes_[n].leaf_count;
}

std::vector<Token> PidTrie::Children(std::span<const Token> prefix) const {
  std::vector<Token> out;
  const int node = Walk(prefix);
  if (node < 0) return out;
  out.reserve(nodes_[node].children.size());
  for (const auto& [t, child] : nodes_[node].children) out.push_back(t);
  return out;
}

bool PidTrie::HasPrefix(std::span<const Token> prefix) const {
  return Walk(prefix) >= 0;
}

std::optional<std::string> PidTrie::Lookup(std::span<const Token> pid) const {
  if (static_cast<int>(pid.size()) != depth_) return std::nullopt;
  const int node = Walk(pid);
  if (node < 0 || nodes_[node].leaf < 0) return std::nullopt;
  return poi_ids_[nodes_[node].leaf];
}

size_t PidTrie::LeafCount(std::span<const Token> prefix) const {
  const int node = Walk(prefix);
  return node < 0 ? 0 : nodes_[node].leaf_count;
}

std::vector<std::vector<Token>> PidTrie::Leaves(std::span<const Token> prefix) const {
  std::vector<std::vector<Token>> out;
  const int start = Walk(prefix);
  if (start < 0) return out;
  std::vector<Token> path(prefix.begin(), prefix.end());
  // Iterative DFS keeps children in token order.
  struct Frame {
    int node;
    size_t next;
  };
  std::vector<Frame> stack = {{start, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Node& n = nodes_[f.node];
    if (f.next == 0 && n.leaf >= 0) out.push_back(path);
    if (f.next < n.children.size()) {
      const auto [t, child] = n.children[f.next++];
      path.push_back(t);
      stack.push_back({child, 0});
    } else {
      stack.pop_back();
      if (static_cast<int>(path.size()) > static_cast<int>(prefix.size())) path.pop_back();
    }
  }
  return out;
}

std::vector<int> PidTrie::BranchDepths() const {
  std::vector<int> out;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [node, d] = stack.back();
    stack.pop_back();
    if (nodes_[node].children.size() > 1) out.push_back(d);
    for (const auto& [t, child] : nodes_[node].children) stack.push_back({child, d + 1});
  }
  std::sort(out.begin(), out.end());
  return out;
}

PidTrie BuildTrie(const std::map<std::string, Pid>& pids, const Vocabulary& vocab) {
  PidTrie trie(vocab.layout().pid_length());
  for (const auto& [poi_id, pid] : pids) trie.Insert(PidTokens(pid, vocab), poi_id);
  return trie;
}

namespace {

json LayoutJson(const PidLayout& l) {
  return {{"gid_length", l.gid_length},
          {"sid_levels", l.sid_levels},
          {"codebook_size", l.codebook_size},
          {"dedup_max", l.dedup_max}};
}

PidLayout LayoutFromJson(const json& j) {
  PidLayout l;
  l.gid_length = j.at("gid_length").get<int>();
  l.sid_levels = j.at("sid_levels").get<int>();
  l.codebook_size = j.at("codebook_size").get<int>();
  l.dedup_max = j.at("dedup_max").get<int>();
  l.Validate();
  return l;
}

json ReadHeader(std::ifstream& in, const std::string& path, const char* format) {
  std::string line;
  if (!std::getline(in, line)) Throw(ErrorCode::kFormat, "empty file: " + path);
  try {
    json h = json::parse(line);
    if (h.value("format", "") != format || h.value("version", 0) != kPidFileVersion) {
      Throw(ErrorCode::kFormat, path + ": expected " + format + " version " +
                                    std::to_string(kPidFileVersion));
    }
    return h;
  } catch (const json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": bad header: " + e.what());
  }
}

}  // namespace

void WritePidMap(const std::string& path, const std::map<std::string, Pid>& pids,
                 const PidLayout& layout, const std::string& config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot write " + path);
  json header = {{"format", "geopid.pidmap"},
                 {"version", kPidFileVersion},
                 {"layout", LayoutJson(layout)},
                 {"count", pids.size()},
                 {"config", json::parse(config_json)}};
  out << header.dump() << '\n';
  for (const auto& [poi_id, pid] : pids) {
    out << json{{"poi_id", poi_id},
                {"gid", pid.gid},
                {"sid", pid.sid.indices},
                {"dedup", pid.dedup}}
               .dump()
        << '\n';
  }
  if (!out) Throw(ErrorCode::kIo, "write failed: " + path);
}

std::map<std::string, Pid> ReadPidMap(const std::string& path, PidLayout* layout) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot read " + path);
  json header = ReadHeader(in, path, "geopid.pidmap");
  std::map<std::string, Pid> out;
  try {
    if (layout) *layout = LayoutFromJson(header.at("layout"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      Pid pid{rec.at("gid").get<std::string>(),
              Sid{rec.at("sid").get<std::vector<int>>()},
              rec.at("dedup").get<int>()};
      out[rec.at("poi_id").get<std::string>()] = std::move(pid);
    }
  } catch (const json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": " + e.what());
  }
  return out;
}

void WriteTrieSnapshot(const std::string& path, const PidTrie& trie,
                       const std::map<std::string, Pid>& pids,
                       const Vocabulary& vocab, const std::string& config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot write " + path);
  json header = {{"format", "geopid.trie"},
                 {"version", kPidFileVersion},
                 {"depth", trie.depth()},
                 {"layout", LayoutJson(vocab.layout())},
                 {"vocabulary", vocab.Table()},
                 {"count", pids.size()},
                 {"config", json::parse(config_json)}};
  out << header.dump() << '\n';
  for (const auto& [poi_id, pid] : pids) {
    out << json{{"poi_id", poi_id}, {"tokens", PidTokens(pid, vocab)}}.dump() << '\n';
  }
  if (!out) Throw(ErrorCode::kIo, "write failed: " + path);
}

PidTrie ReadTrieSnapshot(const std::string& path, Vocabulary* vocab) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot read " + path);
  json header = ReadHeader(in, path, "geopid.trie");
  try {
    PidTrie trie(header.at("depth").get<int>());
    if (vocab != nullptr) {
      *vocab = Vocabulary::FromTable(LayoutFromJson(header.at("layout")),
                                     header.at("vocabulary").get<std::vector<std::string>>());
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      trie.Insert(rec.at("tokens").get<std::vector<Token>>(),
                  rec.at("poi_id").get<std::string>());
    }
    return trie;
  } catch (const json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": " + e.what());
  }
}

}  // namespace geopid
