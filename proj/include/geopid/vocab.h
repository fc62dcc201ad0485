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

#ifndef GEOPID_VOCAB_H_
#define GEOPID_VOCAB_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geopid {

using Token = int32_t;

enum class TokenRegion { kMarker, kText, kGeo, kSid, kDedup };

// Shape of the identifier part of the vocabulary.
struct PidLayout {
  int gid_length = 6;  // 0 disables explicit geographic identifiers
  int sid_levels = 3;
  int codebook_size = 128;
  int dedup_max = 16;

  int pid_length() const { return gid_length + sid_levels + 1; }
  void Validate() const;
  friend bool operator==(const PidLayout&, const PidLayout&) = default;
};

// Disjoint token regions, in id order:
//   markers  pad, history-separator, query-start, target-start
//   text     unknown-character, then the corpus characters (sorted)
//   geo      the 32 geohash symbols, shared by every GID position
//   sid      level-specific: level l index m -> sid_begin + l * M + m
//   dedup    dedup_max tokens
class Vocabulary {
 public:
  static constexpr Token kPad = 0;
  static constexpr Token kHistorySep = 1;
  static constexpr Token kQueryStart = 2;
  static constexpr Token kTargetStart = 3;
  static constexpr Token kUnknownText = 4;

  Vocabulary() = default;
  // Text characters are the lowercase characters seen in the corpus.
  static Vocabulary Build(const PidLayout& layout,
                          std::span<const std::string> text_corpus);
  // Rebuild from a serialized table (token strings in id order).
  static Vocabulary FromTable(const PidLayout& layout,
                              const std::vector<std::string>& table);

  const PidLayout& layout() const { return layout_; }
  int size() const { return dedup_begin_ + layout_.dedup_max; }

  TokenRegion RegionOf(Token t) const;
  Token GeoToken(char c) const;  // throws on a non-geohash character
  char GeoChar(Token t) const;
  Token SidToken(int level, int index) const;
  int SidLevel(Token t) const;
  int SidIndex(Token t) const;
  Token DedupToken(int code) const;
  int DedupCode(Token t) const;

  // Valid token range [begin, end) for a PID position: geo for the first
  // gid_length positions, the level's SID tokens next, dedup last.
  std::pair<Token, Token> PositionRange(int position) const;

  std::vector<Token> EncodeText(std::string_view text) const;
  std::vector<Token> EncodeGeohash(std::string_view gid) const;

  std::string TokenString(Token t) const;
  std::vector<std::string> Table() const;

  int text_begin() const { return kUnknownText; }
  int geo_begin() const { return geo_begin_; }
  int sid_begin() const { return sid_begin_; }
  int dedup_begin() const { return dedup_begin_; }

 private:
  void Init(const PidLayout& layout, std::string chars);

  PidLayout layout_;
  std::string text_chars_;  // sorted, unique
  int char_to_token_[256] = {};
  int geo_begin_ = 0;
  int sid_begin_ = 0;
  int dedup_begin_ = 0;
};

}  // namespace geopid

#endif  // GEOPID_VOCAB_H_
