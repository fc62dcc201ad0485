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

#include "geopid/vocab.h"

#include <algorithm>
#include <cctype>

#include "geopid/error.h"
#include "geopid/geocode.h"

namespace geopid {

void PidLayout::Validate() const {
  Require(gid_length >= 0 && gid_length <= kMaxGeohashLength,
          "gid_length must be in [0, 12]");
  Require(sid_levels >= 1, "sid_levels must be >= 1");
  Require(codebook_size >= 1, "codebook_size must be >= 1");
  Require(dedup_max >= 1, "dedup_max must be >= 1");
}

namespace {

const char* const kMarkerNames[] = {"<pad>", "<hist>", "<query>", "<target>"};

unsigned char Lower(char c) {
  return static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace

void Vocabulary::Init(const PidLayout& layout, std::string chars) {
  layout.Validate();
  layout_ = layout;
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  text_chars_ = std::move(chars);
  std::fill(std::begin(char_to_token_), std::end(char_to_token_), kUnknownText);
  for (size_t i = 0; i < text_chars_.size(); ++i) {
    char_to_token_[static_cast<unsigned char>(text_chars_[i])] =
        kUnknownText + 1 + static_cast<int>(i);
  }
  geo_begin_ = kUnknownText + 1 + static_cast<int>(text_chars_.size());
  sid_begin_ = geo_begin_ + static_cast<int>(kGeohashAlphabet.size());
  dedup_begin_ = sid_begin_ + layout_.sid_levels * layout_.codebook_size;
}

Vocabulary Vocabulary::Build(const PidLayout& layout,
                             std::span<const std::string> text_corpus) {
  std::string chars;
  for (const auto& s : text_corpus) {
    for (char c : s) chars.push_back(static_cast<char>(Lower(c)));
  }
  Vocabulary v;
  v.Init(layout, std::move(chars));
  return v;
}

Vocabulary Vocabulary::FromTable(const PidLayout& layout,
                                 const std::vector<std::string>& table) {
  // Text characters sit between the unknown token and the first geo symbol.
  const int geo_count = static_cast<int>(kGeohashAlphabet.size());
  const int fixed = kUnknownText + 1 + geo_count +
                    layout.sid_levels * layout.codebook_size + layout.dedup_max;
  if (static_cast<int>(table.size()) < fixed) {
    Throw(ErrorCode::kFormat, "vocabulary table too short");
  }
  const int n_chars = static_cast<int>(table.size()) - fixed;
  std::string chars;
  for (int i = 0; i < n_chars; ++i) {
    const std::string& entry = table[kUnknownText + 1 + i];
    if (entry.size() != 1) Throw(ErrorCode::kFormat, "bad text token '" + entry + "'");
    chars.push_back(entry[0]);
  }
  Vocabulary v;
  v.Init(layout, chars);
  if (v.Table() != table) {
    Throw(ErrorCode::kFormat, "vocabulary table does not match its layout");
  }
  return v;
}

TokenRegion Vocabulary::RegionOf(Token t) const {
  Require(t >= 0 && t < size(), "token id out of range: " + std::to_string(t));
  if (t < kUnknownText) return TokenRegion::kMarker;
  if (t < geo_begin_) return TokenRegion::kText;
  if (t < sid_begin_) return TokenRegion::kGeo;
  if (t < dedup_begin_) return TokenRegion::kSid;
  return TokenRegion::kDedup;
}

Token Vocabulary::GeoToken(char c) const {
  const int idx = GeohashCharIndex(c);
  if (idx < 0) Throw(ErrorCode::kDecode, std::string("not a geohash symbol: ") + c);
  return geo_begin_ + idx;
}

char Vocabulary::GeoChar(Token t) const {
  Require(RegionOf(t) == TokenRegion::kGeo, "not a geo token");
  return kGeohashAlphabet[t - geo_begin_];
}

Token Vocabulary::SidToken(int level, int index) const {
  Require(level >= 0 && level < layout_.sid_levels, "SID level out of range");
  Require(index >= 0 && index < layout_.codebook_size, "SID index out of range");
  return sid_begin_ + level * layout_.codebook_size + index;
}

int Vocabulary::SidLevel(Token t) const {
  Require(RegionOf(t) == TokenRegion::kSid, "not a SID token");
  return (t - sid_begin_) / layout_.codebook_size;
}

int Vocabulary::SidIndex(Token t) const {
  Require(RegionOf(t) == TokenRegion::kSid, "not a SID token");
  return (t - sid_begin_) % layout_.codebook_size;
}

Token Vocabulary::DedupToken(int code) const {
  Require(code >= 0 && code < layout_.dedup_max, "dedup code out of range");
  return dedup_begin_ + code;
}

int Vocabulary::DedupCode(Token t) const {
  Require(RegionOf(t) == TokenRegion::kDedup, "not a dedup token");
  return t - dedup_begin_;
}

std::pair<Token, Token> Vocabulary::PositionRange(int position) const {
  Require(position >= 0 && position < layout_.pid_length(),
          "PID position out of range");
  if (position < layout_.gid_length) return {geo_begin_, sid_begin_};
  const int level = position - layout_.gid_length;
  if (level < layout_.sid_levels) {
    const Token begin = sid_begin_ + level * layout_.codebook_size;
    return {begin, begin + layout_.codebook_size};
  }
  return {dedup_begin_, dedup_begin_ + layout_.dedup_max};
}

std::vector<Token> Vocabulary::EncodeText(std::string_view text) const {
  std::vector<Token> out;
  out.reserve(text.size());
  for (char c : text) out.push_back(char_to_token_[Lower(c)]);
  return out;
}

std::vector<Token> Vocabulary::EncodeGeohash(std::string_view gid) const {
  std::vector<Token> out;
  out.reserve(gid.size());
  for (char c : gid) out.push_back(GeoToken(c));
  return out;
}

std::string Vocabulary::TokenString(Token t) const {
  switch (RegionOf(t)) {
    case TokenRegion::kMarker:
      return kMarkerNames[t];
    case TokenRegion::kText:
      return t == kUnknownText ? "<unk>"
                               : std::string(1, text_chars_[t - kUnknownText - 1]);
    case TokenRegion::kGeo:
      return std::string("g:") + GeoChar(t);
    case TokenRegion::kSid:
      return "s" + std::to_string(SidLevel(t) + 1) + ":" +
             std::to_string(SidIndex(t));
    case TokenRegion::kDedup:
      return "d:" + std::to_string(DedupCode(t));
  }
  return "?";
}

std::vector<std::string> Vocabulary::Table() const {
  std::vector<std::string> table;
  table.reserve(size());
  for (Token t = 0; t < size(); ++t) table.push_back(TokenString(t));
  return table;
}

}  // namespace geopid
