// Copyright 2026 The PBCT Authors.
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

#include "pbct/utf8.h"

#include <cctype>

namespace pbct::utf8 {
namespace {

size_t SequenceLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

std::vector<size_t> CodepointOffsets(std::string_view text) {
  std::vector<size_t> offsets;
  offsets.reserve(text.size() + 1);
  size_t i = 0;
  while (i < text.size()) {
    offsets.push_back(i);
    size_t len = SequenceLength(static_cast<unsigned char>(text[i]));
    // Truncated sequences count byte by byte.
    for (size_t k = 1; k < len; ++k) {
      if (i + k >= text.size() || (static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    i += len;
  }
  offsets.push_back(text.size());
  return offsets;
}

size_t CodepointCount(std::string_view text) { return CodepointOffsets(text).size() - 1; }

std::string Substr(std::string_view text, size_t begin, size_t end) {
  std::vector<size_t> off = CodepointOffsets(text);
  size_t n = off.size() - 1;
  if (begin > n) begin = n;
  if (end > n) end = n;
  if (end < begin) end = begin;
  return std::string(text.substr(off[begin], off[end] - off[begin]));
}

std::vector<size_t> ByteToCodepoint(std::string_view text) {
  std::vector<size_t> off = CodepointOffsets(text);
  std::vector<size_t> map(text.size() + 1, 0);
  for (size_t cp = 0; cp + 1 < off.size(); ++cp) {
    for (size_t b = off[cp]; b < off[cp + 1]; ++b) map[b] = cp;
  }
  map[text.size()] = off.size() - 1;
  return map;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string Trim(std::string_view text) {
  size_t b = 0;
  size_t e = text.size();
  while (b < e && IsSpace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && IsSpace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

size_t FindWord(std::string_view text, std::string_view word) {
  if (word.empty()) return std::string_view::npos;
  std::string lt = AsciiLower(text);
  std::string lw = AsciiLower(word);
  auto is_word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '_'; };
  size_t pos = 0;
  while ((pos = lt.find(lw, pos)) != std::string::npos) {
    bool left = pos == 0 || !is_word(static_cast<unsigned char>(lt[pos - 1]));
    size_t end = pos + lw.size();
    bool right = end >= lt.size() || !is_word(static_cast<unsigned char>(lt[end]));
    if (left && right) return pos;
    ++pos;
  }
  return std::string_view::npos;
}

}  // namespace pbct::utf8
