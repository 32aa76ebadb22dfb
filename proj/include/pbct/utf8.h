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

#ifndef PBCT_UTF8_H_
#define PBCT_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pbct::utf8 {

// Byte offset of every code point boundary in `text`; the result has
// CodepointCount(text) + 1 entries, ending with text.size(). Invalid lead
// bytes count as single-byte code points.
std::vector<size_t> CodepointOffsets(std::string_view text);

size_t CodepointCount(std::string_view text);

// Substring by code point range [begin, end).
std::string Substr(std::string_view text, size_t begin, size_t end);

// Byte offset -> index of the code point containing it.
std::vector<size_t> ByteToCodepoint(std::string_view text);

bool IsSpace(unsigned char c);
std::string AsciiLower(std::string_view text);
std::string Trim(std::string_view text);

// Byte offset of the first whole-word, ASCII case-insensitive occurrence of
// `word` in `text`, or npos. Word characters are alphanumerics, '_' and all
// non-ASCII bytes.
size_t FindWord(std::string_view text, std::string_view word);

}  // namespace pbct::utf8

#endif  // PBCT_UTF8_H_
