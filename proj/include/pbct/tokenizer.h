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

#ifndef PBCT_TOKENIZER_H_
#define PBCT_TOKENIZER_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pbct {

inline constexpr std::string_view kMaskToken = "[MASK]";

// One token with its byte span in the source text and the index of the
// pre-tokenized word it belongs to.
struct Token {
  int id = 0;
  size_t begin = 0;
  size_t end = 0;
  size_t word = 0;
};

struct WordSpan {
  size_t begin = 0;
  size_t end = 0;
};

struct Tokenized {
  std::vector<Token> tokens;
  std::vector<WordSpan> words;
};

// Splits on whitespace and isolates ASCII punctuation; the literal
// placeholder "[MASK]" stays one word.
std::vector<WordSpan> PreTokenize(std::string_view text);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::string kind() const = 0;
  virtual Tokenized Tokenize(std::string_view text) const = 0;
  // Inverse of Tokenize up to Normalize().
  virtual std::string Decode(std::span<const int> ids) const = 0;
  virtual std::string Normalize(std::string_view text) const = 0;

  const std::vector<std::string>& vocab() const { return vocab_; }
  size_t vocab_size() const { return vocab_.size(); }
  int Lookup(std::string_view piece) const;

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  int mask_id() const { return mask_id_; }

 protected:
  void SetVocab(std::vector<std::string> vocab);

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  int pad_id_ = 0;
  int unk_id_ = 1;
  int cls_id_ = 2;
  int sep_id_ = 3;
  int mask_id_ = 4;
};

// Whole-word lowercase vocabulary for the toy encoder.
class WordTokenizer : public Tokenizer {
 public:
  explicit WordTokenizer(std::vector<std::string> vocab);

  // Special tokens first, then the sorted distinct lowercased words.
  static std::vector<std::string> BuildVocabulary(std::span<const std::string> texts);

  std::string kind() const override { return "word"; }
  Tokenized Tokenize(std::string_view text) const override;
  std::string Decode(std::span<const int> ids) const override;
  std::string Normalize(std::string_view text) const override;
};

// Greedy longest-match-first subword tokenizer over a BERT-style vocabulary
// file (one piece per line, continuation pieces prefixed with "##").
class WordPieceTokenizer : public Tokenizer {
 public:
  WordPieceTokenizer(std::vector<std::string> vocab, bool lowercase = true);
  static std::unique_ptr<WordPieceTokenizer> FromFile(const std::string& path,
                                                      bool lowercase = true);

  std::string kind() const override { return "wordpiece"; }
  Tokenized Tokenize(std::string_view text) const override;
  std::string Decode(std::span<const int> ids) const override;
  std::string Normalize(std::string_view text) const override;

 private:
  bool lowercase_;
};

}  // namespace pbct

#endif  // PBCT_TOKENIZER_H_
