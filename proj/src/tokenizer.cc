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

#include "pbct/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "pbct/status.h"
#include "pbct/utf8.h"

namespace pbct {
namespace {

bool IsAsciiPunct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

const std::vector<std::string>& SpecialTokens() {
  static const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                     std::string(kMaskToken)};
  return kSpecials;
}

std::string JoinWords(std::string_view text, const std::vector<WordSpan>& words, bool lowercase) {
  std::string out;
  for (const WordSpan& w : words) {
    if (!out.empty()) out += ' ';
    std::string_view piece = text.substr(w.begin, w.end - w.begin);
    out += (lowercase && piece != kMaskToken) ? utf8::AsciiLower(piece) : std::string(piece);
  }
  return out;
}

}  // namespace

std::vector<WordSpan> PreTokenize(std::string_view text) {
  std::vector<WordSpan> words;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (utf8::IsSpace(c)) {
      ++i;
      continue;
    }
    if (text.substr(i, kMaskToken.size()) == kMaskToken) {
      words.push_back({i, i + kMaskToken.size()});
      i += kMaskToken.size();
      continue;
    }
    if (IsAsciiPunct(c)) {
      words.push_back({i, i + 1});
      ++i;
      continue;
    }
    size_t start = i;
    while (i < n) {
      unsigned char d = static_cast<unsigned char>(text[i]);
      if (utf8::IsSpace(d) || IsAsciiPunct(d)) break;
      ++i;
    }
    words.push_back({start, i});
  }
  return words;
}

int Tokenizer::Lookup(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  return it == index_.end() ? -1 : it->second;
}

void Tokenizer::SetVocab(std::vector<std::string> vocab) {
  vocab_ = std::move(vocab);
  index_.clear();
  for (size_t i = 0; i < vocab_.size(); ++i) {
    index_.emplace(vocab_[i], static_cast<int>(i));
  }
  auto need = [&](const std::string& name) {
    int id = Lookup(name);
    if (id < 0) throw ConfigError("vocabulary lacks special token " + name);
    return id;
  };
  pad_id_ = need("[PAD]");
  unk_id_ = need("[UNK]");
  cls_id_ = need("[CLS]");
  sep_id_ = need("[SEP]");
  mask_id_ = need(std::string(kMaskToken));
}

WordTokenizer::WordTokenizer(std::vector<std::string> vocab) { SetVocab(std::move(vocab)); }

std::vector<std::string> WordTokenizer::BuildVocabulary(std::span<const std::string> texts) {
  std::set<std::string> words;
  for (const std::string& t : texts) {
    for (const WordSpan& w : PreTokenize(t)) {
      std::string_view piece = std::string_view(t).substr(w.begin, w.end - w.begin);
      if (piece == kMaskToken) continue;
      words.insert(utf8::AsciiLower(piece));
    }
  }
  std::vector<std::string> vocab = SpecialTokens();
  for (const std::string& w : words) {
    if (std::find(vocab.begin(), vocab.end(), w) == vocab.end()) {
      vocab.push_back(w);
    }
  }
  return vocab;
}

Tokenized WordTokenizer::Tokenize(std::string_view text) const {
  Tokenized out;
  out.words = PreTokenize(text);
  for (size_t w = 0; w < out.words.size(); ++w) {
    std::string_view piece = text.substr(out.words[w].begin, out.words[w].end - out.words[w].begin);
    int id = piece == kMaskToken ? mask_id_ : Lookup(utf8::AsciiLower(piece));
    out.tokens.push_back({id < 0 ? unk_id_ : id, out.words[w].begin, out.words[w].end, w});
  }
  return out;
}

std::string WordTokenizer::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ' ';
    out += vocab_.at(static_cast<size_t>(id));
  }
  return out;
}

std::string WordTokenizer::Normalize(std::string_view text) const {
  std::vector<WordSpan> words = PreTokenize(text);
  std::string out;
  for (const WordSpan& w : words) {
    if (!out.empty()) out += ' ';
    std::string piece(text.substr(w.begin, w.end - w.begin));
    if (piece != kMaskToken) piece = utf8::AsciiLower(piece);
    out += Lookup(piece) < 0 ? "[UNK]" : piece;
  }
  return out;
}

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab, bool lowercase)
    : lowercase_(lowercase) {
  SetVocab(std::move(vocab));
}

std::unique_ptr<WordPieceTokenizer> WordPieceTokenizer::FromFile(const std::string& path,
                                                                 bool lowercase) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocabulary " + path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return std::make_unique<WordPieceTokenizer>(std::move(vocab), lowercase);
}

Tokenized WordPieceTokenizer::Tokenize(std::string_view text) const {
  constexpr size_t kMaxWordBytes = 100;
  Tokenized out;
  out.words = PreTokenize(text);
  for (size_t w = 0; w < out.words.size(); ++w) {
    size_t wb = out.words[w].begin;
    size_t we = out.words[w].end;
    std::string_view raw = text.substr(wb, we - wb);
    if (raw == kMaskToken) {
      out.tokens.push_back({mask_id_, wb, we, w});
      continue;
    }
    std::string word = lowercase_ ? utf8::AsciiLower(raw) : std::string(raw);
    if (word.size() > kMaxWordBytes) {
      out.tokens.push_back({unk_id_, wb, we, w});
      continue;
    }
    std::vector<Token> pieces;
    size_t start = 0;
    bool bad = false;
    while (start < word.size()) {
      size_t end = word.size();
      int found = -1;
      while (end > start) {
        std::string sub = word.substr(start, end - start);
        if (start > 0) sub = "##" + sub;
        found = Lookup(sub);
        if (found >= 0) break;
        // Step back over whole code points only.
        do {
          --end;
        } while (end > start && (static_cast<unsigned char>(word[end]) & 0xC0) == 0x80);
      }
      if (found < 0) {
        bad = true;
        break;
      }
      pieces.push_back({found, wb + start, wb + end, w});
      start = end;
    }
    if (bad) {
      out.tokens.push_back({unk_id_, wb, we, w});
    } else {
      out.tokens.insert(out.tokens.end(), pieces.begin(), pieces.end());
    }
  }
  return out;
}

std::string WordPieceTokenizer::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    const std::string& piece = vocab_.at(static_cast<size_t>(id));
    if (piece.rfind("##", 0) == 0) {
      out += piece.substr(2);
    } else {
      if (!out.empty()) out += ' ';
      out += piece;
    }
  }
  return out;
}

std::string WordPieceTokenizer::Normalize(std::string_view text) const {
  return JoinWords(text, PreTokenize(text), lowercase_);
}

}  // namespace pbct
