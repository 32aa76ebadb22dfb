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

#include "pbct/encoder.h"

#include <algorithm>

#include "pbct/status.h"
#include "pbct/utf8.h"

namespace pbct {

TransformerEncoder::TransformerEncoder(std::string kind, std::unique_ptr<Tokenizer> tokenizer,
                                       std::unique_ptr<Transformer> body)
    : kind_(std::move(kind)), tokenizer_(std::move(tokenizer)), body_(std::move(body)) {
  if (static_cast<int>(tokenizer_->vocab_size()) != body_->config().vocab_size) {
    throw ConfigError("encoder: tokenizer has " + std::to_string(tokenizer_->vocab_size()) +
                      " entries but the model expects " +
                      std::to_string(body_->config().vocab_size));
  }
}

ad::Var TransformerEncoder::Encode(std::span<const int> ids) const { return body_->Encode(ids); }

ad::Var TransformerEncoder::MaskLogits(const ad::Var& hidden_row) const {
  if (hidden_row->cols() != hidden_size()) {
    throw ConfigError("encoder: hidden row has the wrong dimension");
  }
  return body_->MaskLogits(hidden_row);
}

std::vector<ad::Parameter*> TransformerEncoder::Parameters() const { return body_->Parameters(); }

std::unique_ptr<TransformerEncoder> MakeToyEncoder(std::span<const std::string> texts,
                                                   const ToyEncoderOptions& options) {
  std::vector<std::string> all(texts.begin(), texts.end());
  all.emplace_back(kPromptTemplate);
  all.emplace_back(kLabelSeparator);
  return MakeToyEncoderFromVocab(WordTokenizer::BuildVocabulary(all), options);
}

std::unique_ptr<TransformerEncoder> MakeToyEncoderFromVocab(std::vector<std::string> vocab,
                                                            const ToyEncoderOptions& options) {
  auto tokenizer = std::make_unique<WordTokenizer>(std::move(vocab));
  TransformerConfig cfg;
  cfg.vocab_size = static_cast<int>(tokenizer->vocab_size());
  cfg.hidden = options.hidden;
  cfg.layers = options.layers;
  cfg.heads = options.heads;
  cfg.intermediate = options.intermediate;
  cfg.max_positions = options.max_positions;
  auto body = std::make_unique<Transformer>(cfg, options.seed, options.init_std);
  return std::make_unique<TransformerEncoder>("toy", std::move(tokenizer), std::move(body));
}

std::unique_ptr<TransformerEncoder> LoadPretrainedEncoder(const std::string& weights,
                                                          const std::string& vocab, int heads,
                                                          bool lowercase) {
  auto tokenizer = WordPieceTokenizer::FromFile(vocab, lowercase);
  auto body = LoadSafetensorsBert(weights, heads);
  return std::make_unique<TransformerEncoder>("pretrained", std::move(tokenizer), std::move(body));
}

PromptEncoding BuildPrompt(const EventMention& mention, const Encoder& encoder) {
  const Tokenizer& tok = encoder.tokenizer();
  if (utf8::Trim(mention.text).empty()) {
    throw ConfigError("mention " + mention.id + ": empty text");
  }
  Tokenized templ = tok.Tokenize(kPromptTemplate);
  Tokenized body = tok.Tokenize(mention.text);
  if (body.tokens.empty()) {
    throw ConfigError("mention " + mention.id + ": no tokens");
  }

  PromptEncoding pe;
  pe.token_ids.push_back(tok.cls_id());
  for (const Token& t : templ.tokens) {
    if (t.id == tok.mask_id()) pe.mask_position = static_cast<int>(pe.token_ids.size());
    pe.token_ids.push_back(t.id);
  }
  if (pe.mask_position < 0) throw ConfigError("prompt template lost its mask");

  const int budget = encoder.max_length() - static_cast<int>(pe.token_ids.size()) - 1;
  if (budget < 1) throw ConfigError("context window too short for the template");
  size_t keep = body.tokens.size();
  if (static_cast<int>(keep) > budget) {
    keep = static_cast<size_t>(budget);
    pe.truncated = true;
  }
  pe.mention_first = static_cast<int>(pe.token_ids.size());
  for (size_t i = 0; i < keep; ++i) {
    pe.token_ids.push_back(body.tokens[i].id);
  }
  pe.mention_last = static_cast<int>(pe.token_ids.size()) - 1;
  pe.token_ids.push_back(tok.sep_id());

  const std::vector<size_t> cp_of_byte = utf8::ByteToCodepoint(mention.text);
  const size_t n_cp = utf8::CodepointCount(mention.text);
  auto to_cp = [&](size_t byte) { return byte >= cp_of_byte.size() ? n_cp : cp_of_byte[byte]; };
  pe.char_to_token.assign(n_cp, -1);
  for (size_t i = 0; i < keep; ++i) {
    const Token& t = body.tokens[i];
    for (size_t c = to_cp(t.begin); c < to_cp(t.end); ++c) {
      pe.char_to_token[c] = pe.mention_first + static_cast<int>(i);
    }
    const WordSpan& w = body.words[t.word];
    pe.token_words.emplace_back(mention.text.substr(w.begin, w.end - w.begin));
    pe.token_word_spans.push_back({to_cp(w.begin), to_cp(w.end)});
  }
  // Whitespace inherits the following token, trailing whitespace the last.
  const size_t covered = keep == body.tokens.size() ? n_cp : to_cp(body.tokens[keep].begin);
  int next = -1;
  for (size_t c = covered; c-- > 0;) {
    if (pe.char_to_token[c] >= 0) {
      next = pe.char_to_token[c];
    } else {
      pe.char_to_token[c] = next >= 0 ? next : pe.mention_last;
    }
  }
  return pe;
}

std::vector<int> TriggerTokenOffsets(const PromptEncoding& pe, const TriggerSpan& trigger) {
  std::vector<int> out;
  for (size_t c = trigger.start; c < trigger.end && c < pe.char_to_token.size(); ++c) {
    int t = pe.char_to_token[c];
    if (t < 0) continue;
    int off = t - pe.mention_first;
    if (out.empty() || out.back() != off) out.push_back(off);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PromptOutputs EncodePrompt(const Encoder& encoder, const PromptEncoding& pe) {
  if (pe.mask_position < 0 || pe.mask_position >= static_cast<int>(pe.token_ids.size())) {
    throw ConfigError("prompt encoding has no mask position");
  }
  for (int id : pe.token_ids) {
    if (id < 0 || id >= encoder.vocab_size()) {
      throw ConfigError("prompt encoding does not match the encoder vocabulary");
    }
  }
  PromptOutputs out;
  out.hidden = encoder.Encode(pe.token_ids);
  if (out.hidden->cols() != encoder.hidden_size()) {
    throw ConfigError("encoder produced the wrong hidden size");
  }
  out.context = ad::Row(out.hidden, 0);
  out.mask = ad::Row(out.hidden, pe.mask_position);
  out.mask_logits = encoder.MaskLogits(out.mask);
  return out;
}

namespace {

struct LabelPiece {
  size_t begin;  // byte range inside the joined string
  size_t end;
};

// Encodes labels [lo, hi) as one sequence and writes their pooled rows.
void EncodeChunk(const Encoder& encoder, std::span<const std::string> labels, int lo, int hi,
                 ad::Matrix& rows) {
  const Tokenizer& tok = encoder.tokenizer();
  std::string joined;
  std::vector<LabelPiece> pieces;
  for (int i = lo; i < hi; ++i) {
    if (i > lo) joined += kLabelSeparator;
    size_t b = joined.size();
    joined += labels[i];
    pieces.push_back({b, joined.size()});
  }
  Tokenized t = tok.Tokenize(joined);
  std::vector<int> ids = {tok.cls_id()};
  for (const Token& x : t.tokens) ids.push_back(x.id);
  ids.push_back(tok.sep_id());
  ad::Var hidden = encoder.Encode(ids);
  const ad::Matrix& h = hidden->value();
  for (int i = lo; i < hi; ++i) {
    const LabelPiece& p = pieces[i - lo];
    ad::Matrix sum = ad::Matrix::Zero(1, h.cols());
    int n = 0;
    for (size_t k = 0; k < t.tokens.size(); ++k) {
      if (t.tokens[k].begin >= p.begin && t.tokens[k].end <= p.end) {
        sum += h.row(static_cast<Eigen::Index>(k) + 1);
        ++n;
      }
    }
    if (n == 0) throw ConfigError("label '" + labels[i] + "' produced no tokens");
    rows.row(i) = sum / n;
  }
}

int TokenCount(const Tokenizer& tok, std::string_view text) {
  return static_cast<int>(tok.Tokenize(text).tokens.size());
}

}  // namespace

LabelEncoding EncodeLabels(const Encoder& encoder, std::span<const std::string> labels,
                           int max_chunk_tokens) {
  if (labels.empty()) throw ConfigError("no labels to encode");
  const Tokenizer& tok = encoder.tokenizer();
  const int window = max_chunk_tokens > 0 ? std::min(max_chunk_tokens, encoder.max_length())
                                          : encoder.max_length();
  const int sep_tokens = TokenCount(tok, utf8::Trim(kLabelSeparator));

  LabelEncoding out;
  out.rows = ad::Matrix::Zero(static_cast<Eigen::Index>(labels.size()), encoder.hidden_size());
  ad::NoGradGuard no_grad;
  int lo = 0;
  while (lo < static_cast<int>(labels.size())) {
    int used = 2 + TokenCount(tok, labels[lo]);
    if (used > window) {
      throw ConfigError("label '" + labels[lo] + "' exceeds the context window");
    }
    int hi = lo + 1;
    while (hi < static_cast<int>(labels.size())) {
      int more = sep_tokens + TokenCount(tok, labels[hi]);
      if (used + more > window) break;
      used += more;
      ++hi;
    }
    EncodeChunk(encoder, labels, lo, hi, out.rows);
    out.chunks.emplace_back(lo, hi);
    lo = hi;
  }
  return out;
}

}  // namespace pbct
