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

// Masked-LM encoder handle, prompt construction and label encoding.
//
// A prompt is [CLS] <template> <mention> [SEP], where the template is
// "This is an event about [MASK] ." tokenized on its own. The mention token
// range is derived from tokenizer offsets, so it is correct for any
// tokenizer.

#ifndef PBCT_ENCODER_H_
#define PBCT_ENCODER_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pbct/autodiff.h"
#include "pbct/corpus.h"
#include "pbct/tokenizer.h"
#include "pbct/transformer.h"

namespace pbct {

inline constexpr std::string_view kPromptTemplate = "This is an event about [MASK] .";
inline constexpr std::string_view kLabelSeparator = ", ";

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::string kind() const = 0;
  virtual const Tokenizer& tokenizer() const = 0;
  virtual int hidden_size() const = 0;
  virtual int max_length() const = 0;
  virtual int vocab_size() const = 0;

  // L x h final hidden states.
  virtual ad::Var Encode(std::span<const int> ids) const = 0;
  // 1 x |vocab| mask-fill logits for one hidden row.
  virtual ad::Var MaskLogits(const ad::Var& hidden_row) const = 0;
  virtual std::vector<ad::Parameter*> Parameters() const = 0;
};

// Transformer body with either tokenizer. Both certified encoders use it:
// the toy encoder (word vocabulary, seeded random weights) and the
// pre-trained encoder (WordPiece vocabulary, safetensors weights).
class TransformerEncoder : public Encoder {
 public:
  TransformerEncoder(std::string kind, std::unique_ptr<Tokenizer> tokenizer,
                     std::unique_ptr<Transformer> body);

  std::string kind() const override { return kind_; }
  const Tokenizer& tokenizer() const override { return *tokenizer_; }
  int hidden_size() const override { return body_->config().hidden; }
  int max_length() const override { return body_->config().max_positions; }
  int vocab_size() const override { return body_->config().vocab_size; }

  ad::Var Encode(std::span<const int> ids) const override;
  ad::Var MaskLogits(const ad::Var& hidden_row) const override;
  std::vector<ad::Parameter*> Parameters() const override;

  const Transformer& body() const { return *body_; }

 private:
  std::string kind_;
  std::unique_ptr<Tokenizer> tokenizer_;
  std::unique_ptr<Transformer> body_;
};

struct ToyEncoderOptions {
  int hidden = 32;
  int layers = 2;
  int heads = 2;
  int intermediate = 64;
  int max_positions = 128;
  double init_std = 0.1;
  uint64_t seed = 0;
};

// Word vocabulary covering `texts`, the prompt template and the separator.
std::unique_ptr<TransformerEncoder> MakeToyEncoder(std::span<const std::string> texts,
                                                   const ToyEncoderOptions& options);
std::unique_ptr<TransformerEncoder> MakeToyEncoderFromVocab(std::vector<std::string> vocab,
                                                            const ToyEncoderOptions& options);

// `weights` is a BERT masked-LM safetensors file, `vocab` its vocab.txt.
std::unique_ptr<TransformerEncoder> LoadPretrainedEncoder(const std::string& weights,
                                                          const std::string& vocab, int heads,
                                                          bool lowercase = true);

struct PromptEncoding {
  std::vector<int> token_ids;
  int mask_position = -1;
  // Inclusive token range of the embedded mention.
  int mention_first = -1;
  int mention_last = -1;
  // Mention code point -> prompt token index; whitespace maps to the next
  // token (the previous one at the end), truncated characters to -1.
  std::vector<int> char_to_token;
  // Per mention token: surface word and its code point span in the mention.
  std::vector<std::string> token_words;
  std::vector<TriggerSpan> token_word_spans;
  bool truncated = false;

  int mention_size() const { return mention_last - mention_first + 1; }
};

PromptEncoding BuildPrompt(const EventMention& mention, const Encoder& encoder);

// Mention-relative token positions covered by the mention's trigger span.
std::vector<int> TriggerTokenOffsets(const PromptEncoding& pe, const TriggerSpan& trigger);

struct PromptOutputs {
  ad::Var context;      // 1 x h, sequence-start hidden state
  ad::Var mask;         // 1 x h, hidden state at the mask position
  ad::Var mask_logits;  // 1 x |vocab|
  ad::Var hidden;       // L x h
};

PromptOutputs EncodePrompt(const Encoder& encoder, const PromptEncoding& pe);

struct LabelEncoding {
  ad::Matrix rows;  // |labels| x h
  // Label index ranges [begin, end) encoded together.
  std::vector<std::pair<int, int>> chunks;
};

// Encodes the labels joined by ", " and mean-pools each label's own tokens.
// When the joined sequence exceeds the context window it is split into
// chunks of whole labels.
LabelEncoding EncodeLabels(const Encoder& encoder, std::span<const std::string> labels,
                           int max_chunk_tokens = 0);

}  // namespace pbct

#endif  // PBCT_ENCODER_H_
