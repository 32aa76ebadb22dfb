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

// BERT-architecture masked language model: post-norm self-attention
// layers, GELU feed-forward blocks and a tied-embedding mask-fill head.
// Weight matrices are stored input-major (y = x W + b).

#ifndef PBCT_TRANSFORMER_H_
#define PBCT_TRANSFORMER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pbct/autodiff.h"

namespace pbct {

struct TransformerConfig {
  int vocab_size = 0;
  int hidden = 32;
  int layers = 2;
  int heads = 2;
  int intermediate = 64;
  int max_positions = 64;
  int type_vocab = 2;
  double layer_norm_eps = 1e-12;

  bool operator==(const TransformerConfig&) const = default;
};

class Transformer {
 public:
  struct Layer {
    ad::Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    ad::Parameter *ln1_g, *ln1_b;
    ad::Parameter *w1, *b1, *w2, *b2;
    ad::Parameter *ln2_g, *ln2_b;
  };

  // Parameters drawn from N(0, init_std^2); norms at identity, biases zero.
  Transformer(const TransformerConfig& config, uint64_t seed, double init_std);

  const TransformerConfig& config() const { return config_; }

  // Final hidden states, one row per input token.
  ad::Var Encode(std::span<const int> ids) const;
  // Mask-fill logits over the vocabulary for one 1 x h hidden row.
  ad::Var MaskLogits(const ad::Var& hidden_row) const;

  std::vector<ad::Parameter*> Parameters() const;
  ad::Parameter* Find(const std::string& name) const;

  const Layer& layer(int i) const { return layers_.at(i); }
  const ad::Parameter& word_embeddings() const { return *word_emb_; }
  const ad::Parameter& position_embeddings() const { return *pos_emb_; }
  const ad::Parameter& type_embeddings() const { return *type_emb_; }
  const ad::Parameter& embedding_norm_gain() const { return *emb_ln_g_; }
  const ad::Parameter& embedding_norm_bias() const { return *emb_ln_b_; }
  const ad::Parameter& head_dense() const { return *head_w_; }
  const ad::Parameter& head_dense_bias() const { return *head_b_; }
  const ad::Parameter& head_norm_gain() const { return *head_ln_g_; }
  const ad::Parameter& head_norm_bias() const { return *head_ln_b_; }
  const ad::Parameter& output_bias() const { return *out_bias_; }

 private:
  ad::Parameter* Add(std::string name, ad::Matrix value);

  TransformerConfig config_;
  std::vector<std::unique_ptr<ad::Parameter>> params_;
  ad::Parameter *word_emb_, *pos_emb_, *type_emb_, *emb_ln_g_, *emb_ln_b_;
  std::vector<Layer> layers_;
  ad::Parameter *head_w_, *head_b_, *head_ln_g_, *head_ln_b_, *out_bias_;
};

// Reads a safetensors file with BERT masked-LM tensor names
// ("bert.embeddings.word_embeddings.weight", "cls.predictions.bias", ...).
// Shapes determine the configuration; `heads` cannot be inferred.
std::unique_ptr<Transformer> LoadSafetensorsBert(const std::string& path, int heads,
                                                 double layer_norm_eps = 1e-12);

// Writes the same layout in 32-bit floats.
void SaveSafetensorsBert(const Transformer& model, const std::string& path);

}  // namespace pbct

#endif  // PBCT_TRANSFORMER_H_
