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

#include "pbct/model.h"

#include <random>

#include "pbct/status.h"

namespace pbct {

PbctModel::PbctModel(std::unique_ptr<TransformerEncoder> encoder, EventTypeCatalog catalog,
                     ModelOptions options)
    : encoder_(std::move(encoder)),
      catalog_(std::move(catalog)),
      options_(options),
      sentinel_(encoder_->hidden_size()),
      prototypes_("prototypes", ad::Matrix::Zero(static_cast<Eigen::Index>(catalog_.size()),
                                                 encoder_->hidden_size())) {
  if (!catalog_.partitioned()) throw ConfigError("model needs a partitioned catalog");
  if (catalog_.empty()) throw ConfigError("model needs at least one event type");
}

void PbctModel::InitializePrototypes(bool semantic, uint64_t seed) {
  if (semantic) {
    prototypes_.value = EncodeLabels(*encoder_, catalog_.labels()).rows;
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.02);
    for (Eigen::Index i = 0; i < prototypes_.value.size(); ++i) {
      prototypes_.value.data()[i] = dist(rng);
    }
  }
  prototypes_.ZeroGrad();
}

ViewOutput PbctModel::Forward(const EventMention& mention,
                              std::optional<std::span<const int>> restrict) const {
  ViewOutput out;
  out.prompt = BuildPrompt(mention, *encoder_);
  out.encoded = EncodePrompt(*encoder_, out.prompt);
  out.trigger = ComputeTriggerDistribution(out.encoded.mask_logits, out.prompt);
  if (options_.disable_sentinel) {
    out.event_vector = ad::Add(out.encoded.context, out.encoded.mask);
  } else {
    out.gate = SentinelWeights(sentinel_, out.encoded.context, out.encoded.mask);
    out.event_vector = EventVector(out.gate, out.encoded.context, out.encoded.mask);
  }
  out.classification =
      Classify(out.event_vector, ad::Leaf(prototypes_), restrict, options_.distance);
  return out;
}

std::vector<ad::Parameter*> PbctModel::EncoderParameters() const { return encoder_->Parameters(); }

std::vector<ad::Parameter*> PbctModel::HeadParameters() {
  return {&sentinel_.weight(), &sentinel_.bias(), &prototypes_};
}

std::vector<ad::Parameter*> PbctModel::AllParameters() {
  std::vector<ad::Parameter*> all = EncoderParameters();
  for (ad::Parameter* p : HeadParameters()) all.push_back(p);
  return all;
}

}  // namespace pbct
