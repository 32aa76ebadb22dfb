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

// The optimization loop.
//
// Step s of the run belongs to epoch s / steps_per_epoch and reads a
// contiguous slice of that epoch's shuffled order; every random draw is a
// pure function of (seed, epoch, step, position). The step counter alone
// therefore fixes the remaining trajectory, which makes resume exact.

#ifndef PBCT_TRAINER_H_
#define PBCT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbct/checkpoint.h"
#include "pbct/config.h"
#include "pbct/corpus.h"
#include "pbct/evaluation.h"
#include "pbct/losses.h"
#include "pbct/model.h"
#include "pbct/optimizer.h"
#include "pbct/sampler.h"

namespace pbct {

// Corpus after partitioning, splitting and masking.
struct PreparedData {
  EventTypeCatalog catalog;            // partitioned
  std::vector<EventMention> mentions;  // all, original annotations
  DatasetSplit split;
  std::vector<EventMention> train;  // masked views
  std::vector<EventMention> validation;
  std::vector<EventMention> test;
  GoldStore gold;
  // In-memory paraphrases shipped with synthetic corpora.
  std::map<std::string, std::string> paraphrases;
};

PreparedData PrepareData(const RunConfig& config);

// Provider selected by the config; a cached table with no path uses the
// in-memory table of `data`.
std::unique_ptr<ParaphraseProvider> MakeParaphraser(const RunConfig& config,
                                                    const PreparedData& data);

// Fresh model for `config` over `data`: encoder, prototypes initialized,
// sentinel at zero.
std::unique_ptr<PbctModel> InitializeModel(const RunConfig& config, const PreparedData& data);

struct StepRecord {
  int64_t step = 0;  // 1-based count of completed optimizer steps
  int64_t epoch = 0;
  LossBreakdown loss;  // batch means
  double lr_encoder = 0.0;
  double lr_head = 0.0;
  std::optional<double> g1_mean;  // absent when the sentinel is disabled
  double grad_norm = 0.0;         // before clipping
  double unseen_prototype_grad_norm = 0.0;
  int seen_in_batch = 0;
  int unseen_in_batch = 0;
  int rephrase_fallbacks = 0;
};

nlohmann::json StepRecordToJson(const StepRecord& record);

struct ValidationRecord {
  int64_t step = 0;
  MetricsReport metrics;
  bool improved = false;
};

struct TrainerHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const ValidationRecord&)> on_validation;
};

struct TrainOptions {
  // Run directory; empty disables every file output.
  std::string out_dir;
  // Stops after this many completed steps (resume testing); -1: no limit.
  int64_t stop_after_step = -1;
  TrainerHooks hooks;
};

struct TrainResult {
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  TrainerProgress progress;
  std::string final_checkpoint;
};

class Trainer {
 public:
  // Builds and initializes the model from `config`.
  Trainer(RunConfig config, const PreparedData& data);
  // Continues the run recorded in `ckpt`.
  Trainer(const Checkpoint& ckpt, const PreparedData& data);

  // Total optimizer steps of the configured run.
  int64_t TotalSteps() const;
  int64_t StepsPerEpoch() const;

  TrainResult Train(const TrainOptions& options = {});

  // One optimizer step at the current position.
  StepRecord Step();

  // Metrics over a masked split; must run outside a training scope.
  MetricsReport Evaluate(std::span<const EventMention> view) const;

  PbctModel& model() { return *model_; }
  const PbctModel& model() const { return *model_; }
  const RunConfig& config() const { return config_; }
  const TrainerProgress& progress() const { return progress_; }
  const Adam& optimizer() const { return *optimizer_; }
  Checkpoint Snapshot() const;

  // Mention ids of the batch at `step` (0-based).
  std::vector<std::string> BatchIds(int64_t step) const;

 private:
  void Setup();
  std::vector<int> Batch(int64_t step) const;
  bool ContrastiveActive() const;

  RunConfig config_;
  const PreparedData& data_;
  std::unique_ptr<PbctModel> model_;
  std::unique_ptr<Adam> optimizer_;
  std::unique_ptr<ParaphraseProvider> paraphraser_;
  std::unique_ptr<NegativePool> pool_;
  GroundCost cost_ = GroundCost::Indicator(1);
  TrainerProgress progress_;
  std::string out_dir_;
  mutable std::map<int64_t, std::vector<int>> epoch_orders_;
};

}  // namespace pbct

#endif  // PBCT_TRAINER_H_
