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

#include "pbct/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "pbct/seed.h"
#include "pbct/status.h"
#include "pbct/synthetic.h"

namespace pbct {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Salts that keep the independent random streams apart.
constexpr uint64_t kShuffleStream = 1;

void AppendLine(const fs::path& path, const json& record) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << record.dump() << "\n";
}

SinkhornOptions SinkhornFrom(const RunConfig& c) {
  SinkhornOptions o;
  o.epsilon = c.sinkhorn_epsilon;
  return o;
}

}  // namespace

PreparedData PrepareData(const RunConfig& config) {
  PreparedData d;
  if (config.synthetic == "smoke") {
    SyntheticCorpus s = SmokeCorpus();
    d.mentions = std::move(s.mentions);
    d.catalog = std::move(s.catalog);
    d.paraphrases = std::move(s.paraphrases);
  } else if (config.synthetic == "ace") {
    SyntheticCorpus s = AceShapedCorpus(config.split_seed);
    d.mentions = std::move(s.mentions);
    d.catalog = PartitionTypes(s.catalog);
  } else if (config.synthetic.empty()) {
    if (config.corpus.empty())
      throw ConfigError("no corpus given and no synthetic corpus selected");
    LoadedCorpus c = LoadCorpus(config.corpus, ParseCorpusFormat(config.corpus_format));
    d.mentions = std::move(c.mentions);
    d.catalog = PartitionTypes(c.catalog);
  } else {
    throw ConfigError("unknown synthetic corpus '" + config.synthetic + "'");
  }
  if (d.catalog.num_seen() == 0) throw ConfigError("catalog has no seen types");
  d.split = SplitDataset(d.mentions, d.catalog, {}, config.split_seed);
  MaskedCorpus masked = MaskUnseenAnnotations(d.mentions, d.catalog);
  d.train = SelectMentions(masked.view, d.split.train);
  d.validation = SelectMentions(masked.view, d.split.validation);
  d.test = SelectMentions(masked.view, d.split.test);
  d.gold = std::move(masked.gold);
  return d;
}

std::unique_ptr<ParaphraseProvider> MakeParaphraser(const RunConfig& config,
                                                    const PreparedData& data) {
  switch (ParseParaphraseMode(config.paraphrase_mode)) {
    case ParaphraseMode::kIdentityStub:
      return std::make_unique<IdentityParaphraser>();
    case ParaphraseMode::kCachedTable:
      if (config.paraphrase_table.empty()) {
        if (data.paraphrases.empty()) {
          throw ConfigError("paraphrase_mode cached_table needs paraphrase_table");
        }
        return std::make_unique<CachedParaphraser>(data.paraphrases);
      }
      return CachedParaphraser::FromFile(config.paraphrase_table);
    case ParaphraseMode::kExternalBacktranslation:
      if (config.paraphrase_command.empty()) {
        throw ConfigError("paraphrase_mode external_backtranslation needs paraphrase_command");
      }
      return std::make_unique<ExternalParaphraser>(config.paraphrase_command);
  }
  throw ConfigError("unreachable paraphrase mode");
}

std::unique_ptr<PbctModel> InitializeModel(const RunConfig& config, const PreparedData& data) {
  if (!data.catalog.partitioned() || data.catalog.num_seen() == 0) {
    throw ConfigError("catalog must be partitioned with at least one seen type");
  }
  std::unique_ptr<TransformerEncoder> encoder;
  if (config.encoder == "toy") {
    std::vector<std::string> texts;
    for (const EventMention& m : data.mentions) texts.push_back(m.text);
    for (const auto& [original, paraphrase] : data.paraphrases) texts.push_back(paraphrase);
    for (const std::string& label : data.catalog.labels()) texts.push_back(label);
    ToyEncoderOptions o;
    o.hidden = config.toy_hidden;
    o.layers = config.toy_layers;
    o.heads = config.toy_heads;
    o.intermediate = config.toy_intermediate;
    o.max_positions = config.toy_max_positions;
    o.init_std = config.toy_init_std;
    o.seed = Mix(config.seed, "encoder");
    encoder = MakeToyEncoder(texts, o);
  } else if (config.encoder == "pretrained") {
    encoder = LoadPretrainedEncoder(config.encoder_weights, config.encoder_vocab,
                                    config.encoder_heads, config.encoder_lowercase);
  } else {
    throw ConfigError("unknown encoder '" + config.encoder + "'");
  }
  ModelOptions options;
  options.distance =
      config.distance == "squared" ? DistanceKind::kSquaredEuclidean : DistanceKind::kEuclidean;
  options.disable_sentinel = config.disable_sentinel;
  auto model = std::make_unique<PbctModel>(std::move(encoder), data.catalog, options);
  model->InitializePrototypes(!config.disable_semantic_init, Mix(config.seed, "prototypes"));
  return model;
}

json StepRecordToJson(const StepRecord& r) {
  json j = {{"step", r.step},
            {"epoch", r.epoch},
            {"l_tri", r.loss.l_tri},
            {"l_eve", r.loss.l_eve},
            {"l_con", r.loss.l_con},
            {"total", r.loss.total},
            {"d1", r.loss.d1},
            {"d2_clamped", r.loss.d2_clamped},
            {"d3_clamped", r.loss.d3_clamped},
            {"lr_encoder", r.lr_encoder},
            {"lr_head", r.lr_head},
            {"grad_norm", r.grad_norm},
            {"unseen_prototype_grad_norm", r.unseen_prototype_grad_norm},
            {"seen_in_batch", r.seen_in_batch},
            {"unseen_in_batch", r.unseen_in_batch},
            {"rephrase_fallbacks", r.rephrase_fallbacks}};
  if (r.g1_mean) j["g1_mean"] = *r.g1_mean;
  return j;
}

Trainer::Trainer(RunConfig config, const PreparedData& data)
    : config_(std::move(config)), data_(data) {
  ValidateConfig(config_);
  model_ = InitializeModel(config_, data_);
  Setup();
}

Trainer::Trainer(const Checkpoint& ckpt, const PreparedData& data)
    : config_(ckpt.config), data_(data) {
  ValidateConfig(config_);
  if (!(ckpt.catalog == data.catalog)) {
    throw ConfigError("checkpoint catalog does not match the prepared corpus");
  }
  model_ = RestoreModel(ckpt);
  Setup();
  if (ckpt.has_optimizer) optimizer_->set_state(ckpt.optimizer);
  progress_ = ckpt.progress;
}

void Trainer::Setup() {
  if (data_.train.empty()) throw ConfigError("training split is empty");
  std::vector<ParamGroup> groups = {
      {"encoder", model_->EncoderParameters(), config_.lr_encoder, config_.weight_decay_encoder},
      {"head", model_->HeadParameters(), config_.lr_head, config_.weight_decay_head}};
  optimizer_ = std::make_unique<Adam>(std::move(groups));
  paraphraser_ = MakeParaphraser(config_, data_);
  pool_ = std::make_unique<NegativePool>(data_.train);
  cost_ = GroundCost::Indicator(model_->num_types());
}

bool Trainer::ContrastiveActive() const {
  return !config_.disable_contrastive && config_.lambda != 0.0;
}

int64_t Trainer::StepsPerEpoch() const {
  const int64_t n = static_cast<int64_t>(data_.train.size());
  return (n + config_.batch_size - 1) / config_.batch_size;
}

int64_t Trainer::TotalSteps() const {
  const int64_t by_epochs = static_cast<int64_t>(config_.max_epochs) * StepsPerEpoch();
  if (config_.max_steps > 0 && config_.max_epochs > 0) {
    return std::min<int64_t>(config_.max_steps, by_epochs);
  }
  return config_.max_steps > 0 ? config_.max_steps : by_epochs;
}

std::vector<int> Trainer::Batch(int64_t step) const {
  const int64_t spe = StepsPerEpoch();
  const int64_t epoch = step / spe;
  auto it = epoch_orders_.find(epoch);
  if (it == epoch_orders_.end()) {
    std::vector<int> order(data_.train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(Mix(config_.seed, {kShuffleStream, static_cast<uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    if (epoch_orders_.size() > 4) epoch_orders_.erase(epoch_orders_.begin());
    it = epoch_orders_.emplace(epoch, std::move(order)).first;
  }
  const size_t begin = static_cast<size_t>((step % spe) * config_.batch_size);
  const size_t end = std::min(it->second.size(), begin + config_.batch_size);
  return {it->second.begin() + begin, it->second.begin() + end};
}

std::vector<std::string> Trainer::BatchIds(int64_t step) const {
  std::vector<std::string> ids;
  for (int i : Batch(step)) ids.push_back(data_.train[i].id);
  return ids;
}

StepRecord Trainer::Step() {
  const int64_t s = progress_.step;
  const int64_t epoch = s / StepsPerEpoch();
  const std::vector<int> batch = Batch(s);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool contrastive = ContrastiveActive();
  if (contrastive && config_.ground_cost == "prototype_metric") {
    cost_ = GroundCost::PrototypeMetric(model_->prototypes().value);
  }
  const SinkhornOptions sinkhorn = SinkhornFrom(config_);

  StepRecord rec;
  rec.step = s + 1;
  rec.epoch = epoch;
  rec.lr_encoder = config_.lr_encoder;
  rec.lr_head = config_.lr_head;
  double g1_sum = 0.0;

  auto fail = [&](const std::string& what) {
    json dump = {{"step", s + 1}, {"epoch", epoch}, {"reason", what}, {"batch", BatchIds(s)}};
    std::string where;
    if (!out_dir_.empty()) {
      fs::path p =
          fs::path(out_dir_) / "metrics" / ("nonfinite_step_" + std::to_string(s + 1) + ".json");
      std::ofstream(p) << dump.dump(2) << "\n";
      where = "; batch dumped to " + p.string();
    }
    throw NumericError("training halted at step " + std::to_string(s + 1) + ": " + what +
                       "; batch ids " + dump["batch"].dump() + where);
  };

  optimizer_->ZeroGrad();
  {
    TrainingScope scope;
    for (size_t pos = 0; pos < batch.size(); ++pos) {
      const EventMention& m = data_.train[batch[pos]];
      const bool seen = m.visibility == Visibility::kSeen;
      (seen ? rec.seen_in_batch : rec.unseen_in_batch)++;
      try {
        ViewOutput out0 = model_->Forward(m);
        if (out0.gate) g1_sum += out0.gate->value()(0, 1);
        std::vector<int> offsets;
        int gold_type = -1;
        if (seen) {
          offsets = TriggerTokenOffsets(out0.prompt, *m.trigger);
          gold_type = model_->catalog().IndexOf(*m.label);
        }
        ad::Var l_tri = TriggerLoss(out0.trigger, offsets, m.visibility);
        ad::Var l_eve = EventLoss(out0.classification.logits, gold_type, m.visibility,
                                  model_->num_seen(), config_.event_loss_all_types);
        ad::Var l_con = ad::Scalar(0.0);
        if (contrastive) {
          const uint64_t seed = Mix(
              config_.seed,
              {static_cast<uint64_t>(epoch), static_cast<uint64_t>(s), static_cast<uint64_t>(pos)});
          ContrastiveBundle b =
              BuildBundle(m, *paraphraser_, *pool_, *model_, seed, std::move(out0));
          if (b.rephrase_fallback) ++rec.rephrase_fallbacks;
          ContrastiveTerms t = ContrastiveLoss(b.p0(), b.p1(), b.p2(), b.p3(), config_.m1,
                                               config_.m2, cost_, sinkhorn);
          l_con = t.loss;
          rec.loss.d1 += t.d1->scalar() * scale;
          rec.loss.d2_clamped += t.d2_clamped->scalar() * scale;
          rec.loss.d3_clamped += t.d3_clamped->scalar() * scale;
        }
        ad::Var total = TotalLoss(l_eve, l_tri, l_con, config_.lambda);
        if (!std::isfinite(total->scalar())) fail("non-finite loss on " + m.id);
        rec.loss.l_tri += l_tri->scalar() * scale;
        rec.loss.l_eve += l_eve->scalar() * scale;
        rec.loss.l_con += l_con->scalar() * scale;
        rec.loss.total += total->scalar() * scale;
        ad::Backward(ad::Scale(total, scale));
      } catch (const NumericError& e) {
        if (std::string_view(e.what()).starts_with("training halted")) throw;
        fail(std::string(e.what()) + " on " + m.id);
      }
    }
  }
  if (!config_.disable_sentinel) rec.g1_mean = g1_sum * scale;

  double unseen_sq = 0.0;
  const ad::Matrix& pg = model_->prototypes().grad;
  for (int row : model_->unseen_rows()) unseen_sq += pg.row(row).squaredNorm();
  rec.unseen_prototype_grad_norm = std::sqrt(unseen_sq);
  try {
    rec.grad_norm = optimizer_->ClipGradients(config_.grad_clip);
  } catch (const NumericError& e) {
    fail(e.what());
  }
  optimizer_->Step();
  progress_.step = s + 1;
  return rec;
}

MetricsReport Trainer::Evaluate(std::span<const EventMention> view) const {
  PredictOptions po;
  po.unseen_global_argmax = config_.unseen_global_argmax;
  std::vector<Prediction> preds = Predict(*model_, view, data_.gold, po);
  return ComputeMetrics(preds, model_->catalog(),
                        config_.nmi_normalization == "geometric" ? NmiNormalization::kGeometric
                                                                 : NmiNormalization::kArithmetic,
                        config_.unseen_global_argmax);
}

Checkpoint Trainer::Snapshot() const {
  return pbct::Snapshot(*model_, config_, optimizer_.get(), progress_);
}

TrainResult Trainer::Train(const TrainOptions& options) {
  out_dir_ = options.out_dir;
  fs::path metrics_dir, ckpt_dir;
  if (!out_dir_.empty()) {
    metrics_dir = fs::path(out_dir_) / "metrics";
    ckpt_dir = fs::path(out_dir_) / "checkpoints";
    fs::create_directories(metrics_dir);
    fs::create_directories(ckpt_dir);
    if (progress_.step == 0) {
      fs::remove(metrics_dir / "train.jsonl");
      fs::remove(metrics_dir / "validation.jsonl");
    }
  }
  const int64_t total = TotalSteps();
  const int64_t eval_every = config_.eval_interval > 0 ? config_.eval_interval : StepsPerEpoch();
  TrainResult result;

  while (progress_.step < total && !progress_.stopped_early &&
         (options.stop_after_step < 0 || progress_.step < options.stop_after_step)) {
    StepRecord rec = Step();
    result.steps.push_back(rec);
    if (!out_dir_.empty()) AppendLine(metrics_dir / "train.jsonl", StepRecordToJson(rec));
    if (options.hooks.on_step) options.hooks.on_step(rec);

    const int64_t s = progress_.step;
    if (!data_.validation.empty() && (s % eval_every == 0 || s == total)) {
      ValidationRecord v;
      v.step = s;
      v.metrics = Evaluate(data_.validation);
      const double score = v.metrics.weighted_f1.value_or(0.0);
      if (score > progress_.best_validation_f1) {
        progress_.best_validation_f1 = score;
        progress_.best_step = s;
        progress_.evaluations_since_best = 0;
        v.improved = true;
      } else {
        ++progress_.evaluations_since_best;
        if (config_.patience > 0 && progress_.evaluations_since_best >= config_.patience) {
          progress_.stopped_early = true;
        }
      }
      if (v.improved && !out_dir_.empty()) {
        SaveCheckpoint(Snapshot(), (ckpt_dir / "best.ckpt").string());
      }
      if (!out_dir_.empty()) {
        json j = MetricsToJson(v.metrics);
        j["step"] = s;
        j["improved"] = v.improved;
        AppendLine(metrics_dir / "validation.jsonl", j);
      }
      if (options.hooks.on_validation) options.hooks.on_validation(v);
      result.validations.push_back(std::move(v));
    }
    if (!out_dir_.empty() && config_.checkpoint_interval > 0 &&
        s % config_.checkpoint_interval == 0) {
      SaveCheckpoint(Snapshot(), (ckpt_dir / ("step_" + std::to_string(s) + ".ckpt")).string());
    }
  }

  const bool finished = progress_.step >= total || progress_.stopped_early;
  if (!out_dir_.empty()) {
    const std::string name =
        finished ? "final.ckpt" : "step_" + std::to_string(progress_.step) + ".ckpt";
    result.final_checkpoint = (ckpt_dir / name).string();
    SaveCheckpoint(Snapshot(), result.final_checkpoint);
  }
  result.progress = progress_;
  return result;
}

}  // namespace pbct
