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

// pbct: command-line driver.
//
// Exit status: 0 on success, 2 on usage errors, 1 on any other failure.
// A run directory holds config.txt, checkpoints/, metrics/, exports/ and
// plots/.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbct/checkpoint.h"
#include "pbct/config.h"
#include "pbct/evaluation.h"
#include "pbct/plot.h"
#include "pbct/sampler.h"
#include "pbct/status.h"
#include "pbct/trainer.h"
#include "pbct/utf8.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace pbct {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config;
  std::string preset;
  std::optional<uint64_t> seed;
  std::vector<std::string> sets;
  std::string out;
  std::string checkpoint;
};

void AddConfigOptions(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "Run configuration file");
  cmd->add_option("--preset", a.preset, "Start from a named preset (ace, ace-m1-2, fewevent, toy)");
  cmd->add_option("--seed", a.seed, "Training seed");
  cmd->add_option("--set", a.sets, "Override one key: KEY=VALUE (repeatable)");
}

// File, then environment, then --seed and --set; validated before use.
RunConfig ResolveConfig(const CommonArgs& a) {
  RunConfig c = a.preset.empty() ? RunConfig{} : Preset(a.preset);
  if (!a.config.empty()) c = LoadConfigFile(a.config, c);
  ApplyEnvironment(c);
  if (a.seed) c.seed = *a.seed;
  for (const std::string& kv : a.sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    SetConfigValue(c, utf8::Trim(kv.substr(0, eq)), utf8::Trim(kv.substr(eq + 1)));
  }
  ValidateConfig(c);
  return c;
}

void RequireOut(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path.string(), j.dump(2) + "\n"); }

void MakeRunDirs(const fs::path& out) {
  for (const char* sub : {"checkpoints", "metrics", "exports", "plots"}) {
    fs::create_directories(out / sub);
  }
}

std::span<const EventMention> SplitView(const PreparedData& d, const std::string& split) {
  if (split == "train") return d.train;
  if (split == "validation") return d.validation;
  if (split == "test") return d.test;
  throw UsageError("--split must be train, validation or test");
}

json SplitSummary(const PreparedData& d) {
  int64_t seen_train = 0;
  for (const EventMention& m : d.train) seen_train += m.visibility == Visibility::kSeen;
  return {{"types", d.catalog.size()},
          {"seen_types", d.catalog.num_seen()},
          {"unseen_types", d.catalog.num_unseen()},
          {"mentions", d.mentions.size()},
          {"train", d.train.size()},
          {"validation", d.validation.size()},
          {"test", d.test.size()},
          {"train_seen", seen_train},
          {"train_unseen", static_cast<int64_t>(d.train.size()) - seen_train}};
}

// Trains into `out` and evaluates on the test split.
json TrainAndEvaluate(const RunConfig& config, const PreparedData& data, const fs::path& out,
                      bool quiet) {
  MakeRunDirs(out);
  WriteText((out / "config.txt").string(), SerializeConfig(config));
  Trainer trainer(config, data);
  TrainOptions o;
  o.out_dir = out.string();
  if (!quiet) {
    o.hooks.on_validation = [](const ValidationRecord& v) {
      std::printf("step %lld  validation weighted_f1 %.4f%s\n", static_cast<long long>(v.step),
                  v.metrics.weighted_f1.value_or(0.0), v.improved ? "  (best)" : "");
    };
  }
  TrainResult r = trainer.Train(o);
  json metrics = MetricsToJson(trainer.Evaluate(data.test));
  metrics["split"] = "test";
  metrics["steps"] = r.progress.step;
  metrics["stopped_early"] = r.progress.stopped_early;
  WriteJson(out / "metrics" / "test_metrics.json", metrics);
  return metrics;
}

std::string Fmt(const json& v) {
  if (v.is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v.get<double>());
  return buf;
}

void PrintMetrics(const json& m) {
  for (const char* k : {"f1_seen", "f1_unseen", "nmi", "fm", "weighted_precision",
                        "weighted_recall", "weighted_f1"}) {
    std::printf("%-20s %s\n", k, Fmt(m[k]).c_str());
  }
}

// --- commands ---------------------------------------------------------------

int PrepareDataCmd(const CommonArgs& a) {
  RunConfig c = ResolveConfig(a);
  RequireOut(a.out);
  PreparedData d = PrepareData(c);
  fs::path out(a.out);
  fs::create_directories(out);
  WriteText((out / "config.txt").string(), SerializeConfig(c));
  WriteCorpus((out / "corpus.jsonl").string(), d.mentions);
  WriteSplitManifest((out / "split").string(), d.split,
                     {c.split_seed, {}, std::string(kToolVersion)});
  json cat = {{"labels", d.catalog.labels()},
              {"counts", d.catalog.counts()},
              {"num_seen", d.catalog.num_seen()}};
  WriteJson(out / "catalog.json", cat);
  if (!d.paraphrases.empty())
    WriteParaphraseTable((out / "paraphrases.jsonl").string(), d.paraphrases);
  json summary = SplitSummary(d);
  summary["warnings"] = d.split.warnings;
  WriteJson(out / "data_summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int TrainCmd(const CommonArgs& a, const std::string& resume) {
  RequireOut(a.out);
  fs::path out(a.out);
  if (!resume.empty()) {
    Checkpoint ckpt = LoadCheckpoint(resume);
    PreparedData data = PrepareData(ckpt.config);
    Trainer trainer(ckpt, data);
    MakeRunDirs(out);
    TrainOptions o;
    o.out_dir = out.string();
    trainer.Train(o);
    json metrics = MetricsToJson(trainer.Evaluate(data.test));
    WriteJson(out / "metrics" / "test_metrics.json", metrics);
    PrintMetrics(metrics);
    return 0;
  }
  RunConfig c = ResolveConfig(a);
  PreparedData data = PrepareData(c);
  json metrics = TrainAndEvaluate(c, data, out, false);
  PrintMetrics(metrics);
  return 0;
}

int EvaluateCmd(const CommonArgs& a, const std::string& split) {
  if (a.checkpoint.empty()) throw UsageError("--checkpoint is required");
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  PreparedData data = PrepareData(ckpt.config);
  std::unique_ptr<PbctModel> model = RestoreModel(ckpt);
  PredictOptions po;
  po.unseen_global_argmax = ckpt.config.unseen_global_argmax;
  std::vector<Prediction> preds = Predict(*model, SplitView(data, split), data.gold, po);
  MetricsReport r =
      ComputeMetrics(preds, model->catalog(),
                     ckpt.config.nmi_normalization == "geometric" ? NmiNormalization::kGeometric
                                                                  : NmiNormalization::kArithmetic,
                     po.unseen_global_argmax);
  json m = MetricsToJson(r);
  m["split"] = split;
  m["disable_sentinel"] = ckpt.model_options.disable_sentinel;
  if (!a.out.empty()) {
    fs::create_directories(fs::path(a.out) / "metrics");
    WriteJson(fs::path(a.out) / "metrics" / (split + "_metrics.json"), m);
  }
  PrintMetrics(m);
  return 0;
}

const std::vector<std::string>& AblationFlags() {
  static const std::vector<std::string> k = {"disable_sentinel", "disable_semantic_init",
                                             "disable_contrastive"};
  return k;
}

int AblateCmd(const CommonArgs& a, const std::vector<std::string>& flags) {
  for (const std::string& f : flags) {
    if (std::find(AblationFlags().begin(), AblationFlags().end(), f) == AblationFlags().end()) {
      throw UsageError(
          "unknown ablation flag '" + f +
          "' (expected disable_sentinel, disable_semantic_init or disable_contrastive)");
    }
  }
  RunConfig base = ResolveConfig(a);
  RequireOut(a.out);
  PreparedData data = PrepareData(base);
  std::vector<std::pair<std::string, RunConfig>> variants = {{"default", base}};
  for (const std::string& f : flags) {
    RunConfig v = base;
    SetConfigValue(v, f, "true");
    variants.emplace_back(f, v);
  }
  if (flags.size() > 1) {
    RunConfig v = base;
    for (const std::string& f : flags) SetConfigValue(v, f, "true");
    variants.emplace_back("all", v);
  }
  json table = json::object();
  std::string tsv = "variant\tf1_seen\tf1_unseen\tnmi\tfm\tweighted_f1\n";
  for (const auto& [name, cfg] : variants) {
    std::printf("== %s\n", name.c_str());
    json m = TrainAndEvaluate(cfg, data, fs::path(a.out) / name, true);
    PrintMetrics(m);
    table[name] = m;
    tsv += name + "\t" + Fmt(m["f1_seen"]) + "\t" + Fmt(m["f1_unseen"]) + "\t" + Fmt(m["nmi"]) +
           "\t" + Fmt(m["fm"]) + "\t" + Fmt(m["weighted_f1"]) + "\n";
  }
  WriteJson(fs::path(a.out) / "ablation.json", table);
  WriteText((fs::path(a.out) / "ablation.tsv").string(), tsv);
  return 0;
}

std::vector<double> ParseGrid(const std::string& grid) {
  std::vector<double> out;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = utf8::Trim(item);
    if (item.empty()) continue;
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--grid must list at least one value");
  return out;
}

int SweepCmd(const CommonArgs& a, const std::string& param, const std::string& grid_text) {
  if (param != "m1" && param != "m2" && param != "lambda") {
    throw UsageError("--param must be m1, m2 or lambda");
  }
  const std::vector<double> grid = ParseGrid(grid_text);
  RunConfig base = ResolveConfig(a);
  RequireOut(a.out);
  PreparedData data = PrepareData(base);
  json rows = json::array();
  std::string tsv = param + "\tf1_seen\tf1_unseen\tweighted_f1\n";
  for (double v : grid) {
    RunConfig c = base;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    SetConfigValue(c, param, buf);
    ValidateConfig(c);
    std::printf("== %s = %s\n", param.c_str(), buf);
    json m = TrainAndEvaluate(c, data, fs::path(a.out) / (param + "_" + buf), true);
    PrintMetrics(m);
    rows.push_back({{"value", v}, {"metrics", m}});
    tsv += std::string(buf) + "\t" + Fmt(m["f1_seen"]) + "\t" + Fmt(m["f1_unseen"]) + "\t" +
           Fmt(m["weighted_f1"]) + "\n";
  }
  WriteJson(fs::path(a.out) / "sweep.json", {{"param", param}, {"rows", rows}});
  WriteText((fs::path(a.out) / "sweep.tsv").string(), tsv);
  return 0;
}

int SaliencyCmd(const CommonArgs& a) {
  if (a.checkpoint.empty()) throw UsageError("--checkpoint is required");
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  PreparedData data = PrepareData(ckpt.config);
  std::unique_ptr<PbctModel> model = RestoreModel(ckpt);
  json j = SaliencyToJson(TriggerSaliency(*model, data.train));
  if (!a.out.empty()) WriteJson(fs::path(a.out) / "metrics" / "saliency.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int ExportCmd(const CommonArgs& a, const std::string& split) {
  if (a.checkpoint.empty()) throw UsageError("--checkpoint is required");
  RequireOut(a.out);
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  PreparedData data = PrepareData(ckpt.config);
  std::unique_ptr<PbctModel> model = RestoreModel(ckpt);
  fs::path path = fs::path(a.out) / "exports" / ("embeddings_" + split + ".tsv");
  fs::create_directories(path.parent_path());
  ExportEmbeddings(*model, SplitView(data, split), data.gold, path.string());
  std::printf("%s\n", path.string().c_str());
  return 0;
}

int PlotCmd(const CommonArgs& a, const std::string& input, const std::string& method) {
  if (input.empty()) throw UsageError("--input is required");
  RequireOut(a.out);
  fs::path in(input);
  fs::path plots = fs::path(a.out) / "plots";
  const std::string stem = in.stem().string();
  if (in.extension() == ".tsv" && stem.rfind("embeddings", 0) == 0) {
    if (method != "tsne" && method != "pca") throw UsageError("--method must be tsne or pca");
    std::vector<EmbeddingRecord> recs = ReadEmbeddings(input);
    if (recs.empty()) throw FormatError(input + ": no records");
    PointMatrix x(static_cast<Eigen::Index>(recs.size()),
                  static_cast<Eigen::Index>(recs[0].x.size()));
    for (size_t i = 0; i < recs.size(); ++i)
      for (size_t k = 0; k < recs[i].x.size(); ++k) x(i, k) = recs[i].x[k];
    PointMatrix y = method == "pca" ? Pca2(x) : Tsne2(x, {});
    std::vector<ScatterPoint> pts;
    for (size_t i = 0; i < recs.size(); ++i) {
      pts.push_back({y(i, 0), y(i, 1), recs[i].gold, recs[i].visibility == "unseen"});
    }
    WriteText((plots / (stem + "_" + method + ".svg")).string(),
              ScatterSvg(pts, "Event vectors (" + method + "); rings: unseen types"));
  } else if (stem == "saliency") {
    std::ifstream is(input);
    json j = json::parse(is);
    std::vector<Bar> bars;
    const double thr = j.at("threshold");
    for (const json& t : j.at("types")) {
      bars.push_back({t.at("label"), t.at("mean_g1").get<double>() - thr});
    }
    WriteText((plots / "saliency.svg").string(),
              BarSvg(bars, "Trigger saliency relative to the median", "mean g1 - median"));
  } else if (stem == "sweep") {
    std::ifstream is(input);
    json j = json::parse(is);
    std::vector<double> xs;
    Series seen{"F1-Seen", {}}, unseen{"F1-Unseen", {}}, all{"F1", {}};
    auto val = [](const json& m, const char* k) {
      return m[k].is_null() ? 0.0 : m[k].get<double>();
    };
    for (const json& r : j.at("rows")) {
      xs.push_back(r.at("value"));
      seen.y.push_back(val(r["metrics"], "f1_seen"));
      unseen.y.push_back(val(r["metrics"], "f1_unseen"));
      all.y.push_back(val(r["metrics"], "weighted_f1"));
    }
    const std::string param = j.at("param");
    WriteText((plots / ("sweep_" + param + ".svg")).string(),
              LineSvg(xs, {seen, unseen, all}, "Sensitivity to " + param, param));
  } else {
    throw UsageError("unrecognized input " + input +
                     " (expected embeddings_*.tsv, saliency.json or sweep.json)");
  }
  return 0;
}

int DetectCmd(const CommonArgs& a, const std::string& text) {
  if (a.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (utf8::Trim(text).empty()) throw UsageError("--text must be a non-empty sentence");
  Checkpoint ckpt = LoadCheckpoint(a.checkpoint);
  std::unique_ptr<PbctModel> model = RestoreModel(ckpt);
  EventMention m;
  m.id = "detect";
  m.text = text;
  m.visibility = Visibility::kUnseen;
  ad::NoGradGuard no_grad;
  ViewOutput v = model->Forward(m);
  const TriggerSpan& w = v.trigger.best_word_span;
  std::string trigger = utf8::Substr(m.text, w.start, w.end);
  const std::string& label =
      model->catalog().label(static_cast<size_t>(v.classification.prediction));
  json j = {{"text", text},
            {"trigger", trigger},
            {"type", label},
            {"type_visibility",
             model->catalog().IsSeen(v.classification.prediction) ? "seen" : "unseen"}};
  if (v.gate) j["g1"] = v.gate->value()(0, 1);
  std::printf("trigger: %s\ntype: %s\n", trigger.c_str(), label.c_str());
  if (!a.out.empty()) WriteJson(fs::path(a.out) / "detect.json", j);
  return 0;
}

int ValidateParaphrasesCmd(const CommonArgs& a) {
  RunConfig c = ResolveConfig(a);
  PreparedData data = PrepareData(c);
  std::unique_ptr<ParaphraseProvider> p = MakeParaphraser(c, data);
  int64_t checked = 0, kept = 0, fallback = 0;
  std::map<std::string, int64_t> reasons;
  for (const EventMention& m : data.train) {
    if (m.visibility != Visibility::kSeen) continue;
    ++checked;
    RephraseResult r = Rephrase(m, *p, m.TriggerText());
    if (r.fallback) {
      ++fallback;
      ++reasons[r.reason];
    } else {
      ++kept;
    }
  }
  json j = {{"mode", ParaphraseModeName(p->mode())},
            {"checked", checked},
            {"usable", kept},
            {"fallback", fallback},
            {"fallback_reasons", reasons}};
  if (!a.out.empty()) WriteJson(fs::path(a.out) / "metrics" / "paraphrases.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace
}  // namespace pbct

int main(int argc, char** argv) {
  using namespace pbct;
  CLI::App app{"Zero-shot event detection: training, evaluation and analysis"};
  app.require_subcommand(1);
  CommonArgs a;
  std::string resume, split = "test", param, grid, input, method = "tsne", text;
  std::vector<std::string> flags;

  auto* prep = app.add_subcommand("prepare-data", "Partition, split and mask a corpus");
  AddConfigOptions(prep, a);
  prep->add_option("--out", a.out, "Output directory");

  auto* train = app.add_subcommand("train", "Train a model");
  AddConfigOptions(train, a);
  train->add_option("--out", a.out, "Run directory");
  train->add_option("--checkpoint", resume, "Resume from this checkpoint");

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", a.checkpoint, "Checkpoint file");
  eval->add_option("--split", split, "train, validation or test");
  eval->add_option("--out", a.out, "Run directory for the metrics file");

  auto* ablate = app.add_subcommand("ablate", "Train the default and ablated variants");
  AddConfigOptions(ablate, a);
  ablate->add_option("--out", a.out, "Output directory");
  ablate->add_option("--flag", flags, "Ablation flag (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over a hyperparameter grid");
  AddConfigOptions(sweep, a);
  sweep->add_option("--out", a.out, "Output directory");
  sweep->add_option("--param", param, "m1, m2 or lambda")->required();
  sweep->add_option("--grid", grid, "Comma-separated values")->required();

  auto* sal = app.add_subcommand("analyze-saliency", "Per-type trigger saliency");
  sal->add_option("--checkpoint", a.checkpoint, "Checkpoint file");
  sal->add_option("--out", a.out, "Run directory");

  auto* exp = app.add_subcommand("export-embeddings", "Write event vectors of a split");
  exp->add_option("--checkpoint", a.checkpoint, "Checkpoint file");
  exp->add_option("--split", split, "train, validation or test");
  exp->add_option("--out", a.out, "Run directory");

  auto* plot = app.add_subcommand("plot", "Render figures from exported files");
  plot->add_option("--input", input, "embeddings_*.tsv, saliency.json or sweep.json");
  plot->add_option("--method", method, "tsne or pca (embeddings only)");
  plot->add_option("--out", a.out, "Run directory");

  auto* det = app.add_subcommand("detect", "Detect the trigger and type of one sentence");
  det->add_option("--checkpoint", a.checkpoint, "Checkpoint file");
  det->add_option("--text", text, "Sentence");
  det->add_option("--out", a.out, "Optional directory for detect.json");

  auto* val =
      app.add_subcommand("validate-paraphrases", "Check trigger preservation of paraphrases");
  AddConfigOptions(val, a);
  val->add_option("--out", a.out, "Run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*prep) return PrepareDataCmd(a);
    if (*train) return TrainCmd(a, resume);
    if (*eval) return EvaluateCmd(a, split);
    if (*ablate) return AblateCmd(a, flags);
    if (*sweep) return SweepCmd(a, param, grid);
    if (*sal) return SaliencyCmd(a);
    if (*exp) return ExportCmd(a, split);
    if (*plot) return PlotCmd(a, input, method);
    if (*det) return DetectCmd(a, text);
    if (*val) return ValidateParaphrasesCmd(a);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
