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

#include "pbct/config.h"

#include <gtest/gtest.h>

#include <fstream>

#include "pbct/status.h"
#include "test_support.h"

namespace pbct {
namespace {

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.lambda, 0.7);
  EXPECT_EQ(c.m1, 1.0);
  EXPECT_EQ(c.m2, 0.6);
  EXPECT_EQ(c.lr_encoder, 1e-6);
  EXPECT_EQ(c.lr_head, 1e-3);
  EXPECT_EQ(c.ground_cost, "indicator");
  EXPECT_EQ(c.sinkhorn_epsilon, 0.05);
}

TEST(Config, Presets) {
  EXPECT_EQ(Preset("ace").lr_encoder, 1e-6);
  EXPECT_EQ(Preset("ace-m1-2").m1, 2.0);
  EXPECT_EQ(Preset("fewevent").lr_encoder, 1e-5);
  EXPECT_EQ(Preset("fewevent").lr_head, 1e-2);
  EXPECT_EQ(Preset("fewevent").corpus_format, "fewevent");
  EXPECT_EQ(Preset("toy").synthetic, "smoke");
  for (const std::string& name : PresetNames()) EXPECT_NO_THROW(Preset(name)) << name;
  EXPECT_NO_THROW(ValidateConfig(Preset("toy")));
  EXPECT_THROW(Preset("huge"), ConfigError);
}

TEST(Config, EveryKeyRoundTrips) {
  RunConfig c = Preset("toy");
  c.corpus = "some file.jsonl";
  c.seed = 123456789012345ULL;
  c.m2 = 0.125;
  c.disable_sentinel = true;
  RunConfig back = ParseConfig(SerializeConfig(c));
  EXPECT_EQ(back, c);
  for (const std::string& key : ConfigKeys()) {
    RunConfig d;
    SetConfigValue(d, key, GetConfigValue(c, key));
    EXPECT_EQ(GetConfigValue(d, key), GetConfigValue(c, key)) << key;
  }
}

TEST(Config, ParseFileSyntax) {
  RunConfig c = ParseConfig("# comment\npreset = toy\n\n  lambda = 0.5  # trailing\nm1=2\n");
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.m1, 2.0);
  EXPECT_EQ(c.synthetic, "smoke");
}

TEST(Config, ParseErrorsNameTheLine) {
  auto message = [](std::string_view text) {
    try {
      ParseConfig(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("lambda = 1\nnot a pair\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("bogus_key = 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("lambda = x\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("batch_size = 1.5\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("disable_sentinel = maybe\n").find("line 1"), std::string::npos);
}

TEST(Config, EnvironmentOverrides) {
  RunConfig c;
  ApplyEnvironment(c, {{"PBCT_LR_HEAD", "0.01"},
                       {"PBCT_DISABLE_CONTRASTIVE", "true"},
                       {"HOME", "/root"},
                       {"PBCT_UNRELATED_THING", "1"}});
  EXPECT_EQ(c.lr_head, 0.01);
  EXPECT_TRUE(c.disable_contrastive);
  EXPECT_THROW(ApplyEnvironment(c, {{"PBCT_LAMBDA", "lots"}}), ConfigError);
}

TEST(Config, LoadFile) {
  auto dir = testing::TempDir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "preset = toy\nmax_steps = 12\n";
  }
  EXPECT_EQ(LoadConfigFile((dir / "run.cfg").string()).max_steps, 12);
  EXPECT_THROW(LoadConfigFile((dir / "missing.cfg").string()), Error);
}

TEST(Config, Validation) {
  auto invalid = [](auto mutate) {
    RunConfig c = Preset("toy");
    mutate(c);
    EXPECT_THROW(ValidateConfig(c), ConfigError);
  };
  invalid([](RunConfig& c) { c.lambda = -0.1; });
  invalid([](RunConfig& c) { c.lr_head = 0.0; });
  invalid([](RunConfig& c) { c.batch_size = 0; });
  invalid([](RunConfig& c) { c.max_steps = 0; });
  invalid([](RunConfig& c) { c.ground_cost = "cosine"; });
  invalid([](RunConfig& c) { c.encoder = "pretrained"; });
  invalid([](RunConfig& c) { c.paraphrase_mode = "external_backtranslation"; });
  invalid([](RunConfig& c) { c.toy_heads = 3; });
  invalid([](RunConfig& c) { c.synthetic.clear(); });
  invalid([](RunConfig& c) { c.nmi_normalization = "max"; });
  RunConfig ok = Preset("toy");
  ok.lambda = 0.0;
  EXPECT_NO_THROW(ValidateConfig(ok));
}

}  // namespace
}  // namespace pbct
