// Copyright 2026 The TLDR Authors.
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

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_util.h"
#include "tldr/config.h"
#include "tldr/error.h"
#include "tldr/manifest.h"
#include "tldr/pipeline.h"
#include "tldr/synthetic.h"

namespace tldr {
namespace {

namespace fs = std::filesystem;
using testing::ReadFile;
using testing::TempDir;
using testing::WriteFile;

PipelineConfig SmallConfig(const SyntheticCorpus& corpus, const std::string& out) {
  PipelineConfig c;
  c.paths.manifest = corpus.manifest;
  c.paths.embeddings = corpus.embeddings;
  c.paths.keyword_embeddings = corpus.keyword_embeddings;
  c.paths.stopwords = corpus.stopwords;
  c.paths.output = out;
  c.codebook.k = 32;
  c.cluster.n = 6;
  c.train.epochs = 2;
  c.train.batch = 1024;
  c.seed = 3;
  c.threads = 1;
  return c;
}

SyntheticCorpus SmallCorpus(const TempDir& dir, std::size_t records = 1500) {
  SyntheticOptions opts;
  opts.records = records;
  opts.tokens = 8;
  opts.dim = 8;
  opts.concepts = 6;
  opts.seed = 11;
  return WriteSyntheticCorpus(opts, dir.file("corpus"));
}

std::vector<std::string> Ids(const std::string& manifest) {
  std::vector<std::string> ids;
  for (const auto& r : ReadManifest(manifest).records) ids.push_back(r.id);
  return ids;
}

void ExpectSameTree(const std::string& a, const std::string& b) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
  std::set<std::string> other;
  for (const auto& e : fs::directory_iterator(b)) other.insert(e.path().filename().string());
  EXPECT_EQ(names, other);
  for (const auto& name : names) {
    EXPECT_EQ(ReadFile(a + "/" + name), ReadFile(b + "/" + name)) << name;
  }
}

TEST(PipelineTest, ProducesEveryArtifact) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir);
  const PipelineConfig cfg = SmallConfig(corpus, dir.file("out"));
  const PipelineResult result = RunPipeline(cfg);

  for (const char* name : {"run.json", "keywords.json", "codebook_init.emb", "codebook_init.json", "codebook.emb",
                           "codebook.json", "train.json", "index_vectors.jsonl", "cluster_model.json",
                           "assignments.jsonl", "plan.json", "selected.jsonl", "reduced.jsonl", "report.json",
                           "report.txt", "report_itm_before.csv", "report_itm_after.csv"}) {
    EXPECT_TRUE(fs::exists(dir.file("out/") + name)) << name;
  }
  for (const auto& e : fs::directory_iterator(dir.file("out"))) {
    EXPECT_NE(e.path().extension(), ".partial") << e.path();
  }
  EXPECT_FALSE(fs::exists(dir.file("out/filtered.jsonl")));

  const std::size_t n = 1500, lo = n / 4;
  EXPECT_GE(result.summary.after_count, lo);
  EXPECT_LE(result.summary.after_count, lo + cfg.cluster.n);
  EXPECT_EQ(result.summary.before_count, n);

  // Self-describing artifacts.
  const std::string hash = ConfigHash(cfg);
  for (const char* name : {"keywords.json", "train.json", "cluster_model.json", "plan.json", "report.json",
                           "codebook.json"}) {
    const auto json = nlohmann::json::parse(ReadFile(dir.file("out/") + name));
    EXPECT_EQ(json.at("config_hash"), hash) << name;
    EXPECT_TRUE(json.contains("seed")) << name;
  }
  const auto run = nlohmann::json::parse(ReadFile(dir.file("out/run.json")));
  EXPECT_EQ(run.at("config_hash"), hash);
  EXPECT_EQ(run.at("stage_seeds").size(), 9u);

  for (const auto& r : ReadManifest(result.reduced_manifest).records) {
    EXPECT_TRUE(r.selected.value_or(false));
    ASSERT_TRUE(r.cluster.has_value());
    EXPECT_LT(*r.cluster, cfg.cluster.n);
    ASSERT_TRUE(r.refined_caption.has_value());
    EXPECT_TRUE(ValidateRecord(r).empty());
  }
}

TEST(PipelineTest, ByteIdenticalAcrossRunsAndThreadCounts) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir);
  PipelineConfig cfg = SmallConfig(corpus, dir.file("a"));
  RunPipeline(cfg);
  cfg.paths.output = dir.file("b");
  RunPipeline(cfg);
  cfg.paths.output = dir.file("c");
  cfg.threads = 4;
  RunPipeline(cfg);
  ExpectSameTree(dir.file("a"), dir.file("b"));
  ExpectSameTree(dir.file("a"), dir.file("c"));
}

TEST(PipelineTest, FullRatioIsIdentityWithRefinedCaptions) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir, 400);
  PipelineConfig cfg = SmallConfig(corpus, dir.file("out"));
  cfg.select.m = 100;
  const PipelineResult result = RunPipeline(cfg);
  EXPECT_EQ(Ids(result.reduced_manifest), Ids(corpus.manifest));
  const auto before = ReadManifest(corpus.manifest).records;
  const auto after = ReadManifest(result.reduced_manifest).records;
  for (std::size_t i = 0; i < after.size(); ++i) {
    ASSERT_TRUE(after[i].refined_caption.has_value());
    EXPECT_EQ(after[i].refined_caption->rfind(before[i].caption, 0), 0u);
  }
  EXPECT_DOUBLE_EQ(result.summary.ratio, 1.0);
}

TEST(PipelineTest, ItmFilterStage) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir, 800);
  PipelineConfig cfg = SmallConfig(corpus, dir.file("out"));
  cfg.select.drop_fraction = 0.5;
  const PipelineResult result = RunPipeline(cfg);
  const std::size_t selected = ReadManifest(dir.file("out/selected.jsonl")).count();
  EXPECT_EQ(ReadManifest(dir.file("out/filtered.jsonl")).count(), selected - selected / 2);
  EXPECT_EQ(result.summary.after_count, selected - selected / 2);
}

TEST(PipelineTest, AlternativeModesRun) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir, 300);
  const std::vector<std::tuple<std::string, std::string, std::string>> combos = {
      {"xavier", "mean_code", "distance_far"}, {"tags", "raw_index", "distance_near"},
      {"keywords", "embed_mean", "score_hard"}, {"xavier", "hist", "score_easy"}};
  int i = 0;
  for (const auto& [init, feature, strategy] : combos) {
    PipelineConfig cfg = SmallConfig(corpus, dir.file("out" + std::to_string(i++)));
    cfg.codebook.init = init;
    cfg.cluster.feature = feature;
    cfg.select.strategy = strategy;
    const PipelineResult r = RunPipeline(cfg);
    EXPECT_GE(r.summary.after_count, 75u) << init << " " << feature << " " << strategy;
    EXPECT_LE(r.summary.after_count, 75u + cfg.cluster.n);
    EXPECT_EQ(r.summary.strategy, strategy);
  }
}

TEST(PipelineTest, StagesRerunInIsolation) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir, 500);
  const PipelineConfig cfg = SmallConfig(corpus, dir.file("out"));
  RunPipeline(cfg);
  const StageContext ctx(cfg);
  const std::string out = dir.file("out/");
  RunSelectStage(ctx, cfg.paths.manifest, out + "assignments.jsonl", dir.file("sel.jsonl"), dir.file("plan.json"));
  EXPECT_EQ(ReadFile(dir.file("sel.jsonl")), ReadFile(out + "selected.jsonl"));
  EXPECT_EQ(ReadFile(dir.file("plan.json")), ReadFile(out + "plan.json"));
  RunQuantizeStage(ctx, cfg.paths.manifest, cfg.paths.embeddings, out + "codebook.emb", dir.file("iv.jsonl"),
                   dir.file("cb.emb"));
  EXPECT_EQ(ReadFile(dir.file("iv.jsonl")), ReadFile(out + "index_vectors.jsonl"));
  RunClusterStage(ctx, out + "index_vectors.jsonl", out + "codebook.emb", cfg.paths.embeddings,
                  dir.file("model.json"), dir.file("as.jsonl"));
  EXPECT_EQ(ReadFile(dir.file("model.json")), ReadFile(out + "cluster_model.json"));
}

TEST(PipelineTest, ErrorsNameTheStage) {
  TempDir dir;
  const auto corpus = SmallCorpus(dir, 200);
  PipelineConfig cfg = SmallConfig(corpus, dir.file("out"));
  cfg.paths.embeddings = dir.file("missing.emb");
  try {
    RunPipeline(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }

  // A manifest record without stored embeddings fails in quantize.
  auto records = ReadManifest(corpus.manifest).records;
  records.push_back(records.front());
  records.back().id = "orphan";
  WriteManifest(records, dir.file("orphan.jsonl"));
  cfg = SmallConfig(corpus, dir.file("out2"));
  cfg.paths.manifest = dir.file("orphan.jsonl");
  try {
    RunPipeline(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "quantize");
    EXPECT_NE(std::string(e.what()).find("orphan"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(dir.file("out2/index_vectors.jsonl")));
}

TEST(PartialFileTest, OnlyCommitPublishes) {
  TempDir dir;
  {
    PartialFile f(dir.file("x.json"));
    WriteFile(f.temp_path(), "half");
  }
  EXPECT_TRUE(fs::exists(dir.file("x.json.partial")));
  EXPECT_FALSE(fs::exists(dir.file("x.json")));
  PartialFile g(dir.file("x.json"));
  g.Commit();
  EXPECT_EQ(ReadFile(dir.file("x.json")), "half");
}

#ifdef TLDR_CLI_PATH
int RunCli(const std::string& args, const std::string& log) {
  const int status = std::system((std::string(TLDR_CLI_PATH) + " " + args + " >" + log + " 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, RunAndStageSubcommands) {
  TempDir dir;
  const std::string log = dir.file("log.txt");
  ASSERT_EQ(RunCli("synth " + dir.file("c") + " --records 300 --tokens 4 --dim 4 --concepts 3", log), 0)
      << ReadFile(log);
  const std::string cfg = dir.file("cfg.json");
  WriteFile(cfg, nlohmann::json{{"paths",
                                 {{"manifest", dir.file("c/manifest.jsonl")},
                                  {"embeddings", dir.file("c/embeddings.emb")},
                                  {"keyword_embeddings", dir.file("c/keyword_embeddings.jsonl")},
                                  {"stopwords", dir.file("c/stopwords.txt")}}},
                                {"codebook", {{"k", 8}}},
                                {"cluster", {{"n", 3}}}}
                     .dump());
  ASSERT_EQ(RunCli("run --config " + cfg + " --output " + dir.file("out") + " select.m=50", log), 0) << ReadFile(log);
  EXPECT_GE(ReadManifest(dir.file("out/reduced.jsonl")).count(), 150u);

  ASSERT_EQ(RunCli("keywords --config " + cfg + " --output " + dir.file("solo") + " select.m=50", log), 0) << ReadFile(log);
  EXPECT_EQ(ReadFile(dir.file("solo/keywords.json")), ReadFile(dir.file("out/keywords.json")));
  ASSERT_EQ(RunCli("refine --config " + cfg + " --manifest " + dir.file("out/selected.jsonl") + " -o " +
                       dir.file("solo/reduced.jsonl") + " --output " + dir.file("solo") + " select.m=50",
                   log),
            0)
      << ReadFile(log);
  EXPECT_EQ(ReadFile(dir.file("solo/reduced.jsonl")), ReadFile(dir.file("out/reduced.jsonl")));

  EXPECT_NE(RunCli("run --config " + cfg + " select.m=0", log), 0);
  EXPECT_NE(ReadFile(log).find("config"), std::string::npos);
  EXPECT_NE(RunCli("quantize --config " + cfg + " --codebook " + dir.file("nope.emb"), log), 0);
  EXPECT_NE(ReadFile(log).find("quantize"), std::string::npos);
}
#endif

}  // namespace
}  // namespace tldr
