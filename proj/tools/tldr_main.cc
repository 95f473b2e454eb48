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

// tldr: command-line front end for the reduction pipeline.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tldr/config.h"
#include "tldr/error.h"
#include "tldr/pipeline.h"
#include "tldr/synthetic.h"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output;
  std::vector<std::string> overrides;
};

tldr::PipelineConfig LoadConfig(const GlobalFlags& flags) {
  std::vector<std::string> overrides = flags.overrides;
  if (flags.seed) overrides.push_back("seed=" + std::to_string(*flags.seed));
  if (flags.threads) overrides.push_back("threads=" + std::to_string(*flags.threads));
  if (flags.output) overrides.push_back("paths.output=" + *flags.output);
  std::optional<std::string> file;
  if (!flags.config.empty()) file = flags.config;
  return tldr::BuildConfig(file, overrides);
}

// Resolves an optional file argument against the output directory.
std::string OutPath(const tldr::PipelineConfig& cfg, const std::string& given, const char* name) {
  if (!given.empty()) return given;
  std::filesystem::create_directories(cfg.paths.output);
  return (std::filesystem::path(cfg.paths.output) / name).string();
}

std::string Or(const std::string& given, const std::string& fallback) {
  return given.empty() ? fallback : given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tldr: codebook-driven reduction of image-text datasets"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "global seed");
  app.add_option("--threads", flags.threads, "worker threads (fallback: TLDR_THREADS)");
  app.add_option("--output", flags.output, "output directory");

  std::string stage;
  std::string manifest, store, codebook, keywords, index, assignments, plan, before, after;
  std::string out, out2, trace;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("overrides", flags.overrides, "dotted config overrides, e.g. select.m=50");
    sub->callback([&, name] { stage = name; });
    return sub;
  };

  CLI::App* kw = add("keywords", "extract the top-K keyword table from captions");
  kw->add_option("--manifest", manifest, "input manifest (default: paths.manifest)");
  kw->add_option("-o,--out", out, "keyword table JSON");

  CLI::App* init = add("init-codebook", "initialize a K x D codebook");
  init->add_option("--keywords", keywords, "keyword table JSON (keywords init)");
  init->add_option("-o,--out", out, "codebook store (.emb)");

  CLI::App* train = add("train-codebook", "EMA codebook training over the token store");
  train->add_option("--codebook", codebook, "initial codebook (.emb)")->required();
  train->add_option("--store", store, "token store (default: paths.embeddings)");
  train->add_option("-o,--out", out, "trained codebook (.emb)");
  train->add_option("--trace", trace, "loss trace JSON");

  CLI::App* quant = add("quantize", "map every record to its index vector");
  quant->add_option("--manifest", manifest, "input manifest (default: paths.manifest)");
  quant->add_option("--store", store, "token store (default: paths.embeddings)");
  quant->add_option("--codebook", codebook, "codebook (.emb)")->required();
  quant->add_option("-o,--out", out, "index vectors JSONL");
  quant->add_option("--out-codebook", out2, "codebook with usage counts (.emb)");

  CLI::App* clus = add("cluster", "K-Means over index-vector features");
  clus->add_option("--index", index, "index vectors JSONL")->required();
  clus->add_option("--codebook", codebook, "codebook (.emb)")->required();
  clus->add_option("--store", store, "token store, for embed_mean (default: paths.embeddings)");
  clus->add_option("-o,--out", out, "cluster model JSON");
  clus->add_option("--assignments", out2, "assignments JSONL");

  CLI::App* sel = add("select", "per-cluster sampling at M percent");
  sel->add_option("--manifest", manifest, "input manifest (default: paths.manifest)");
  sel->add_option("--assignments", assignments, "assignments JSONL")->required();
  sel->add_option("-o,--out", out, "selected manifest");
  sel->add_option("--plan", out2, "selection plan JSON");

  CLI::App* filt = add("filter", "drop the lowest-itm fraction (select.drop_fraction)");
  filt->add_option("--manifest", manifest, "input manifest (default: paths.manifest)");
  filt->add_option("-o,--out", out, "filtered manifest");

  CLI::App* ref = add("refine", "append generated captions to the originals");
  ref->add_option("--manifest", manifest, "input manifest (default: paths.manifest)");
  ref->add_option("-o,--out", out, "refined manifest");

  CLI::App* st = add("stats", "reduction report and itm histograms");
  st->add_option("--before", before, "original manifest (default: paths.manifest)");
  st->add_option("--after", after, "reduced manifest")->required();
  st->add_option("--plan", plan, "selection plan JSON");
  st->add_option("-o,--out", out, "report JSON");

  add("run", "run every stage end to end");

  tldr::SyntheticOptions synth_opts;
  std::string synth_dir;
  CLI::App* synth = app.add_subcommand("synth", "write a deterministic synthetic corpus");
  synth->add_option("dir", synth_dir, "destination directory")->required();
  synth->add_option("--records", synth_opts.records, "record count");
  synth->add_option("--tokens", synth_opts.tokens, "tokens per record (L)");
  synth->add_option("--dim", synth_opts.dim, "token dimension (D)");
  synth->add_option("--concepts", synth_opts.concepts, "latent concepts");
  synth->add_option("--seed", synth_opts.seed, "generator seed");
  synth->callback([&] { stage = "synth"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (stage == "synth") {
      const tldr::SyntheticCorpus c = tldr::WriteSyntheticCorpus(synth_opts, synth_dir);
      std::cout << "manifest: " << c.manifest << "\nembeddings: " << c.embeddings
                << "\nkeyword_embeddings: " << c.keyword_embeddings << "\nstopwords: " << c.stopwords << "\n";
      return 0;
    }

    tldr::PipelineConfig cfg;
    try {
      cfg = LoadConfig(flags);
      tldr::ValidateConfig(cfg, stage == "run");
    } catch (const std::exception& e) {
      throw tldr::StageError("config", e.what());
    }

    if (stage == "run") {
      const tldr::PipelineResult result = tldr::RunPipeline(cfg);
      std::cout << tldr::ReductionReportToText(result.summary);
      std::cout << "reduced manifest: " << result.reduced_manifest << "\nreport: " << result.report << "\n";
      return 0;
    }

    const tldr::StageContext ctx(cfg);
    try {
      if (stage == "keywords") {
        tldr::RunKeywordsStage(ctx, Or(manifest, cfg.paths.manifest), OutPath(cfg, out, "keywords.json"));
      } else if (stage == "init-codebook") {
        tldr::RunInitCodebookStage(ctx, keywords, OutPath(cfg, out, "codebook_init.emb"));
      } else if (stage == "train-codebook") {
        tldr::RunTrainCodebookStage(ctx, codebook, Or(store, cfg.paths.embeddings),
                                    OutPath(cfg, out, "codebook.emb"), OutPath(cfg, trace, "train.json"));
      } else if (stage == "quantize") {
        tldr::RunQuantizeStage(ctx, Or(manifest, cfg.paths.manifest), Or(store, cfg.paths.embeddings), codebook,
                               OutPath(cfg, out, "index_vectors.jsonl"), Or(out2, codebook));
      } else if (stage == "cluster") {
        tldr::RunClusterStage(ctx, index, codebook, Or(store, cfg.paths.embeddings),
                              OutPath(cfg, out, "cluster_model.json"), OutPath(cfg, out2, "assignments.jsonl"));
      } else if (stage == "select") {
        tldr::RunSelectStage(ctx, Or(manifest, cfg.paths.manifest), assignments,
                             OutPath(cfg, out, "selected.jsonl"), OutPath(cfg, out2, "plan.json"));
      } else if (stage == "filter") {
        tldr::RunFilterStage(ctx, Or(manifest, cfg.paths.manifest), OutPath(cfg, out, "filtered.jsonl"));
      } else if (stage == "refine") {
        tldr::RunRefineStage(ctx, Or(manifest, cfg.paths.manifest), OutPath(cfg, out, "reduced.jsonl"));
      } else if (stage == "stats") {
        const tldr::ReductionReport report = tldr::RunStatsStage(
            ctx, Or(before, cfg.paths.manifest), after, plan, OutPath(cfg, out, "report.json"));
        std::cout << tldr::ReductionReportToText(report);
      }
    } catch (const tldr::StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw tldr::StageError(stage, e.what());
    }
  } catch (const std::exception& e) {
    std::cerr << "tldr: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
