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

#include "tldr/pipeline.h"

#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "tldr/cluster.h"
#include "tldr/codebook.h"
#include "tldr/embstore.h"
#include "tldr/keywords.h"
#include "tldr/manifest.h"
#include "tldr/parallel.h"
#include "tldr/random.h"
#include "tldr/refine.h"
#include "tldr/select.h"
#include "tldr/vq.h"

namespace tldr {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStages[] = {"keywords", "init-codebook", "train-codebook", "quantize",
                                   "cluster",  "select",        "filter",         "refine",
                                   "stats"};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failure on '" + path + "'");
}

void WriteJsonAtomically(const std::string& path, const nlohmann::ordered_json& json) {
  PartialFile file(path);
  WriteText(file.temp_path(), json.dump(2) + "\n");
  file.Commit();
}

nlohmann::json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed JSON in '" + path + "': " + e.what());
  }
}

void WriteManifestAtomically(const std::vector<DatasetRecord>& records, const std::string& path) {
  PartialFile file(path);
  WriteManifest(records, file.temp_path());
  file.Commit();
}

// Saves both codebook files through partial temporaries.
void SaveCodebookAtomically(const Codebook& codebook, const std::string& path, double beta,
                            const nlohmann::json& meta) {
  PartialFile store(path);
  PartialFile sidecar(CodebookSidecarPath(path));
  SaveCodebook(codebook, store.temp_path(), sidecar.temp_path(), beta, meta);
  store.Commit();
  sidecar.Commit();
}

std::string Sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::vector<double> ItmScores(const DatasetManifest& manifest) {
  std::vector<double> scores;
  for (const auto& r : manifest.records) {
    if (auto itm = r.Score(kItmScore)) scores.push_back(*itm);
  }
  return scores;
}

}  // namespace

StageError::StageError(std::string stage, const std::string& message)
    : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}

StageContext::StageContext(PipelineConfig config)
    : config_(std::move(config)), config_hash_(ConfigHash(config_)), threads_(ResolveThreads(config_.threads)) {}

std::uint64_t StageContext::StageSeed(std::string_view stage) const {
  return DeriveSeed(config_.seed, stage);
}

nlohmann::ordered_json StageContext::Meta(std::string_view stage) const {
  nlohmann::ordered_json meta;
  meta["config_hash"] = config_hash_;
  meta["seed"] = StageSeed(stage);
  meta["stage"] = std::string(stage);
  return meta;
}

PartialFile::PartialFile(std::string path) : path_(std::move(path)), temp_(path_ + ".partial") {}

void PartialFile::Commit() {
  std::error_code ec;
  fs::rename(temp_, path_, ec);
  if (ec) throw IoError("cannot rename '" + temp_ + "' to '" + path_ + "': " + ec.message());
}

void RunKeywordsStage(const StageContext& ctx, const std::string& manifest_path,
                      const std::string& out_path) {
  const auto& cfg = ctx.config();
  std::vector<std::string> captions;
  ManifestReader reader(manifest_path);
  DatasetRecord record;
  while (reader.Next(record)) captions.push_back(std::move(record.caption));
  const StopwordSet stopwords = cfg.paths.stopwords.empty() ? StopwordSet{} : LoadStopwords(cfg.paths.stopwords);
  const KeywordTable table =
      ExtractKeywords(captions, cfg.codebook.k, stopwords, cfg.codebook.max_ngram, ctx.threads());

  nlohmann::ordered_json json = ctx.Meta("keywords");
  json["K"] = cfg.codebook.k;
  json["max_ngram"] = cfg.codebook.max_ngram;
  json["captions"] = captions.size();
  json["entries"] = KeywordTableToJson(table)["entries"];
  WriteJsonAtomically(out_path, json);
}

void RunInitCodebookStage(const StageContext& ctx, const std::string& keywords_path,
                          const std::string& out_codebook) {
  const auto& cfg = ctx.config();
  const CodebookInit mode = ParseCodebookInit(cfg.codebook.init);
  const EmbeddingStore store = EmbeddingStore::Open(cfg.paths.embeddings);
  const std::size_t dim = store.cols();

  std::vector<PhraseEmbedding> embeddings;
  if (mode != CodebookInit::kXavier) {
    const std::vector<PhraseEmbedding> sidecar = ReadPhraseEmbeddings(cfg.paths.keyword_embeddings);
    if (mode == CodebookInit::kKeywords) {
      if (keywords_path.empty()) throw InvalidArgument("keyword init needs a keyword table");
      const KeywordTable table = KeywordTableFromJson(ReadJson(keywords_path));
      embeddings = MatchKeywordEmbeddings(table, sidecar, cfg.codebook.k);
    } else {
      const std::size_t take = std::min(cfg.codebook.k, sidecar.size());
      embeddings.assign(sidecar.begin(), sidecar.begin() + static_cast<std::ptrdiff_t>(take));
    }
  }
  const Codebook codebook =
      InitCodebook(mode, cfg.codebook.k, dim, embeddings, ctx.StageSeed("init-codebook"));
  nlohmann::ordered_json meta = ctx.Meta("init-codebook");
  meta["init"] = cfg.codebook.init;
  meta["provided"] = embeddings.size();
  SaveCodebookAtomically(codebook, out_codebook, cfg.codebook.beta, meta);
}

void RunTrainCodebookStage(const StageContext& ctx, const std::string& codebook_path,
                           const std::string& store_path, const std::string& out_codebook,
                           const std::string& trace_path) {
  const auto& cfg = ctx.config();
  CodebookFile file = LoadCodebook(codebook_path);
  const EmbeddingStore store = EmbeddingStore::Open(store_path);

  TrainOptions options;
  options.epochs = cfg.train.epochs;
  options.batch_size = cfg.train.batch;
  options.ema.decay = cfg.train.decay;
  options.ema.epsilon = cfg.train.epsilon;
  options.ema.reseed_after = cfg.train.reseed;
  options.beta = cfg.codebook.beta;
  options.seed = ctx.StageSeed("train-codebook");
  options.threads = ctx.threads();
  TrainResult result = TrainCodebook(store, std::move(file.codebook), options);

  SaveCodebookAtomically(result.codebook, out_codebook, cfg.codebook.beta, ctx.Meta("train-codebook"));
  nlohmann::ordered_json trace = ctx.Meta("train-codebook");
  trace["epochs"] = options.epochs;
  trace["batch"] = options.batch_size;
  trace["decay"] = options.ema.decay;
  trace["beta"] = options.beta;
  trace["loss_trace"] = result.loss_trace;
  WriteJsonAtomically(trace_path, trace);
}

void RunQuantizeStage(const StageContext& ctx, const std::string& manifest_path,
                      const std::string& store_path, const std::string& codebook_path,
                      const std::string& out_index, const std::string& out_codebook) {
  const DatasetManifest manifest = ReadManifest(manifest_path);
  const EmbeddingStore store = EmbeddingStore::Open(store_path);
  CodebookFile file = LoadCodebook(codebook_path);

  std::vector<std::string> ids;
  std::vector<std::size_t> indices;
  ids.reserve(manifest.count());
  indices.reserve(manifest.count());
  for (const auto& r : manifest.records) {
    ids.push_back(r.id);
    indices.push_back(store.IndexOf(r.id));
  }
  const std::vector<IndexVector> vectors = QuantizeStore(store, indices, file.codebook, ctx.threads());

  nlohmann::ordered_json meta = ctx.Meta("quantize");
  meta["K"] = file.codebook.size();
  meta["L"] = store.rows();
  PartialFile index(out_index);
  WriteIndexVectors(index.temp_path(), ids, vectors, meta);
  index.Commit();
  SaveCodebookAtomically(file.codebook, out_codebook, file.beta, ctx.Meta("quantize"));
}

void RunClusterStage(const StageContext& ctx, const std::string& index_path,
                     const std::string& codebook_path, const std::string& store_path,
                     const std::string& out_model, const std::string& out_assignments) {
  const auto& cfg = ctx.config();
  const FeatureMode mode = ParseFeatureMode(cfg.cluster.feature);
  const IndexVectorFile index = ReadIndexVectors(index_path);
  const CodebookFile codebook = LoadCodebook(codebook_path);
  std::optional<EmbeddingStore> store;
  if (mode == FeatureMode::kEmbedMean) store.emplace(EmbeddingStore::Open(store_path));

  std::vector<ClusterFeature> features(index.ids.size());
  ParallelForChunks(features.size(), 256, ctx.threads(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      FeatureInputs inputs;
      inputs.codebook = &codebook.codebook;
      TokenMatrix tokens;
      if (store) {
        tokens = store->Fetch(index.ids[i]);
        inputs.tokens = &tokens;
      }
      features[i] = BuildFeature(index.vectors[i], mode, inputs);
    }
  });

  KMeansOptions options;
  options.clusters = cfg.cluster.n;
  options.max_iter = cfg.cluster.max_iter;
  options.tol = cfg.cluster.tol;
  options.seed = ctx.StageSeed("cluster");
  options.threads = ctx.threads();
  const KMeansResult fit = KMeansFit(features, options);

  nlohmann::ordered_json model = ctx.Meta("cluster");
  const nlohmann::ordered_json fitted = ClusterModelToJson(fit.model);
  for (const auto& [key, value] : fitted.items()) {
    if (key != "seed") model[key] = value;
  }
  WriteJsonAtomically(out_model, model);

  std::vector<AssignmentRecord> records(index.ids.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i] = {index.ids[i], fit.labels[i], fit.distances[i]};
  }
  PartialFile assignments(out_assignments);
  WriteAssignments(assignments.temp_path(), records, ctx.Meta("cluster"));
  assignments.Commit();
}

void RunSelectStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& assignments_path, const std::string& out_manifest,
                    const std::string& out_plan) {
  const auto& cfg = ctx.config();
  DatasetManifest manifest = ReadManifest(manifest_path);
  std::unordered_map<std::string, AssignmentRecord> by_id;
  for (auto& a : ReadAssignments(assignments_path)) by_id.emplace(a.id, std::move(a));

  std::vector<Candidate> candidates;
  candidates.reserve(manifest.count());
  for (const auto& r : manifest.records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw InvalidArgument("no cluster assignment for id '" + r.id + "'");
    candidates.push_back({r.id, static_cast<ClusterId>(it->second.cluster), it->second.distance,
                          r.Score(cfg.select.score)});
  }

  const SelectStrategy strategy = ParseSelectStrategy(cfg.select.strategy);
  const std::uint64_t seed = ctx.StageSeed("select");
  SelectionPlan plan;
  switch (strategy) {
    case SelectStrategy::kUniform: {
      std::map<ClusterId, std::vector<std::string>> clusters;
      for (const auto& c : candidates) clusters[c.cluster].push_back(c.id);
      plan = UniformSelect(clusters, cfg.select.m, seed);
      break;
    }
    case SelectStrategy::kDistanceFar:
    case SelectStrategy::kDistanceNear:
      plan = DistanceSelect(candidates, cfg.select.m,
                            strategy == SelectStrategy::kDistanceFar ? DistanceMode::kFarthest
                                                                     : DistanceMode::kNearest);
      plan.seed = seed;
      break;
    case SelectStrategy::kScoreHard:
    case SelectStrategy::kScoreEasy:
      plan = ScoreSelect(candidates, cfg.select.m,
                         strategy == SelectStrategy::kScoreHard ? ScoreMode::kHard : ScoreMode::kEasy);
      plan.seed = seed;
      break;
  }

  const std::unordered_set<std::string> chosen(plan.selected.begin(), plan.selected.end());
  std::vector<DatasetRecord> kept;
  kept.reserve(chosen.size());
  for (auto& r : manifest.records) {
    if (!chosen.contains(r.id)) continue;
    r.cluster = static_cast<std::uint64_t>(by_id.at(r.id).cluster);
    r.selected = true;
    kept.push_back(std::move(r));
  }
  WriteManifestAtomically(kept, out_manifest);

  nlohmann::ordered_json json = ctx.Meta("select");
  const nlohmann::ordered_json plan_json = SelectionPlanToJson(plan);
  for (const auto& [key, value] : plan_json.items()) {
    if (key != "seed") json[key] = value;
  }
  WriteJsonAtomically(out_plan, json);
}

void RunFilterStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& out_manifest) {
  DatasetManifest manifest = ReadManifest(manifest_path);
  std::vector<ScoredId> items;
  items.reserve(manifest.count());
  for (const auto& r : manifest.records) items.push_back({r.id, r.Score(kItmScore)});
  const std::vector<std::string> kept_ids = ItmFilter(items, ctx.config().select.drop_fraction);
  const std::unordered_set<std::string> kept_set(kept_ids.begin(), kept_ids.end());
  std::vector<DatasetRecord> kept;
  kept.reserve(kept_ids.size());
  for (auto& r : manifest.records) {
    if (kept_set.contains(r.id)) kept.push_back(std::move(r));
  }
  WriteManifestAtomically(kept, out_manifest);
}

void RunRefineStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& out_manifest) {
  DatasetManifest manifest = ReadManifest(manifest_path);
  RefineManifest(manifest, ctx.config().refine.max_words);
  WriteManifestAtomically(manifest.records, out_manifest);
}

ReductionReport RunStatsStage(const StageContext& ctx, const std::string& before_path,
                              const std::string& after_path, const std::string& plan_path,
                              const std::string& out_report) {
  const auto& cfg = ctx.config();
  const DatasetManifest before = ReadManifest(before_path);
  const DatasetManifest after = ReadManifest(after_path);
  std::optional<SelectionPlan> plan;
  if (!plan_path.empty()) {
    const nlohmann::json json = ReadJson(plan_path);
    plan.emplace();
    plan->strategy = ParseSelectStrategy(json.at("strategy").get<std::string>());
    plan->ratio_percent = json.at("M").get<double>();
  }
  const ReductionReport report =
      MakeReductionReport(before, after, plan ? &*plan : nullptr, cfg.refine.max_words);

  nlohmann::ordered_json json = ctx.Meta("stats");
  json["report"] = ReductionReportToJson(report);
  nlohmann::ordered_json histograms = nlohmann::ordered_json::object();
  const std::pair<const char*, const DatasetManifest*> sides[] = {{"before", &before}, {"after", &after}};
  for (const auto& [name, manifest] : sides) {
    const std::vector<double> scores = ItmScores(*manifest);
    if (scores.empty()) continue;
    const Histogram h = ScoreHistogram(scores, cfg.stats.bins);
    histograms[std::string("itm_") + name] = HistogramToJson(h);
    PartialFile csv(Sibling(out_report, std::string("_itm_") + name + ".csv"));
    WriteText(csv.temp_path(), HistogramToCsv(h));
    csv.Commit();
  }
  json["histograms"] = std::move(histograms);
  WriteJsonAtomically(out_report, json);

  PartialFile text(Sibling(out_report, ".txt"));
  WriteText(text.temp_path(), ReductionReportToText(report));
  text.Commit();
  return report;
}

PipelineResult RunPipeline(const PipelineConfig& config) {
  try {
    ValidateConfig(config, true);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  const StageContext ctx(config);
  const fs::path out(config.paths.output);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw StageError("config", "cannot create output directory '" + out.string() + "'");
  auto at = [&](const char* name) { return (out / name).string(); };

  auto stage = [](const char* name, auto&& body) {
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  nlohmann::ordered_json run;
  nlohmann::json hashed = ConfigToJson(config);
  hashed["paths"].erase("output");
  hashed.erase("threads");
  run["config_hash"] = ctx.config_hash();
  run["config"] = hashed;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  for (const char* name : kStages) seeds[name] = ctx.StageSeed(name);
  run["stage_seeds"] = seeds;
  stage("config", [&] { WriteJsonAtomically(at("run.json"), run); });

  const bool keyword_init = ParseCodebookInit(config.codebook.init) == CodebookInit::kKeywords;
  stage("keywords", [&] { RunKeywordsStage(ctx, config.paths.manifest, at("keywords.json")); });
  stage("init-codebook", [&] {
    RunInitCodebookStage(ctx, keyword_init ? at("keywords.json") : std::string(), at("codebook_init.emb"));
  });
  stage("train-codebook", [&] {
    RunTrainCodebookStage(ctx, at("codebook_init.emb"), config.paths.embeddings, at("codebook.emb"),
                          at("train.json"));
  });
  stage("quantize", [&] {
    RunQuantizeStage(ctx, config.paths.manifest, config.paths.embeddings, at("codebook.emb"),
                     at("index_vectors.jsonl"), at("codebook.emb"));
  });
  stage("cluster", [&] {
    RunClusterStage(ctx, at("index_vectors.jsonl"), at("codebook.emb"), config.paths.embeddings,
                    at("cluster_model.json"), at("assignments.jsonl"));
  });
  stage("select", [&] {
    RunSelectStage(ctx, config.paths.manifest, at("assignments.jsonl"), at("selected.jsonl"), at("plan.json"));
  });
  std::string refine_input = at("selected.jsonl");
  if (config.select.drop_fraction > 0.0) {
    stage("filter", [&] { RunFilterStage(ctx, at("selected.jsonl"), at("filtered.jsonl")); });
    refine_input = at("filtered.jsonl");
  }
  stage("refine", [&] { RunRefineStage(ctx, refine_input, at("reduced.jsonl")); });

  PipelineResult result{at("reduced.jsonl"), at("report.json"), {}};
  stage("stats", [&] {
    result.summary = RunStatsStage(ctx, config.paths.manifest, at("reduced.jsonl"), at("plan.json"), at("report.json"));
  });
  return result;
}

}  // namespace tldr
