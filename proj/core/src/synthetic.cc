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

#include "tldr/synthetic.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "tldr/embstore.h"
#include "tldr/error.h"
#include "tldr/manifest.h"
#include "tldr/random.h"

namespace tldr {

namespace {

constexpr std::array<const char*, 16> kWords = {
    "dog",   "cat",   "car",   "tree",  "house", "boat",   "bird",  "horse",
    "bridge", "flower", "train", "mountain", "beach", "chair", "guitar", "lamp"};
constexpr std::array<const char*, 8> kAttributes = {"red",   "small", "old",   "bright",
                                                    "large", "wet",   "quiet", "wooden"};
constexpr std::size_t kPrototypes = 4;
constexpr double kNoise = 0.05;

std::string ConceptWord(std::size_t c) {
  std::string word = kWords[c % kWords.size()];
  if (c >= kWords.size()) word += std::to_string(c / kWords.size());
  return word;
}

double RoundToSixDigits(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::vector<float> RandomVector(Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.Normal());
  return v;
}

}  // namespace

SyntheticCorpus WriteSyntheticCorpus(const SyntheticOptions& opts, const std::string& dir) {
  if (opts.records == 0 || opts.tokens == 0 || opts.dim == 0 || opts.concepts == 0) {
    throw InvalidArgument("synthetic corpus dimensions must be positive");
  }
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  SyntheticCorpus corpus{(root / "manifest.jsonl").string(), (root / "embeddings.emb").string(),
                         (root / "keyword_embeddings.jsonl").string(), (root / "stopwords.txt").string()};

  Rng proto_rng(DeriveSeed(opts.seed, "synthetic-prototypes"));
  std::vector<std::vector<std::vector<float>>> prototypes(opts.concepts);
  for (auto& concept_protos : prototypes) {
    for (std::size_t p = 0; p < kPrototypes; ++p) concept_protos.push_back(RandomVector(proto_rng, opts.dim));
  }

  {
    std::ofstream sidecar(corpus.keyword_embeddings, std::ios::binary | std::ios::trunc);
    if (!sidecar) throw IoError("cannot write '" + corpus.keyword_embeddings + "'");
    for (std::size_t c = 0; c < opts.concepts; ++c) {
      sidecar << nlohmann::json{{"phrase", ConceptWord(c)}, {"vector", prototypes[c][0]}}.dump() << '\n';
    }
    for (const char* attr : kAttributes) {
      sidecar << nlohmann::json{{"phrase", attr}, {"vector", RandomVector(proto_rng, opts.dim)}}.dump() << '\n';
    }
  }
  {
    std::ofstream stop(corpus.stopwords, std::ios::binary | std::ios::trunc);
    if (!stop) throw IoError("cannot write '" + corpus.stopwords + "'");
    stop << "a\nof\nin\nthe\nphoto\n";
  }

  Rng rng(DeriveSeed(opts.seed, "synthetic-records"));
  std::vector<DatasetRecord> records;
  records.reserve(opts.records);
  EmbeddingStoreWriter writer(corpus.embeddings, opts.tokens, opts.dim);
  std::vector<float> values(static_cast<std::size_t>(opts.tokens) * opts.dim);
  char id[32];
  for (std::size_t i = 0; i < opts.records; ++i) {
    std::snprintf(id, sizeof(id), "syn-%06zu", i);
    const std::size_t c = rng.UniformIndex(opts.concepts);
    const std::string word = ConceptWord(c);
    const char* attr = kAttributes[rng.UniformIndex(kAttributes.size())];

    DatasetRecord r;
    r.id = id;
    r.image_ref = std::string("images/") + id + ".jpg";
    r.caption = std::string("a photo of a ") + attr + " " + word;
    if (rng.Uniform01() >= 0.1) r.generated_caption = word + " in a scene";
    r.scores = ScoreMap{{"difficulty", RoundToSixDigits(rng.Uniform01())},
                        {std::string(kItmScore), RoundToSixDigits(rng.Uniform01())}};
    records.push_back(std::move(r));

    for (std::uint32_t l = 0; l < opts.tokens; ++l) {
      const auto& proto = prototypes[c][rng.UniformIndex(kPrototypes)];
      for (std::uint32_t d = 0; d < opts.dim; ++d) {
        values[l * opts.dim + d] = static_cast<float>(proto[d] + kNoise * rng.Normal());
      }
    }
    writer.Add(id, values);
  }
  writer.Finish();
  WriteManifest(records, corpus.manifest);
  return corpus;
}

}  // namespace tldr
