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

// Pipeline configuration: JSON file + dotted-key overrides over defaults.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace tldr {

struct PipelineConfig {
  struct Paths {
    std::string manifest;
    std::string embeddings;          // TLDREMB1 token store
    std::string keyword_embeddings;  // phrase embedding sidecar (JSONL)
    std::string stopwords;           // optional
    std::string output = "tldr_out";
  } paths;
  struct CodebookSection {
    std::size_t k = 3000;
    std::string init = "keywords";
    double beta = 0.25;
    int max_ngram = 2;
  } codebook;
  struct TrainSection {
    std::size_t epochs = 1;
    std::size_t batch = 256;
    double decay = 0.99;
    double epsilon = 1e-5;
    std::uint32_t reseed = 10;
  } train;
  struct ClusterSection {
    std::string feature = "hist";
    std::size_t n = 3000;
    std::size_t max_iter = 100;
    double tol = 1e-4;
  } cluster;
  struct SelectSection {
    std::string strategy = "uniform";
    double m = 25.0;
    double drop_fraction = 0.0;
    std::string score = "difficulty";  // score name used by score_* strategies
  } select;
  struct RefineSection {
    std::size_t max_words = 60;
  } refine;
  struct StatsSection {
    std::size_t bins = 50;
  } stats;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: $TLDR_THREADS, then hardware concurrency
};

nlohmann::json ConfigToJson(const PipelineConfig& config);
// Throws InvalidArgument on unknown keys or mistyped values.
PipelineConfig ConfigFromJson(const nlohmann::json& json);

// Sets a dotted key ("select.m=50"). The value is parsed as JSON unless the
// key holds a string, in which case it is taken verbatim.
void ApplyOverride(nlohmann::json& json, std::string_view assignment);

// defaults < file < overrides.
PipelineConfig BuildConfig(const std::optional<std::string>& file,
                           std::span<const std::string> overrides);

// Range checks, plus existence of the input paths when check_paths is set.
void ValidateConfig(const PipelineConfig& config, bool check_paths);

// Hex FNV-1a over the canonical JSON with paths.output and threads removed:
// two runs that must produce identical bytes share a hash.
std::string ConfigHash(const PipelineConfig& config);

}  // namespace tldr
