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

// Deterministic synthetic corpora for tests, demos and benchmarks.

#pragma once

#include <cstdint>
#include <string>

namespace tldr {

struct SyntheticOptions {
  std::size_t records = 10000;
  std::uint32_t tokens = 16;  // L
  std::uint32_t dim = 16;     // D
  std::size_t concepts = 10;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::string manifest;
  std::string embeddings;
  std::string keyword_embeddings;
  std::string stopwords;
};

// Writes manifest.jsonl, embeddings.emb, keyword_embeddings.jsonl and
// stopwords.txt into dir (created if missing). Output depends only on opts.
SyntheticCorpus WriteSyntheticCorpus(const SyntheticOptions& opts, const std::string& dir);

}  // namespace tldr
