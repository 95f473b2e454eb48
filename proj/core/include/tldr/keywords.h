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

// Keyword/keyphrase extraction over the caption corpus.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace tldr {

struct KeywordEntry {
  std::string phrase;
  std::uint64_t count = 0;

  bool operator==(const KeywordEntry&) const = default;
};

// Ordered by count descending, ties by phrase ascending.
struct KeywordTable {
  std::vector<KeywordEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool operator==(const KeywordTable&) const = default;
};

using StopwordSet = std::unordered_set<std::string>;

// Lowercases ASCII letters and splits on every byte that is not an ASCII
// letter or digit. Bytes >= 0x80 are kept as word characters so multi-byte
// UTF-8 words stay intact. Stopword tokens are dropped.
std::vector<std::string> TokenizeCaption(std::string_view caption, const StopwordSet& stopwords);

// Counts unigrams (and adjacent surviving-token bigrams when max_ngram == 2)
// and returns the top k. Counting is sharded over `threads` workers; the
// result is identical to a sequential count.
KeywordTable ExtractKeywords(std::span<const std::string> captions, std::size_t k,
                             const StopwordSet& stopwords, int max_ngram, int threads = 1);

// One token per line; blank lines ignored; tokens lowercased.
StopwordSet LoadStopwords(const std::string& path);

nlohmann::json KeywordTableToJson(const KeywordTable& table);
KeywordTable KeywordTableFromJson(const nlohmann::json& json);

// Sidecar of phrase embeddings: JSONL lines {"phrase": string, "vector": [D reals]}.
struct PhraseEmbedding {
  std::string phrase;
  std::vector<float> vector;
};

std::vector<PhraseEmbedding> ReadPhraseEmbeddings(const std::string& path);

// Embeddings for the table's phrases, in table order, skipping phrases that
// have no sidecar entry. At most `limit` entries.
std::vector<PhraseEmbedding> MatchKeywordEmbeddings(const KeywordTable& table,
                                                    std::span<const PhraseEmbedding> sidecar,
                                                    std::size_t limit);

}  // namespace tldr
