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

#include "tldr/keywords.h"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "tldr/error.h"
#include "tldr/parallel.h"

namespace tldr {

namespace {

using CountMap = std::unordered_map<std::string, std::uint64_t>;

constexpr std::size_t kCaptionShard = 4096;

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

void CountCaption(std::string_view caption, const StopwordSet& stopwords, int max_ngram,
                  CountMap& counts) {
  const std::vector<std::string> tokens = TokenizeCaption(caption, stopwords);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++counts[tokens[i]];
    if (max_ngram >= 2 && i + 1 < tokens.size()) {
      ++counts[tokens[i] + ' ' + tokens[i + 1]];
    }
  }
}

bool RanksBefore(const KeywordEntry& a, const KeywordEntry& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.phrase < b.phrase;
}

}  // namespace

std::vector<std::string> TokenizeCaption(std::string_view caption, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!stopwords.contains(current)) tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : caption) {
    if (IsWordByte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

KeywordTable ExtractKeywords(std::span<const std::string> captions, std::size_t k,
                             const StopwordSet& stopwords, int max_ngram, int threads) {
  if (k == 0) throw InvalidArgument("keyword count K must be >= 1");
  if (max_ngram != 1 && max_ngram != 2) throw InvalidArgument("max_ngram must be 1 or 2");

  std::vector<CountMap> shards(ChunkCount(captions.size(), kCaptionShard));
  ParallelForChunks(captions.size(), kCaptionShard, threads,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        CountCaption(captions[i], stopwords, max_ngram, shards[chunk]);
                      }
                    });
  CountMap total;
  for (auto& shard : shards) {
    if (total.empty()) {
      total = std::move(shard);
      continue;
    }
    for (auto& [phrase, count] : shard) total[phrase] += count;
  }

  KeywordTable table;
  table.entries.reserve(total.size());
  for (auto& [phrase, count] : total) table.entries.push_back({phrase, count});
  const std::size_t keep = std::min(k, table.entries.size());
  std::partial_sort(table.entries.begin(), table.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    table.entries.end(), RanksBefore);
  table.entries.resize(keep);
  return table;
}

StopwordSet LoadStopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path + "'");
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) {
      return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    });
    words.insert(std::move(word));
  }
  return words;
}

nlohmann::json KeywordTableToJson(const KeywordTable& table) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : table.entries) entries.push_back({{"phrase", e.phrase}, {"count", e.count}});
  return {{"entries", entries}};
}

KeywordTable KeywordTableFromJson(const nlohmann::json& json) {
  KeywordTable table;
  try {
    for (const auto& e : json.at("entries")) {
      table.entries.push_back({e.at("phrase").get<std::string>(), e.at("count").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed keyword table: ") + e.what());
  }
  return table;
}

std::vector<PhraseEmbedding> ReadPhraseEmbeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open keyword embeddings '" + path + "'");
  std::vector<PhraseEmbedding> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      PhraseEmbedding item;
      item.phrase = obj.at("phrase").get<std::string>();
      item.vector = obj.at("vector").get<std::vector<float>>();
      if (!out.empty() && item.vector.size() != out.front().vector.size()) {
        throw FormatError("line " + std::to_string(line_number) + ": vector dimension " +
                          std::to_string(item.vector.size()) + " differs from " +
                          std::to_string(out.front().vector.size()));
      }
      out.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PhraseEmbedding> MatchKeywordEmbeddings(const KeywordTable& table,
                                                    std::span<const PhraseEmbedding> sidecar,
                                                    std::size_t limit) {
  std::unordered_map<std::string, std::size_t> by_phrase;
  for (std::size_t i = 0; i < sidecar.size(); ++i) by_phrase.emplace(sidecar[i].phrase, i);
  std::vector<PhraseEmbedding> out;
  for (const auto& entry : table.entries) {
    if (out.size() >= limit) break;
    if (auto it = by_phrase.find(entry.phrase); it != by_phrase.end()) {
      out.push_back(sidecar[it->second]);
    }
  }
  return out;
}

}  // namespace tldr
