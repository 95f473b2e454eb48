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

// The K x D code table and its initializers.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tldr/keywords.h"

namespace tldr {

enum class CodebookInit { kKeywords, kXavier, kTags };

std::string_view ToString(CodebookInit mode);
CodebookInit ParseCodebookInit(std::string_view name);

class Codebook {
 public:
  Codebook() = default;
  // Throws InvalidArgument unless entries.size() == K * D, labels.size() == K,
  // K >= 1, D >= 1 and every entry is finite.
  Codebook(std::size_t size, std::size_t dim, std::vector<float> entries,
           std::vector<std::string> labels);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t k) const { return {entries_.data() + k * dim_, dim_}; }
  std::span<float> row(std::size_t k) { return {entries_.data() + k * dim_, dim_}; }
  std::span<const float> entries() const { return entries_; }
  std::span<float> entries() { return entries_; }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::uint64_t>& usage() const { return usage_; }
  std::vector<std::uint64_t>& usage() { return usage_; }

  bool operator==(const Codebook&) const = default;

 private:
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> entries_;
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> usage_;
};

// Uniform bound for a K x D table with fan_in = fan_out = D.
double XavierBound(std::size_t dim);

// Label given to row k when it is filled by the seeded uniform initializer.
std::string XavierLabel(std::size_t k);

// keywords/tags: row k copies embeddings[k] and its phrase; rows past the
// provided count are xavier-filled. xavier: every entry uniform(-a, a).
// Deterministic given the arguments.
Codebook InitCodebook(CodebookInit mode, std::size_t size, std::size_t dim,
                      std::span<const PhraseEmbedding> embeddings, std::uint64_t seed);

struct CodebookFile {
  Codebook codebook;
  double beta = 0.25;
  nlohmann::json meta = nlohmann::json::object();
};

// Writes the rows as a TLDREMB1 container (L = 1, record id = label) and a
// JSON sidecar {"K", "D", "beta", "usage", ...meta}.
void SaveCodebook(const Codebook& codebook, const std::string& store_path,
                  const std::string& sidecar_path, double beta,
                  const nlohmann::json& meta = nlohmann::json::object());

// Sidecar is optional; usage counters and beta default to zero / 0.25.
CodebookFile LoadCodebook(const std::string& store_path,
                          const std::optional<std::string>& sidecar_path = std::nullopt);

// "<stem>.json" next to "<stem>.emb".
std::string CodebookSidecarPath(const std::string& store_path);

}  // namespace tldr
