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

#include "tldr/codebook.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tldr/embstore.h"
#include "tldr/error.h"
#include "tldr/random.h"

namespace tldr {

std::string_view ToString(CodebookInit mode) {
  switch (mode) {
    case CodebookInit::kKeywords:
      return "keywords";
    case CodebookInit::kXavier:
      return "xavier";
    case CodebookInit::kTags:
      return "tags";
  }
  return "?";
}

CodebookInit ParseCodebookInit(std::string_view name) {
  if (name == "keywords") return CodebookInit::kKeywords;
  if (name == "xavier") return CodebookInit::kXavier;
  if (name == "tags") return CodebookInit::kTags;
  throw InvalidArgument("unknown codebook init mode '" + std::string(name) + "'");
}

Codebook::Codebook(std::size_t size, std::size_t dim, std::vector<float> entries,
                   std::vector<std::string> labels)
    : size_(size), dim_(dim), entries_(std::move(entries)), labels_(std::move(labels)),
      usage_(size, 0) {
  if (size_ == 0 || dim_ == 0) throw InvalidArgument("codebook needs K >= 1 and D >= 1");
  if (entries_.size() != size_ * dim_) throw InvalidArgument("codebook entries must hold K*D values");
  if (labels_.size() != size_) throw InvalidArgument("codebook needs one label per code");
  for (float v : entries_) {
    if (!std::isfinite(v)) throw InvalidArgument("codebook entries must be finite");
  }
}

double XavierBound(std::size_t dim) { return std::sqrt(6.0 / (2.0 * static_cast<double>(dim))); }

std::string XavierLabel(std::size_t k) { return "xavier:" + std::to_string(k); }

Codebook InitCodebook(CodebookInit mode, std::size_t size, std::size_t dim,
                      std::span<const PhraseEmbedding> embeddings, std::uint64_t seed) {
  if (size == 0 || dim == 0) throw InvalidArgument("codebook needs K >= 1 and D >= 1");
  std::size_t provided = 0;
  if (mode != CodebookInit::kXavier) {
    if (embeddings.empty()) {
      throw InvalidArgument(std::string(ToString(mode)) + " init requires embeddings");
    }
    if (embeddings.size() > size) {
      throw InvalidArgument("got " + std::to_string(embeddings.size()) +
                            " embeddings for a codebook of size " + std::to_string(size));
    }
    for (const auto& e : embeddings) {
      if (e.vector.size() != dim) {
        throw InvalidArgument("embedding for '" + e.phrase + "' has dimension " +
                              std::to_string(e.vector.size()) + ", expected " + std::to_string(dim));
      }
    }
    provided = embeddings.size();
  }

  std::vector<float> entries(size * dim);
  std::vector<std::string> labels(size);
  for (std::size_t k = 0; k < provided; ++k) {
    std::copy(embeddings[k].vector.begin(), embeddings[k].vector.end(), entries.begin() + k * dim);
    labels[k] = embeddings[k].phrase;
  }
  const double bound = XavierBound(dim);
  const auto fbound = static_cast<float>(bound);
  Rng rng(seed);
  for (std::size_t k = provided; k < size; ++k) {
    for (std::size_t d = 0; d < dim; ++d) {
      auto v = static_cast<float>(bound * (2.0 * rng.Uniform01() - 1.0));
      // Keep the open interval after rounding to f32.
      if (std::fabs(v) >= fbound || std::fabs(static_cast<double>(v)) >= bound) {
        v = std::nextafter(v, 0.0f);
      }
      entries[k * dim + d] = v;
    }
    labels[k] = XavierLabel(k);
  }
  return Codebook(size, dim, std::move(entries), std::move(labels));
}

std::string CodebookSidecarPath(const std::string& store_path) {
  return std::filesystem::path(store_path).replace_extension(".json").string();
}

void SaveCodebook(const Codebook& codebook, const std::string& store_path,
                  const std::string& sidecar_path, double beta, const nlohmann::json& meta) {
  EmbeddingStoreWriter writer(store_path, 1, static_cast<std::uint32_t>(codebook.dim()));
  for (std::size_t k = 0; k < codebook.size(); ++k) writer.Add(codebook.labels()[k], codebook.row(k));
  writer.Finish();

  nlohmann::ordered_json sidecar;
  sidecar["K"] = codebook.size();
  sidecar["D"] = codebook.dim();
  sidecar["beta"] = beta;
  sidecar["usage"] = codebook.usage();
  for (const auto& [key, value] : meta.items()) sidecar[key] = value;
  std::ofstream out(sidecar_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write codebook sidecar '" + sidecar_path + "'");
  out << sidecar.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + sidecar_path + "'");
}

CodebookFile LoadCodebook(const std::string& store_path,
                          const std::optional<std::string>& sidecar_path) {
  const EmbeddingStore store = EmbeddingStore::Open(store_path);
  if (store.rows() != 1) throw FormatError("codebook store must have L = 1");
  const std::size_t size = store.size();
  const std::size_t dim = store.cols();
  std::vector<float> entries(size * dim);
  for (std::size_t k = 0; k < size; ++k) {
    store.FetchInto(k, std::span<float>(entries.data() + k * dim, dim));
  }
  CodebookFile file{Codebook(size, dim, std::move(entries), store.ids()), 0.25, nlohmann::json::object()};

  const std::string sidecar = sidecar_path.value_or(CodebookSidecarPath(store_path));
  if (!std::filesystem::exists(sidecar)) {
    if (sidecar_path) throw IoError("cannot open codebook sidecar '" + sidecar + "'");
    return file;
  }
  std::ifstream in(sidecar);
  try {
    auto json = nlohmann::json::parse(in);
    if (json.at("K").get<std::size_t>() != size || json.at("D").get<std::size_t>() != dim) {
      throw FormatError("codebook sidecar shape does not match '" + store_path + "'");
    }
    file.beta = json.value("beta", 0.25);
    if (json.contains("usage")) {
      auto usage = json.at("usage").get<std::vector<std::uint64_t>>();
      if (usage.size() != size) throw FormatError("codebook sidecar usage has wrong length");
      file.codebook.usage() = std::move(usage);
    }
    for (const char* key : {"K", "D", "beta", "usage"}) json.erase(key);
    file.meta = std::move(json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed codebook sidecar '" + sidecar + "': " + e.what());
  }
  return file;
}

}  // namespace tldr
