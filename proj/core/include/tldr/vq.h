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

// Vector quantization against a codebook: nearest-code lookup, the
// commitment loss, and EMA codebook learning.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tldr/codebook.h"
#include "tldr/embstore.h"
#include "tldr/random.h"

namespace tldr {

// One code index per token row.
struct IndexVector {
  std::vector<std::uint32_t> codes;

  std::size_t size() const { return codes.size(); }
  std::uint32_t operator[](std::size_t i) const { return codes[i]; }
  bool operator==(const IndexVector&) const = default;
};

// Squared Euclidean distance accumulated in double, in dimension order.
// This is the reference metric for every exact comparison in the library.
double SquaredDistance(std::span<const float> a, std::span<const float> b);

// Exhaustive nearest-code search over an immutable snapshot of a codebook.
//
// Candidates are screened with a blocked f32 kernel on the expansion
// |e|^2 - 2 x.e; every code whose screened score falls inside a rigorous
// rounding-error window of the minimum is rescored with SquaredDistance.
// The result is therefore exactly argmin_k SquaredDistance(x, e_k) with ties
// going to the lowest k. Thread-safe for concurrent Search calls.
class CodeSearcher {
 public:
  explicit CodeSearcher(const Codebook& codebook);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }

  // tokens holds out.size() rows of dim() floats.
  void Search(std::span<const float> tokens, std::span<std::uint32_t> out) const;
  // Same, and writes each token's exact squared distance to its code.
  void Search(std::span<const float> tokens, std::span<std::uint32_t> out,
              std::span<double> distances) const;

  std::uint32_t Nearest(std::span<const float> token) const;

 private:
  static constexpr std::size_t kPanelWidth = 16;
  static constexpr std::size_t kTileRows = 4;

  void SearchTile(const float* tile, std::size_t rows, float* scores, std::uint32_t* out,
                  double* distances) const;

  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  std::size_t panels_ = 0;
  std::vector<float> panel_data_;  // [panel][dim][kPanelWidth]
  std::vector<float> norms_;       // |e|^2 per padded code, +inf for padding
  std::vector<float> entries_;     // row-major copy for exact rescoring
  double max_norm_ = 0.0;
};

// Pure lookup.
IndexVector Quantize(const TokenMatrix& tokens, const CodeSearcher& searcher);
// Lookup that also increments the codebook's usage counters.
IndexVector Quantize(const TokenMatrix& tokens, Codebook& codebook);

// Quantizes every record of the store (or the listed record indices) in
// parallel and adds the assignments to the codebook's usage counters.
// Output order follows the input order.
std::vector<IndexVector> QuantizeStore(const EmbeddingStore& store, Codebook& codebook,
                                       int threads);
std::vector<IndexVector> QuantizeStore(const EmbeddingStore& store,
                                       std::span<const std::size_t> record_indices,
                                       Codebook& codebook, int threads);

TokenMatrix Dequantize(const IndexVector& iv, const Codebook& codebook);

// (1 + beta) / L * sum_l |z_l - e_{iv[l]}|^2: the value of the codebook term
// plus the beta-weighted commitment term, which coincide numerically.
double CommitmentLoss(const TokenMatrix& tokens, const Codebook& codebook, const IndexVector& iv,
                      double beta);

struct EmaOptions {
  double decay = 0.99;
  double epsilon = 1e-5;
  // Codes unused for this many consecutive batches are reseeded.
  std::uint32_t reseed_after = 10;
};

struct EmaState {
  EmaState(std::size_t size, std::size_t dim, const EmaOptions& options, std::uint64_t seed);

  std::size_t dim;
  std::vector<double> cluster_size;  // K
  std::vector<double> cluster_sum;   // K x D
  std::vector<std::uint32_t> stale;  // batches since last use
  EmaOptions options;
  Rng rng;
};

// Applies one EMA step for a batch of tokens (n x D, row-major) with their
// assigned codes. Only codes that received tokens have their vector
// recomputed; unused codes keep their vector and age by one batch. Codes
// whose age reaches reseed_after are moved onto a uniformly drawn batch
// token. An empty batch is a no-op.
void EmaUpdate(EmaState& state, Codebook& codebook, std::span<const float> tokens,
               std::span<const std::uint32_t> assignment);

struct TrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 256;
  EmaOptions ema;
  double beta = 0.25;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrainResult {
  Codebook codebook;
  // Token-weighted mean commitment loss per epoch, measured at assignment
  // time (before each batch's update).
  std::vector<double> loss_trace;
};

// Fits the codebook to all tokens of the store with seeded, shuffled
// mini-batches: quantize, then EmaUpdate. Value-identical for any thread
// count; epochs == 0 returns the input unchanged with an empty trace.
TrainResult TrainCodebook(const EmbeddingStore& store, Codebook codebook,
                          const TrainOptions& options);
// Same over an in-memory token table (n x dim, row-major).
TrainResult TrainCodebook(std::span<const float> tokens, std::size_t dim, Codebook codebook,
                          const TrainOptions& options);

// Index vector files: JSONL, optional leading {"_meta": {...}} line, then
// {"id": string, "codes": [u32...]} per record.
void WriteIndexVectors(const std::string& path, std::span<const std::string> ids,
                       std::span<const IndexVector> vectors,
                       const nlohmann::json& meta = nlohmann::json());

struct IndexVectorFile {
  std::vector<std::string> ids;
  std::vector<IndexVector> vectors;
  nlohmann::json meta;
};

IndexVectorFile ReadIndexVectors(const std::string& path);

}  // namespace tldr
