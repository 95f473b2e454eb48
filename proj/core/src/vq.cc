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

#include "tldr/vq.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "tldr/error.h"
#include "tldr/parallel.h"

namespace tldr {

namespace {

constexpr std::size_t kRecordChunk = 16;
constexpr std::size_t kTokenChunk = 512;

void CheckDims(const TokenMatrix& tokens, const Codebook& codebook) {
  if (tokens.cols() != codebook.dim()) {
    throw InvalidArgument("token dimension " + std::to_string(tokens.cols()) +
                          " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
}

}  // namespace

IndexVector Quantize(const TokenMatrix& tokens, const CodeSearcher& searcher) {
  if (tokens.cols() != searcher.dim()) {
    throw InvalidArgument("token dimension " + std::to_string(tokens.cols()) +
                          " does not match codebook dimension " + std::to_string(searcher.dim()));
  }
  IndexVector iv;
  iv.codes.resize(tokens.rows());
  searcher.Search(tokens.values(), iv.codes);
  return iv;
}

IndexVector Quantize(const TokenMatrix& tokens, Codebook& codebook) {
  CheckDims(tokens, codebook);
  IndexVector iv = Quantize(tokens, CodeSearcher(codebook));
  for (std::uint32_t code : iv.codes) ++codebook.usage()[code];
  return iv;
}

std::vector<IndexVector> QuantizeStore(const EmbeddingStore& store, Codebook& codebook,
                                       int threads) {
  std::vector<std::size_t> all(store.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return QuantizeStore(store, all, codebook, threads);
}

std::vector<IndexVector> QuantizeStore(const EmbeddingStore& store,
                                       std::span<const std::size_t> record_indices,
                                       Codebook& codebook, int threads) {
  if (store.cols() != codebook.dim()) {
    throw InvalidArgument("store dimension " + std::to_string(store.cols()) +
                          " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
  const CodeSearcher searcher(codebook);
  std::vector<IndexVector> out(record_indices.size());
  const std::size_t chunks = ChunkCount(record_indices.size(), kRecordChunk);
  std::vector<std::vector<std::uint64_t>> usage(chunks);
  ParallelForChunks(record_indices.size(), kRecordChunk, threads,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                      std::vector<float> buffer(store.rows() * store.cols());
                      auto& counts = usage[chunk];
                      counts.assign(codebook.size(), 0);
                      for (std::size_t i = begin; i < end; ++i) {
                        store.FetchInto(record_indices[i], buffer);
                        out[i].codes.resize(store.rows());
                        searcher.Search(buffer, out[i].codes);
                        for (std::uint32_t code : out[i].codes) ++counts[code];
                      }
                    });
  for (const auto& counts : usage) {
    for (std::size_t k = 0; k < counts.size(); ++k) codebook.usage()[k] += counts[k];
  }
  return out;
}

TokenMatrix Dequantize(const IndexVector& iv, const Codebook& codebook) {
  TokenMatrix out(iv.size(), codebook.dim());
  for (std::size_t l = 0; l < iv.size(); ++l) {
    if (iv[l] >= codebook.size()) {
      throw InvalidArgument("code index " + std::to_string(iv[l]) + " out of range for K = " +
                            std::to_string(codebook.size()));
    }
    const auto row = codebook.row(iv[l]);
    std::copy(row.begin(), row.end(), out.row(l).begin());
  }
  return out;
}

double CommitmentLoss(const TokenMatrix& tokens, const Codebook& codebook, const IndexVector& iv,
                      double beta) {
  if (beta < 0.0) throw InvalidArgument("commitment weight beta must be >= 0");
  CheckDims(tokens, codebook);
  if (iv.size() != tokens.rows()) throw InvalidArgument("index vector length must equal token count");
  if (tokens.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t l = 0; l < tokens.rows(); ++l) {
    if (iv[l] >= codebook.size()) throw InvalidArgument("code index out of range");
    sum += SquaredDistance(tokens.row(l), codebook.row(iv[l]));
  }
  return (1.0 + beta) * sum / static_cast<double>(tokens.rows());
}

EmaState::EmaState(std::size_t size, std::size_t dim_, const EmaOptions& options_,
                   std::uint64_t seed)
    : dim(dim_),
      cluster_size(size, 0.0),
      cluster_sum(size * dim_, 0.0),
      stale(size, 0),
      options(options_),
      rng(seed) {
  if (!(options.decay >= 0.0 && options.decay <= 1.0)) {
    throw InvalidArgument("EMA decay must lie in [0, 1]");
  }
  if (!(options.epsilon > 0.0)) throw InvalidArgument("EMA epsilon must be > 0");
}

void EmaUpdate(EmaState& state, Codebook& codebook, std::span<const float> tokens,
               std::span<const std::uint32_t> assignment) {
  const std::size_t n = assignment.size();
  if (n == 0) return;
  const std::size_t size = codebook.size();
  const std::size_t dim = codebook.dim();
  if (tokens.size() != n * dim) throw InvalidArgument("EmaUpdate: batch shape mismatch");
  if (state.cluster_size.size() != size || state.dim != dim) {
    throw InvalidArgument("EmaUpdate: state does not match codebook");
  }

  std::vector<std::uint64_t> counts(size, 0);
  std::vector<double> sums(size * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t k = assignment[i];
    if (k >= size) throw InvalidArgument("EmaUpdate: code index out of range");
    ++counts[k];
    double* sum = sums.data() + k * dim;
    const float* token = tokens.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) sum[d] += token[d];
  }

  const double decay = state.options.decay;
  for (std::size_t k = 0; k < size; ++k) {
    state.cluster_size[k] = decay * state.cluster_size[k] + (1.0 - decay) * static_cast<double>(counts[k]);
    double* cluster_sum = state.cluster_sum.data() + k * dim;
    const double* batch_sum = sums.data() + k * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      cluster_sum[d] = decay * cluster_sum[d] + (1.0 - decay) * batch_sum[d];
    }
    if (counts[k] > 0) {
      state.stale[k] = 0;
      const double denom = state.cluster_size[k] + state.options.epsilon;
      auto row = codebook.row(k);
      for (std::size_t d = 0; d < dim; ++d) row[d] = static_cast<float>(cluster_sum[d] / denom);
    } else {
      ++state.stale[k];
    }
  }

  if (state.options.reseed_after == 0) return;
  for (std::size_t k = 0; k < size; ++k) {
    if (state.stale[k] < state.options.reseed_after) continue;
    const auto pick = static_cast<std::size_t>(state.rng.UniformIndex(n));
    const float* token = tokens.data() + pick * dim;
    auto row = codebook.row(k);
    double* cluster_sum = state.cluster_sum.data() + k * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = token[d];
      cluster_sum[d] = token[d];
    }
    state.cluster_size[k] = 1.0;
    state.stale[k] = 0;
  }
}

TrainResult TrainCodebook(std::span<const float> tokens, std::size_t dim, Codebook codebook,
                          const TrainOptions& options) {
  TrainResult result{std::move(codebook), {}};
  if (options.epochs == 0) return result;
  if (dim != result.codebook.dim()) {
    throw InvalidArgument("token dimension does not match codebook dimension");
  }
  if (dim == 0 || tokens.empty() || tokens.size() % dim != 0) {
    throw InvalidArgument("training requires a non-empty token table");
  }
  if (options.batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (options.beta < 0.0) throw InvalidArgument("commitment weight beta must be >= 0");

  const std::size_t n = tokens.size() / dim;
  Codebook& book = result.codebook;
  EmaState state(book.size(), dim, options.ema, DeriveSeed(options.seed, "ema-reseed"));
  Rng shuffle_rng(DeriveSeed(options.seed, "batch-shuffle"));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<float> batch;
  std::vector<std::uint32_t> codes;
  std::vector<double> distances;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.Shuffle(std::span<std::size_t>(order));
    double epoch_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += options.batch_size) {
      const std::size_t count = std::min(options.batch_size, n - begin);
      batch.resize(count * dim);
      for (std::size_t i = 0; i < count; ++i) {
        std::copy_n(tokens.data() + order[begin + i] * dim, dim, batch.data() + i * dim);
      }
      codes.resize(count);
      distances.resize(count);
      const CodeSearcher searcher(book);
      ParallelForChunks(count, kTokenChunk, options.threads,
                        [&](std::size_t, std::size_t lo, std::size_t hi) {
                          searcher.Search(std::span<const float>(batch.data() + lo * dim, (hi - lo) * dim),
                                          std::span<std::uint32_t>(codes.data() + lo, hi - lo),
                                          std::span<double>(distances.data() + lo, hi - lo));
                        });
      for (double d : distances) epoch_sum += d;
      EmaUpdate(state, book, batch, codes);
    }
    result.loss_trace.push_back((1.0 + options.beta) * epoch_sum / static_cast<double>(n));
  }
  return result;
}

TrainResult TrainCodebook(const EmbeddingStore& store, Codebook codebook,
                          const TrainOptions& options) {
  if (store.size() == 0) throw InvalidArgument("cannot train a codebook on an empty store");
  if (options.epochs == 0) return TrainResult{std::move(codebook), {}};
  const std::size_t per_record = store.rows() * store.cols();
  std::vector<float> tokens(store.size() * per_record);
  for (std::size_t i = 0; i < store.size(); ++i) {
    store.FetchInto(i, std::span<float>(tokens.data() + i * per_record, per_record));
  }
  return TrainCodebook(tokens, store.cols(), std::move(codebook), options);
}

void WriteIndexVectors(const std::string& path, std::span<const std::string> ids,
                       std::span<const IndexVector> vectors, const nlohmann::json& meta) {
  if (ids.size() != vectors.size()) throw InvalidArgument("ids and index vectors differ in length");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index vectors '" + path + "'");
  if (!meta.is_null()) out << nlohmann::json{{"_meta", meta}}.dump() << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << nlohmann::json{{"id", ids[i]}, {"codes", vectors[i].codes}}.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

IndexVectorFile ReadIndexVectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open index vectors '" + path + "'");
  IndexVectorFile file;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      if (obj.contains("_meta")) {
        file.meta = obj["_meta"];
        continue;
      }
      file.ids.push_back(obj.at("id").get<std::string>());
      file.vectors.push_back({obj.at("codes").get<std::vector<std::uint32_t>>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return file;
}

}  // namespace tldr
