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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define TLDR_SCAN_AVX2 1
#endif

#include "tldr/error.h"
#include "tldr/vq.h"

namespace tldr {

namespace {

constexpr double kUnitRoundoff = 0x1.0p-24;

}  // namespace

double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return sum;
}

CodeSearcher::CodeSearcher(const Codebook& codebook)
    : size_(codebook.size()),
      dim_(codebook.dim()),
      panels_((codebook.size() + kPanelWidth - 1) / kPanelWidth),
      panel_data_(panels_ * codebook.dim() * kPanelWidth, 0.0f),
      norms_(panels_ * kPanelWidth, std::numeric_limits<float>::infinity()),
      entries_(codebook.entries().begin(), codebook.entries().end()) {
  for (std::size_t k = 0; k < size_; ++k) {
    const auto row = codebook.row(k);
    const std::size_t panel = k / kPanelWidth;
    const std::size_t lane = k % kPanelWidth;
    double norm = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      panel_data_[(panel * dim_ + d) * kPanelWidth + lane] = row[d];
      norm += static_cast<double>(row[d]) * row[d];
    }
    norms_[k] = static_cast<float>(norm);
    max_norm_ = std::max(max_norm_, std::sqrt(norm));
  }
}

// Scores `rows` (<= kTileRows) zero-padded token rows against every code,
// then resolves each row's argmin exactly.
void CodeSearcher::SearchTile(const float* tile, std::size_t rows, float* scores,
                              std::uint32_t* out, double* distances) const {
  const std::size_t stride = panels_ * kPanelWidth;
  for (std::size_t p = 0; p < panels_; ++p) {
    const float* panel = panel_data_.data() + p * dim_ * kPanelWidth;
    const float* norms = norms_.data() + p * kPanelWidth;
#ifdef TLDR_SCAN_AVX2
    __m256 acc[kTileRows][2];
    for (auto& r : acc) r[0] = r[1] = _mm256_setzero_ps();
    for (std::size_t d = 0; d < dim_; ++d) {
      const __m256 b0 = _mm256_loadu_ps(panel + d * kPanelWidth);
      const __m256 b1 = _mm256_loadu_ps(panel + d * kPanelWidth + 8);
      for (std::size_t t = 0; t < kTileRows; ++t) {
        const __m256 x = _mm256_broadcast_ss(tile + t * dim_ + d);
        acc[t][0] = _mm256_fmadd_ps(x, b0, acc[t][0]);
        acc[t][1] = _mm256_fmadd_ps(x, b1, acc[t][1]);
      }
    }
    const __m256 two = _mm256_set1_ps(2.0f);
    const __m256 n0 = _mm256_loadu_ps(norms);
    const __m256 n1 = _mm256_loadu_ps(norms + 8);
    for (std::size_t t = 0; t < rows; ++t) {
      float* dst = scores + t * stride + p * kPanelWidth;
      _mm256_storeu_ps(dst, _mm256_fnmadd_ps(two, acc[t][0], n0));
      _mm256_storeu_ps(dst + 8, _mm256_fnmadd_ps(two, acc[t][1], n1));
    }
#else
    float acc[kTileRows][kPanelWidth] = {};
    for (std::size_t d = 0; d < dim_; ++d) {
      const float* b = panel + d * kPanelWidth;
      for (std::size_t t = 0; t < kTileRows; ++t) {
        const float x = tile[t * dim_ + d];
        for (std::size_t j = 0; j < kPanelWidth; ++j) acc[t][j] += x * b[j];
      }
    }
    for (std::size_t t = 0; t < rows; ++t) {
      float* dst = scores + t * stride + p * kPanelWidth;
      for (std::size_t j = 0; j < kPanelWidth; ++j) dst[j] = norms[j] - 2.0f * acc[t][j];
    }
#endif
  }

  // Screened scores differ from |e|^2 - 2 x.e by at most
  // (gamma_D + 2u) * (|e|^2 + 2 |x| |e|); take a generous multiple of it.
  const double gamma = static_cast<double>(dim_ + 4) * kUnitRoundoff;
  for (std::size_t t = 0; t < rows; ++t) {
    const float* token = tile + t * dim_;
    const float* row_scores = scores + t * stride;
    double token_norm = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) token_norm += static_cast<double>(token[d]) * token[d];
    token_norm = std::sqrt(token_norm);
    const double bound =
        4.0 * gamma * (max_norm_ * max_norm_ + 2.0 * token_norm * max_norm_) + 1e-30;

    float best = std::numeric_limits<float>::infinity();
    for (std::size_t k = 0; k < size_; ++k) best = std::min(best, row_scores[k]);
    const double window = static_cast<double>(best) + 2.0 * bound;

    std::uint32_t best_code = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    const std::span<const float> x(token, dim_);
    for (std::size_t k = 0; k < size_; ++k) {
      if (static_cast<double>(row_scores[k]) > window) continue;
      const double dist = SquaredDistance(x, {entries_.data() + k * dim_, dim_});
      if (dist < best_distance) {
        best_distance = dist;
        best_code = static_cast<std::uint32_t>(k);
      }
    }
    out[t] = best_code;
    if (distances != nullptr) distances[t] = best_distance;
  }
}

void CodeSearcher::Search(std::span<const float> tokens, std::span<std::uint32_t> out) const {
  Search(tokens, out, {});
}

void CodeSearcher::Search(std::span<const float> tokens, std::span<std::uint32_t> out,
                          std::span<double> distances) const {
  const std::size_t n = out.size();
  if (tokens.size() != n * dim_) {
    throw InvalidArgument("token dimension does not match codebook dimension " +
                          std::to_string(dim_));
  }
  if (!distances.empty() && distances.size() != n) {
    throw InvalidArgument("distance output has the wrong length");
  }
  std::vector<float> tile(kTileRows * dim_);
  std::vector<float> scores(kTileRows * panels_ * kPanelWidth);
  for (std::size_t begin = 0; begin < n; begin += kTileRows) {
    const std::size_t rows = std::min(kTileRows, n - begin);
    std::fill(tile.begin(), tile.end(), 0.0f);
    std::memcpy(tile.data(), tokens.data() + begin * dim_, rows * dim_ * sizeof(float));
    SearchTile(tile.data(), rows, scores.data(), out.data() + begin,
               distances.empty() ? nullptr : distances.data() + begin);
  }
}

std::uint32_t CodeSearcher::Nearest(std::span<const float> token) const {
  std::uint32_t code = 0;
  Search(token, std::span<std::uint32_t>(&code, 1));
  return code;
}

}  // namespace tldr
