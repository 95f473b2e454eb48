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

// Cluster features built from index vectors, and K-Means over them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tldr/codebook.h"
#include "tldr/embstore.h"
#include "tldr/vq.h"

namespace tldr {

enum class FeatureMode {
  kHist,       // L1-normalized K-bin histogram of codes
  kMeanCode,   // L2-normalized mean of the assigned code vectors
  kRawIndex,   // the index vector cast to reals
  kEmbedMean,  // L2-normalized mean token embedding
};

std::string_view ToString(FeatureMode mode);
FeatureMode ParseFeatureMode(std::string_view name);

struct ClusterFeature {
  FeatureMode mode = FeatureMode::kHist;
  std::vector<double> vector;
};

struct FeatureInputs {
  const Codebook* codebook = nullptr;  // mean_code; also supplies K for hist
  const TokenMatrix* tokens = nullptr; // embed_mean
  std::size_t code_count = 0;          // K for hist when no codebook is given
};

ClusterFeature BuildFeature(const IndexVector& iv, FeatureMode mode, const FeatureInputs& inputs);

struct KMeansOptions {
  std::size_t clusters = 3000;
  std::size_t max_iter = 100;
  double tol = 1e-4;  // stop once the largest centroid displacement is below this
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ClusterModel {
  FeatureMode mode = FeatureMode::kHist;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> centroids;  // clusters x dim, row-major
  std::vector<std::size_t> counts;
  double objective = 0.0;  // sum of squared distances to assigned centroids
  std::size_t iterations = 0;
  // Objective after the initial assignment and after every Lloyd iteration.
  std::vector<double> objective_trace;

  std::size_t clusters() const { return counts.size(); }
  std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
};

struct KMeansResult {
  ClusterModel model;
  std::vector<std::uint32_t> labels;
  std::vector<double> distances;  // squared distance of each sample to its centroid
};

// k-means++ seeding, then Lloyd iterations until the assignment is stable,
// the centroid displacement drops below tol, or max_iter is reached. Empty
// clusters take the sample farthest from its centroid. Deterministic given
// the seed and identical for any thread count.
KMeansResult KMeansFit(std::span<const ClusterFeature> features, const KMeansOptions& options);
KMeansResult KMeansFit(std::span<const double> data, std::size_t dim, FeatureMode mode,
                       const KMeansOptions& options);

struct Assignment {
  std::uint32_t cluster = 0;
  double distance = 0.0;  // squared Euclidean
};

// Nearest centroid, ties toward the lowest cluster id.
Assignment Assign(std::span<const double> feature, const ClusterModel& model);
Assignment Assign(const ClusterFeature& feature, const ClusterModel& model);

nlohmann::ordered_json ClusterModelToJson(const ClusterModel& model);
ClusterModel ClusterModelFromJson(const nlohmann::json& json);

// JSONL: optional {"_meta": ...} line, then {"id", "cluster", "distance"}.
struct AssignmentRecord {
  std::string id;
  std::uint32_t cluster = 0;
  double distance = 0.0;
};

void WriteAssignments(const std::string& path, std::span<const AssignmentRecord> records,
                      const nlohmann::json& meta = nlohmann::json());
std::vector<AssignmentRecord> ReadAssignments(const std::string& path);

}  // namespace tldr
