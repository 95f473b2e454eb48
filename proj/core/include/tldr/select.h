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

// Subset selection: per-cluster quotas and the retained ids.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tldr {

using ClusterId = std::int64_t;
// Group used when no clustering is supplied.
inline constexpr ClusterId kNoCluster = -1;

enum class SelectStrategy { kUniform, kDistanceFar, kDistanceNear, kScoreHard, kScoreEasy };

std::string_view ToString(SelectStrategy strategy);
SelectStrategy ParseSelectStrategy(std::string_view name);

struct SelectionPlan {
  SelectStrategy strategy = SelectStrategy::kUniform;
  double ratio_percent = 25.0;  // M
  std::uint64_t seed = 0;
  std::map<ClusterId, std::size_t> quotas;
  // Concatenated in cluster order; ids ascending within a cluster.
  std::vector<std::string> selected;
};

// Apportions floor(M/100 * n) samples over the clusters by largest remainder
// (every cluster gets floor(M/100 * |c|) plus at most one), then raises every
// non-empty cluster to at least one. Remainder ties go to the lower cluster
// id. The total therefore lies in [floor(M/100 * n), floor(M/100 * n) + N].
std::map<ClusterId, std::size_t> ComputeQuotas(const std::map<ClusterId, std::size_t>& sizes,
                                               double ratio_percent);

// Within each cluster the ids are sorted, shuffled with a seed derived from
// (seed, cluster id), and the first quota(c) are kept.
SelectionPlan UniformSelect(const std::map<ClusterId, std::vector<std::string>>& clusters,
                            double ratio_percent, std::uint64_t seed);

struct Candidate {
  std::string id;
  ClusterId cluster = kNoCluster;
  std::optional<double> distance;  // to the cluster centroid
  std::optional<double> score;     // difficulty, higher = harder
};

enum class DistanceMode { kFarthest, kNearest };
enum class ScoreMode { kHard, kEasy };

// Per cluster, sort by distance (descending for farthest) and keep quota(c);
// ties by id ascending. Throws InvalidArgument naming an id without distance.
SelectionPlan DistanceSelect(std::span<const Candidate> candidates, double ratio_percent,
                             DistanceMode mode);

// Per cluster (kNoCluster groups everything), keep the highest scores (hard)
// or the lowest (easy); ties by id ascending.
SelectionPlan ScoreSelect(std::span<const Candidate> candidates, double ratio_percent,
                          ScoreMode mode);

struct ScoredId {
  std::string id;
  std::optional<double> itm;
};

// Keeps the ceil((1 - p) * n) ids with the highest itm score (ties by id
// ascending) and returns them sorted by id.
std::vector<std::string> ItmFilter(std::span<const ScoredId> items, double drop_fraction);

nlohmann::ordered_json SelectionPlanToJson(const SelectionPlan& plan);

}  // namespace tldr
