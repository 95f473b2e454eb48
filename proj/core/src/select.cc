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

#include "tldr/select.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tldr/error.h"
#include "tldr/random.h"

namespace tldr {

namespace {

void CheckRatio(double ratio_percent) {
  if (!(ratio_percent > 0.0 && ratio_percent <= 100.0)) {
    throw InvalidArgument("sampling ratio M must lie in (0, 100], got " + std::to_string(ratio_percent));
  }
}

std::map<ClusterId, std::vector<const Candidate*>> GroupByCluster(std::span<const Candidate> candidates) {
  std::map<ClusterId, std::vector<const Candidate*>> groups;
  std::unordered_set<std::string> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.id).second) throw InvalidArgument("duplicate candidate id '" + c.id + "'");
    groups[c.cluster].push_back(&c);
  }
  return groups;
}

std::map<ClusterId, std::size_t> GroupSizes(
    const std::map<ClusterId, std::vector<const Candidate*>>& groups) {
  std::map<ClusterId, std::size_t> sizes;
  for (const auto& [cluster, members] : groups) sizes[cluster] = members.size();
  return sizes;
}

// Takes the first quota(c) members of each (already ordered) group.
SelectionPlan TakeQuotas(SelectStrategy strategy, double ratio_percent,
                         std::map<ClusterId, std::vector<const Candidate*>>& groups) {
  SelectionPlan plan;
  plan.strategy = strategy;
  plan.ratio_percent = ratio_percent;
  plan.quotas = ComputeQuotas(GroupSizes(groups), ratio_percent);
  for (auto& [cluster, members] : groups) {
    std::vector<std::string> chosen;
    for (std::size_t i = 0; i < plan.quotas[cluster]; ++i) chosen.push_back(members[i]->id);
    std::sort(chosen.begin(), chosen.end());
    plan.selected.insert(plan.selected.end(), chosen.begin(), chosen.end());
  }
  return plan;
}

}  // namespace

std::string_view ToString(SelectStrategy strategy) {
  switch (strategy) {
    case SelectStrategy::kUniform:
      return "uniform";
    case SelectStrategy::kDistanceFar:
      return "distance_far";
    case SelectStrategy::kDistanceNear:
      return "distance_near";
    case SelectStrategy::kScoreHard:
      return "score_hard";
    case SelectStrategy::kScoreEasy:
      return "score_easy";
  }
  return "?";
}

SelectStrategy ParseSelectStrategy(std::string_view name) {
  if (name == "uniform") return SelectStrategy::kUniform;
  if (name == "distance_far") return SelectStrategy::kDistanceFar;
  if (name == "distance_near") return SelectStrategy::kDistanceNear;
  if (name == "score_hard") return SelectStrategy::kScoreHard;
  if (name == "score_easy") return SelectStrategy::kScoreEasy;
  throw InvalidArgument("unknown selection strategy '" + std::string(name) + "'");
}

std::map<ClusterId, std::size_t> ComputeQuotas(const std::map<ClusterId, std::size_t>& sizes,
                                               double ratio_percent) {
  CheckRatio(ratio_percent);
  std::size_t total = 0;
  for (const auto& [cluster, size] : sizes) total += size;

  std::map<ClusterId, std::size_t> quotas;
  struct Remainder {
    double value;
    ClusterId cluster;
  };
  std::vector<Remainder> remainders;
  std::size_t assigned = 0;
  for (const auto& [cluster, size] : sizes) {
    const double exact = ratio_percent * static_cast<double>(size) / 100.0;
    const auto base = std::min(size, static_cast<std::size_t>(std::floor(exact)));
    quotas[cluster] = base;
    assigned += base;
    if (base < size) remainders.push_back({exact - static_cast<double>(base), cluster});
  }
  const auto target = static_cast<std::size_t>(std::floor(ratio_percent * static_cast<double>(total) / 100.0));
  std::stable_sort(remainders.begin(), remainders.end(), [](const Remainder& a, const Remainder& b) {
    return a.value > b.value;
  });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
    if (remainders[i].value <= 0.0) break;
    ++quotas[remainders[i].cluster];
    ++assigned;
  }
  for (const auto& [cluster, size] : sizes) {
    if (size > 0 && quotas[cluster] == 0) quotas[cluster] = 1;
  }
  return quotas;
}

SelectionPlan UniformSelect(const std::map<ClusterId, std::vector<std::string>>& clusters,
                            double ratio_percent, std::uint64_t seed) {
  CheckRatio(ratio_percent);
  std::map<ClusterId, std::size_t> sizes;
  std::unordered_set<std::string> seen;
  for (const auto& [cluster, ids] : clusters) {
    sizes[cluster] = ids.size();
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw InvalidArgument("duplicate id '" + id + "'");
    }
  }

  SelectionPlan plan;
  plan.strategy = SelectStrategy::kUniform;
  plan.ratio_percent = ratio_percent;
  plan.seed = seed;
  plan.quotas = ComputeQuotas(sizes, ratio_percent);
  for (const auto& [cluster, ids] : clusters) {
    std::vector<std::string> order(ids);
    std::sort(order.begin(), order.end());
    Rng rng(DeriveSeed(seed, "cluster:" + std::to_string(cluster)));
    rng.Shuffle(std::span<std::string>(order));
    order.resize(plan.quotas[cluster]);
    std::sort(order.begin(), order.end());
    plan.selected.insert(plan.selected.end(), order.begin(), order.end());
  }
  return plan;
}

SelectionPlan DistanceSelect(std::span<const Candidate> candidates, double ratio_percent,
                             DistanceMode mode) {
  CheckRatio(ratio_percent);
  for (const auto& c : candidates) {
    if (!c.distance) throw InvalidArgument("missing distance for id '" + c.id + "'");
    if (!std::isfinite(*c.distance)) throw InvalidArgument("non-finite distance for id '" + c.id + "'");
  }
  auto groups = GroupByCluster(candidates);
  for (auto& [cluster, members] : groups) {
    std::sort(members.begin(), members.end(), [mode](const Candidate* a, const Candidate* b) {
      if (*a->distance != *b->distance) {
        return mode == DistanceMode::kFarthest ? *a->distance > *b->distance
                                               : *a->distance < *b->distance;
      }
      return a->id < b->id;
    });
  }
  return TakeQuotas(mode == DistanceMode::kFarthest ? SelectStrategy::kDistanceFar
                                                    : SelectStrategy::kDistanceNear,
                    ratio_percent, groups);
}

SelectionPlan ScoreSelect(std::span<const Candidate> candidates, double ratio_percent,
                          ScoreMode mode) {
  CheckRatio(ratio_percent);
  for (const auto& c : candidates) {
    if (!c.score) throw InvalidArgument("missing score for id '" + c.id + "'");
    if (!std::isfinite(*c.score)) throw InvalidArgument("non-finite score for id '" + c.id + "'");
  }
  auto groups = GroupByCluster(candidates);
  for (auto& [cluster, members] : groups) {
    std::sort(members.begin(), members.end(), [mode](const Candidate* a, const Candidate* b) {
      if (*a->score != *b->score) {
        return mode == ScoreMode::kHard ? *a->score > *b->score : *a->score < *b->score;
      }
      return a->id < b->id;
    });
  }
  return TakeQuotas(mode == ScoreMode::kHard ? SelectStrategy::kScoreHard : SelectStrategy::kScoreEasy,
                    ratio_percent, groups);
}

std::vector<std::string> ItmFilter(std::span<const ScoredId> items, double drop_fraction) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw InvalidArgument("drop fraction must lie in [0, 1), got " + std::to_string(drop_fraction));
  }
  std::vector<const ScoredId*> order;
  order.reserve(items.size());
  for (const auto& item : items) {
    if (!item.itm) throw InvalidArgument("missing itm score for id '" + item.id + "'");
    if (!(*item.itm >= 0.0 && *item.itm <= 1.0)) {
      throw InvalidArgument("itm score out of [0,1] for id '" + item.id + "'");
    }
    order.push_back(&item);
  }
  // ceil((1 - p) n) == n - floor(p n), without the rounding of 1 - p.
  const std::size_t n = items.size();
  const auto dropped = static_cast<std::size_t>(std::floor(drop_fraction * static_cast<double>(n)));
  const std::size_t keep = n - std::min(n, dropped);
  std::sort(order.begin(), order.end(), [](const ScoredId* a, const ScoredId* b) {
    if (*a->itm != *b->itm) return *a->itm > *b->itm;
    return a->id < b->id;
  });
  std::vector<std::string> kept;
  kept.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) kept.push_back(order[i]->id);
  std::sort(kept.begin(), kept.end());
  return kept;
}

nlohmann::ordered_json SelectionPlanToJson(const SelectionPlan& plan) {
  nlohmann::ordered_json json;
  json["strategy"] = std::string(ToString(plan.strategy));
  json["M"] = plan.ratio_percent;
  json["seed"] = plan.seed;
  nlohmann::ordered_json quotas = nlohmann::ordered_json::object();
  for (const auto& [cluster, quota] : plan.quotas) {
    quotas[cluster == kNoCluster ? std::string("none") : std::to_string(cluster)] = quota;
  }
  json["quotas"] = std::move(quotas);
  json["selected_count"] = plan.selected.size();
  return json;
}

}  // namespace tldr
