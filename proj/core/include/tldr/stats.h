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

// Audit reports: score histograms and dataset reduction summaries.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tldr/manifest.h"
#include "tldr/select.h"

namespace tldr {

// Uniform bins over [0, 1]; bin i is [i/B, (i+1)/B), the last bin also
// holds 1.0.
struct Histogram {
  std::vector<double> edges;  // B + 1
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

Histogram ScoreHistogram(std::span<const double> scores, std::size_t bins);

// edge_low,edge_high,count
std::string HistogramToCsv(const Histogram& histogram);
nlohmann::ordered_json HistogramToJson(const Histogram& histogram);

struct ReductionReport {
  std::size_t before_count = 0;
  std::size_t after_count = 0;
  double ratio = 0.0;
  std::map<ClusterId, std::size_t> per_cluster;  // kNoCluster for records without one
  std::size_t refined_count = 0;
  std::size_t overflow_count = 0;
  std::optional<std::string> strategy;
  std::optional<double> ratio_percent;
};

// Four-decimal rendering used for printed ratios.
std::string FormatRatio(double ratio);

ReductionReport MakeReductionReport(std::size_t before_count, std::size_t after_count);

// Throws InvalidArgument if `after` holds an id missing from `before`.
// overflow_count needs max_words > 0.
ReductionReport MakeReductionReport(const DatasetManifest& before, const DatasetManifest& after,
                                    const SelectionPlan* plan = nullptr, std::size_t max_words = 0);

nlohmann::ordered_json ReductionReportToJson(const ReductionReport& report);
// Aligned plain-text table.
std::string ReductionReportToText(const ReductionReport& report);

}  // namespace tldr
