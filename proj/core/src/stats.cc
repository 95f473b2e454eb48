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

#include "tldr/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "tldr/error.h"
#include "tldr/refine.h"

namespace tldr {

Histogram ScoreHistogram(std::span<const double> scores, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("score " + std::to_string(s) + " outside [0,1]");
    auto bin = std::min(bins - 1, static_cast<std::size_t>(s * static_cast<double>(bins)));
    // Agree with the stored edges exactly.
    if (bin > 0 && s < h.edges[bin]) --bin;
    if (bin + 1 < bins && s >= h.edges[bin + 1]) ++bin;
    ++h.counts[bin];
  }
  h.total = scores.size();
  return h;
}

std::string HistogramToCsv(const Histogram& histogram) {
  std::string out = "edge_low,edge_high,count\n";
  char line[96];
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%llu\n", histogram.edges[i], histogram.edges[i + 1],
                  static_cast<unsigned long long>(histogram.counts[i]));
    out += line;
  }
  return out;
}

nlohmann::ordered_json HistogramToJson(const Histogram& histogram) {
  nlohmann::ordered_json json;
  json["bins"] = histogram.counts.size();
  json["total"] = histogram.total;
  json["edges"] = histogram.edges;
  json["counts"] = histogram.counts;
  return json;
}

std::string FormatRatio(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", ratio);
  return buf;
}

ReductionReport MakeReductionReport(std::size_t before_count, std::size_t after_count) {
  ReductionReport report;
  report.before_count = before_count;
  report.after_count = after_count;
  report.ratio = before_count == 0 ? 0.0
                                   : static_cast<double>(after_count) / static_cast<double>(before_count);
  return report;
}

ReductionReport MakeReductionReport(const DatasetManifest& before, const DatasetManifest& after,
                                    const SelectionPlan* plan, std::size_t max_words) {
  std::unordered_set<std::string> known;
  known.reserve(before.records.size());
  for (const auto& r : before.records) known.insert(r.id);

  ReductionReport report = MakeReductionReport(before.count(), after.count());
  for (const auto& r : after.records) {
    if (!known.contains(r.id)) throw InvalidArgument("reduced manifest has unknown id '" + r.id + "'");
    ++report.per_cluster[r.cluster ? static_cast<ClusterId>(*r.cluster) : kNoCluster];
    if (r.generated_caption && CountWords(*r.generated_caption) > 0) ++report.refined_count;
    if (max_words > 0 && CountWords(r.caption) > max_words) ++report.overflow_count;
  }
  if (plan != nullptr) {
    report.strategy = std::string(ToString(plan->strategy));
    report.ratio_percent = plan->ratio_percent;
  }
  return report;
}

nlohmann::ordered_json ReductionReportToJson(const ReductionReport& report) {
  nlohmann::ordered_json json;
  json["before_count"] = report.before_count;
  json["after_count"] = report.after_count;
  json["ratio"] = std::stod(FormatRatio(report.ratio));
  if (report.strategy) json["strategy"] = *report.strategy;
  if (report.ratio_percent) json["M"] = *report.ratio_percent;
  json["refined_count"] = report.refined_count;
  json["overflow_count"] = report.overflow_count;
  nlohmann::ordered_json clusters = nlohmann::ordered_json::object();
  for (const auto& [cluster, count] : report.per_cluster) {
    clusters[cluster == kNoCluster ? std::string("none") : std::to_string(cluster)] = count;
  }
  json["per_cluster"] = std::move(clusters);
  return json;
}

std::string ReductionReportToText(const ReductionReport& report) {
  std::ostringstream out;
  char line[128];
  auto row = [&](const char* key, const std::string& value) {
    std::snprintf(line, sizeof(line), "%-16s %12s\n", key, value.c_str());
    out << line;
  };
  row("before", std::to_string(report.before_count));
  row("after", std::to_string(report.after_count));
  row("ratio", FormatRatio(report.ratio));
  if (report.strategy) row("strategy", *report.strategy);
  row("refined", std::to_string(report.refined_count));
  row("overflow", std::to_string(report.overflow_count));
  out << "\ncluster              kept\n";
  for (const auto& [cluster, count] : report.per_cluster) {
    std::snprintf(line, sizeof(line), "%-16s %9zu\n",
                  cluster == kNoCluster ? "none" : std::to_string(cluster).c_str(), count);
    out << line;
  }
  return out.str();
}

}  // namespace tldr
