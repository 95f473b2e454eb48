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

#include "tldr/cluster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "tldr/error.h"
#include "tldr/parallel.h"
#include "tldr/random.h"

namespace tldr {

namespace {

constexpr std::size_t kPointChunk = 256;
constexpr std::size_t kClusterChunk = 8;

double Distance(const double* a, const double* b, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

void NormalizeL2(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) return;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

Assignment Nearest(const double* point, const std::vector<double>& centroids, std::size_t clusters,
                   std::size_t dim) {
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < clusters; ++c) {
    const double d = Distance(point, centroids.data() + c * dim, dim);
    if (d < best.distance) best = {static_cast<std::uint32_t>(c), d};
  }
  return best;
}

class Lloyd {
 public:
  Lloyd(std::span<const double> data, std::size_t dim, const KMeansOptions& options)
      : data_(data), n_(data.size() / dim), dim_(dim), k_(options.clusters), threads_(options.threads) {}

  std::vector<double> SeedPlusPlus(Rng& rng) const {
    std::vector<double> centroids(k_ * dim_);
    std::size_t first = static_cast<std::size_t>(rng.UniformIndex(n_));
    std::copy_n(Point(first), dim_, centroids.begin());
    std::vector<double> d2(n_);
    UpdateNearest(d2, centroids.data(), true);
    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (double d : d2) total += d;
      std::size_t pick = n_;
      if (total > 0.0) {
        const double target = rng.Uniform01() * total;
        double running = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
          if (d2[i] <= 0.0) continue;
          running += d2[i];
          pick = i;
          if (running > target) break;
        }
      } else {
        pick = static_cast<std::size_t>(rng.UniformIndex(n_));
      }
      std::copy_n(Point(pick), dim_, centroids.begin() + c * dim_);
      UpdateNearest(d2, centroids.data() + c * dim_, false);
    }
    return centroids;
  }

  // Returns the objective, summed in sample order.
  double AssignAll(const std::vector<double>& centroids, std::vector<std::uint32_t>& labels,
                   std::vector<double>& distances) const {
    labels.resize(n_);
    distances.resize(n_);
    ParallelForChunks(n_, kPointChunk, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Assignment a = Nearest(Point(i), centroids, k_, dim_);
        labels[i] = a.cluster;
        distances[i] = a.distance;
      }
    });
    return Sum(distances);
  }

  // Gives each empty cluster the sample farthest from its centroid, taken
  // from clusters that keep at least one member.
  void RepairEmpty(std::vector<std::uint32_t>& labels, std::vector<double>& distances) const {
    std::vector<std::size_t> counts = Counts(labels);
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n_;
      double far_distance = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (counts[labels[i]] > 1 && distances[i] > far_distance) {
          far = i;
          far_distance = distances[i];
        }
      }
      if (far == n_) throw Error("k-means: cannot repair empty cluster");
      --counts[labels[far]];
      labels[far] = static_cast<std::uint32_t>(c);
      distances[far] = 0.0;
      ++counts[c];
    }
  }

  // Per-cluster means; each cluster sums its members in sample order.
  std::vector<double> Means(const std::vector<std::uint32_t>& labels,
                            const std::vector<double>& previous) const {
    std::vector<std::vector<std::size_t>> members(k_);
    for (std::size_t i = 0; i < n_; ++i) members[labels[i]].push_back(i);
    std::vector<double> centroids(previous);
    ParallelForChunks(k_, kClusterChunk, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
      std::vector<double> sum(dim_);
      for (std::size_t c = begin; c < end; ++c) {
        if (members[c].empty()) continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t i : members[c]) {
          const double* p = Point(i);
          for (std::size_t d = 0; d < dim_; ++d) sum[d] += p[d];
        }
        const auto count = static_cast<double>(members[c].size());
        for (std::size_t d = 0; d < dim_; ++d) centroids[c * dim_ + d] = sum[d] / count;
      }
    });
    return centroids;
  }

  std::vector<std::size_t> Counts(const std::vector<std::uint32_t>& labels) const {
    std::vector<std::size_t> counts(k_, 0);
    for (std::uint32_t l : labels) ++counts[l];
    return counts;
  }

  double Displacement(const std::vector<double>& a, const std::vector<double>& b) const {
    double worst = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      worst = std::max(worst, std::sqrt(Distance(a.data() + c * dim_, b.data() + c * dim_, dim_)));
    }
    return worst;
  }

  double DistancesTo(const std::vector<double>& centroids, const std::vector<std::uint32_t>& labels,
                     std::vector<double>& distances) const {
    for (std::size_t i = 0; i < n_; ++i) {
      distances[i] = Distance(Point(i), centroids.data() + labels[i] * dim_, dim_);
    }
    return Sum(distances);
  }

 private:
  const double* Point(std::size_t i) const { return data_.data() + i * dim_; }

  static double Sum(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }

  void UpdateNearest(std::vector<double>& d2, const double* centroid, bool first) const {
    ParallelForChunks(n_, kPointChunk, threads_, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double d = Distance(Point(i), centroid, dim_);
        d2[i] = first ? d : std::min(d2[i], d);
      }
    });
  }

  std::span<const double> data_;
  std::size_t n_;
  std::size_t dim_;
  std::size_t k_;
  int threads_;
};

}  // namespace

std::string_view ToString(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kHist:
      return "hist";
    case FeatureMode::kMeanCode:
      return "mean_code";
    case FeatureMode::kRawIndex:
      return "raw_index";
    case FeatureMode::kEmbedMean:
      return "embed_mean";
  }
  return "?";
}

FeatureMode ParseFeatureMode(std::string_view name) {
  if (name == "hist") return FeatureMode::kHist;
  if (name == "mean_code") return FeatureMode::kMeanCode;
  if (name == "raw_index") return FeatureMode::kRawIndex;
  if (name == "embed_mean") return FeatureMode::kEmbedMean;
  throw InvalidArgument("unknown cluster feature mode '" + std::string(name) + "'");
}

ClusterFeature BuildFeature(const IndexVector& iv, FeatureMode mode, const FeatureInputs& inputs) {
  ClusterFeature feature{mode, {}};
  switch (mode) {
    case FeatureMode::kHist: {
      const std::size_t k = inputs.codebook != nullptr ? inputs.codebook->size() : inputs.code_count;
      if (k == 0) throw InvalidArgument("hist features need the codebook size K");
      if (iv.size() == 0) throw InvalidArgument("hist features need a non-empty index vector");
      feature.vector.assign(k, 0.0);
      for (std::uint32_t code : iv.codes) {
        if (code >= k) throw InvalidArgument("code index " + std::to_string(code) + " out of range");
        feature.vector[code] += 1.0;
      }
      const auto total = static_cast<double>(iv.size());
      for (double& v : feature.vector) v /= total;
      break;
    }
    case FeatureMode::kMeanCode: {
      if (inputs.codebook == nullptr) throw InvalidArgument("mean_code features need a codebook");
      const Codebook& book = *inputs.codebook;
      feature.vector.assign(book.dim(), 0.0);
      for (std::uint32_t code : iv.codes) {
        if (code >= book.size()) throw InvalidArgument("code index " + std::to_string(code) + " out of range");
        const auto row = book.row(code);
        for (std::size_t d = 0; d < book.dim(); ++d) feature.vector[d] += row[d];
      }
      if (iv.size() > 0) {
        for (double& v : feature.vector) v /= static_cast<double>(iv.size());
      }
      NormalizeL2(feature.vector);
      break;
    }
    case FeatureMode::kRawIndex:
      feature.vector.assign(iv.codes.begin(), iv.codes.end());
      break;
    case FeatureMode::kEmbedMean: {
      if (inputs.tokens == nullptr) throw InvalidArgument("embed_mean features need token embeddings");
      const TokenMatrix& tokens = *inputs.tokens;
      feature.vector.assign(tokens.cols(), 0.0);
      for (std::size_t l = 0; l < tokens.rows(); ++l) {
        const auto row = tokens.row(l);
        for (std::size_t d = 0; d < tokens.cols(); ++d) feature.vector[d] += row[d];
      }
      if (tokens.rows() > 0) {
        for (double& v : feature.vector) v /= static_cast<double>(tokens.rows());
      }
      NormalizeL2(feature.vector);
      break;
    }
  }
  return feature;
}

KMeansResult KMeansFit(std::span<const ClusterFeature> features, const KMeansOptions& options) {
  if (features.empty()) throw InvalidArgument("k-means needs at least one feature");
  const FeatureMode mode = features.front().mode;
  const std::size_t dim = features.front().vector.size();
  std::vector<double> data;
  data.reserve(features.size() * dim);
  for (const auto& f : features) {
    if (f.mode != mode) throw InvalidArgument("k-means features mix modes");
    if (f.vector.size() != dim) throw InvalidArgument("k-means features differ in dimension");
    data.insert(data.end(), f.vector.begin(), f.vector.end());
  }
  return KMeansFit(data, dim, mode, options);
}

KMeansResult KMeansFit(std::span<const double> data, std::size_t dim, FeatureMode mode,
                       const KMeansOptions& options) {
  if (dim == 0 || data.size() % dim != 0) throw InvalidArgument("k-means data shape mismatch");
  const std::size_t n = data.size() / dim;
  if (options.clusters == 0) throw InvalidArgument("k-means needs N >= 1");
  if (options.clusters > n) {
    throw InvalidArgument("k-means: N = " + std::to_string(options.clusters) + " exceeds sample count " +
                          std::to_string(n));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("k-means features must be finite");
  }

  Lloyd lloyd(data, dim, options);
  Rng rng(options.seed);
  KMeansResult result;
  ClusterModel& model = result.model;
  model.mode = mode;
  model.dim = dim;
  model.seed = options.seed;

  std::vector<double> centroids = lloyd.SeedPlusPlus(rng);
  std::vector<std::uint32_t>& labels = result.labels;
  std::vector<double>& distances = result.distances;
  model.objective_trace.push_back(lloyd.AssignAll(centroids, labels, distances));

  std::vector<std::uint32_t> next_labels;
  std::vector<double> next_distances;
  while (model.iterations < options.max_iter) {
    lloyd.RepairEmpty(labels, distances);
    std::vector<double> updated = lloyd.Means(labels, centroids);
    const double moved = lloyd.Displacement(updated, centroids);
    centroids = std::move(updated);
    ++model.iterations;
    model.objective_trace.push_back(lloyd.AssignAll(centroids, next_labels, next_distances));
    const bool stable = next_labels == labels;
    labels.swap(next_labels);
    distances.swap(next_distances);
    if (stable || moved < options.tol) break;
  }

  model.counts = lloyd.Counts(labels);
  if (std::find(model.counts.begin(), model.counts.end(), 0) != model.counts.end()) {
    lloyd.RepairEmpty(labels, distances);
    centroids = lloyd.Means(labels, centroids);
    model.objective_trace.push_back(lloyd.DistancesTo(centroids, labels, distances));
    model.counts = lloyd.Counts(labels);
  }
  model.centroids = std::move(centroids);
  model.objective = model.objective_trace.back();
  return result;
}

Assignment Assign(std::span<const double> feature, const ClusterModel& model) {
  if (feature.size() != model.dim) {
    throw InvalidArgument("feature dimension " + std::to_string(feature.size()) +
                          " does not match model dimension " + std::to_string(model.dim));
  }
  return Nearest(feature.data(), model.centroids, model.clusters(), model.dim);
}

Assignment Assign(const ClusterFeature& feature, const ClusterModel& model) {
  if (feature.mode != model.mode) throw InvalidArgument("feature mode does not match model mode");
  return Assign(std::span<const double>(feature.vector), model);
}

nlohmann::ordered_json ClusterModelToJson(const ClusterModel& model) {
  nlohmann::ordered_json json;
  json["mode"] = std::string(ToString(model.mode));
  json["N"] = model.clusters();
  json["dim"] = model.dim;
  json["seed"] = model.seed;
  json["objective"] = model.objective;
  json["iterations"] = model.iterations;
  json["counts"] = model.counts;
  json["objective_trace"] = model.objective_trace;
  nlohmann::ordered_json centroids = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < model.clusters(); ++c) {
    const auto row = model.centroid(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json["centroids"] = std::move(centroids);
  return json;
}

ClusterModel ClusterModelFromJson(const nlohmann::json& json) {
  ClusterModel model;
  try {
    model.mode = ParseFeatureMode(json.at("mode").get<std::string>());
    const auto clusters = json.at("N").get<std::size_t>();
    model.dim = json.at("dim").get<std::size_t>();
    model.seed = json.at("seed").get<std::uint64_t>();
    model.objective = json.at("objective").get<double>();
    model.iterations = json.at("iterations").get<std::size_t>();
    if (json.contains("objective_trace")) {
      model.objective_trace = json.at("objective_trace").get<std::vector<double>>();
    }
    const auto& centroids = json.at("centroids");
    if (centroids.size() != clusters) throw FormatError("cluster model: centroid count != N");
    for (const auto& row : centroids) {
      auto values = row.get<std::vector<double>>();
      if (values.size() != model.dim) throw FormatError("cluster model: centroid dimension != dim");
      model.centroids.insert(model.centroids.end(), values.begin(), values.end());
    }
    model.counts = json.contains("counts") ? json.at("counts").get<std::vector<std::size_t>>()
                                           : std::vector<std::size_t>(clusters, 0);
    if (model.counts.size() != clusters) throw FormatError("cluster model: counts length != N");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed cluster model: ") + e.what());
  }
  return model;
}

void WriteAssignments(const std::string& path, std::span<const AssignmentRecord> records,
                      const nlohmann::json& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write assignments '" + path + "'");
  if (!meta.is_null()) out << nlohmann::json{{"_meta", meta}}.dump() << '\n';
  for (const auto& r : records) {
    nlohmann::ordered_json line;
    line["id"] = r.id;
    line["cluster"] = r.cluster;
    line["distance"] = r.distance;
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<AssignmentRecord> ReadAssignments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open assignments '" + path + "'");
  std::vector<AssignmentRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      if (obj.contains("_meta")) continue;
      records.push_back({obj.at("id").get<std::string>(), obj.at("cluster").get<std::uint32_t>(),
                         obj.at("distance").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace tldr
