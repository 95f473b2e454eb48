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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles here are written independently of the library.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tldr/cluster.h"
#include "tldr/codebook.h"
#include "tldr/embstore.h"
#include "tldr/manifest.h"
#include "tldr/pipeline.h"
#include "tldr/refine.h"
#include "tldr/select.h"
#include "tldr/stats.h"
#include "tldr/synthetic.h"
#include "tldr/vq.h"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure message; later checks still run.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && pass_) first_failure_ = what;
    pass_ = pass_ && ok;
  }
  bool pass() const { return pass_; }
  const std::string& failure() const { return first_failure_; }

 private:
  bool pass_ = true;
  std::string first_failure_;
};

std::vector<float> UniformFloats(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

tldr::Codebook MakeCodebook(std::size_t k, std::size_t d, std::vector<float> entries) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back("code" + std::to_string(i));
  return tldr::Codebook(k, d, std::move(entries), std::move(labels));
}

// Exhaustive scan: squared distance in double, dimension order, first
// minimum wins.
std::uint32_t ScanArgmin(const float* token, const std::vector<float>& codes, std::size_t k, std::size_t d) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = static_cast<double>(token[j]) - static_cast<double>(codes[c * d + j]);
      s += diff * diff;
    }
    if (s < best_d) {
      best_d = s;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

std::size_t SplitWords(const std::string& s) {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1. Quantize equals the exhaustive scan on 1,000 random 196x64 matrices.
Outcome QuantizationOracle() {
  constexpr std::size_t kMatrices = 1000, kL = 196, kD = 64, kK = 256;
  std::mt19937_64 gen(101);
  std::vector<float> entries = UniformFloats(kK * kD, gen);
  // Duplicate a quarter of the rows so exact ties occur for real.
  for (std::size_t c = 0; c < kK / 4; ++c) {
    std::copy_n(entries.begin() + c * kD, kD, entries.begin() + (kK - 1 - c) * kD);
  }
  const tldr::Codebook codebook = MakeCodebook(kK, kD, entries);
  std::vector<tldr::TokenMatrix> matrices;
  matrices.reserve(kMatrices);
  for (std::size_t m = 0; m < kMatrices; ++m) matrices.emplace_back(kL, kD, UniformFloats(kL * kD, gen));

  const auto start = Clock::now();
  const tldr::CodeSearcher searcher(codebook);
  std::vector<tldr::IndexVector> result;
  result.reserve(kMatrices);
  for (const auto& m : matrices) result.push_back(tldr::Quantize(m, searcher));
  const double elapsed = Seconds(start);

  Checker check;
  std::size_t mismatches = 0, tie_tokens = 0;
  for (std::size_t m = 0; m < kMatrices; ++m) {
    for (std::size_t l = 0; l < kL; ++l) {
      const std::uint32_t want = ScanArgmin(matrices[m].row(l).data(), entries, kK, kD);
      mismatches += result[m][l] != want;
      tie_tokens += want < kK / 4;
    }
  }

  // Equidistant ties: small-integer coordinates make distances exact.
  std::uniform_int_distribution<int> coord(-2, 2);
  std::vector<float> grid_codes(kK * kD);
  for (auto& v : grid_codes) v = static_cast<float>(coord(gen));
  const tldr::Codebook grid = MakeCodebook(kK, kD, grid_codes);
  const tldr::CodeSearcher grid_searcher(grid);
  std::size_t grid_mismatches = 0;
  for (std::size_t m = 0; m < 20; ++m) {
    std::vector<float> values(kL * kD);
    for (auto& v : values) v = static_cast<float>(coord(gen)) * 0.5f;
    const tldr::TokenMatrix t(kL, kD, values);
    const tldr::IndexVector iv = tldr::Quantize(t, grid_searcher);
    for (std::size_t l = 0; l < kL; ++l) grid_mismatches += iv[l] != ScanArgmin(t.row(l).data(), grid_codes, kK, kD);
  }

  check.Expect(mismatches == 0, std::to_string(mismatches) + " random-token mismatches");
  check.Expect(grid_mismatches == 0, std::to_string(grid_mismatches) + " tie-case mismatches");
  check.Expect(elapsed < 5.0, "runtime over 5 s");
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%zu tokens exact (%zu on duplicated codes) + %zu lattice ties; %.2f s single-threaded",
                kMatrices * kL, tie_tokens, std::size_t{20} * kL, elapsed);
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 2. Commitment loss: zero at fixed points, hand case, scalar reference.
Outcome CommitmentLoss() {
  Checker check;
  std::mt19937_64 gen(202);
  const tldr::Codebook hand = MakeCodebook(1, 2, {0, 0});
  const double h = tldr::CommitmentLoss(tldr::TokenMatrix(1, 2, {1, 0}), hand, tldr::IndexVector{{0}}, 0.25);
  check.Expect(std::abs(h - 1.25) <= 1e-6, "hand case gave " + std::to_string(h));

  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + gen() % 64, d = 1 + gen() % 64, l = 1 + gen() % 196;
    const std::vector<float> entries = UniformFloats(k * d, gen);
    const tldr::Codebook cb = MakeCodebook(k, d, entries);
    const tldr::TokenMatrix tokens(l, d, UniformFloats(l * d, gen));
    tldr::IndexVector iv;
    for (std::size_t i = 0; i < l; ++i) iv.codes.push_back(static_cast<std::uint32_t>(gen() % k));
    const double beta = std::uniform_real_distribution<double>(0.0, 2.0)(gen);

    long double sum = 0;
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const long double diff = static_cast<long double>(tokens.at(i, j)) - entries[iv[i] * d + j];
        sum += diff * diff + beta * diff * diff;
      }
    }
    const double reference = static_cast<double>(sum / l);
    worst = std::max(worst, std::abs(tldr::CommitmentLoss(tokens, cb, iv, beta) - reference));

    // Fixed point: tokens copied from their assigned codes.
    std::vector<float> copied;
    for (std::size_t i = 0; i < l; ++i) copied.insert(copied.end(), cb.row(iv[i]).begin(), cb.row(iv[i]).end());
    const double zero = tldr::CommitmentLoss(tldr::TokenMatrix(l, d, copied), cb, iv, beta);
    check.Expect(zero == 0.0, "fixed point gave " + std::to_string(zero));
  }
  check.Expect(worst <= 1e-6, "reference deviation " + std::to_string(worst));
  char buf[160];
  std::snprintf(buf, sizeof(buf), "hand case %.9f; max |loss - reference| = %.3g over 100 instances; fixed points 0",
                h, worst);
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 3. EMA training recovers the means of a 3-component 2-D mixture.
Outcome CodebookLearning() {
  const double means[3][2] = {{0, 0}, {5, 0}, {0, 5}};
  std::mt19937_64 gen(303);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<float> points;
  for (int i = 0; i < 3000; ++i) {
    const int c = i % 3;
    points.push_back(static_cast<float>(means[c][0] + noise(gen)));
    points.push_back(static_cast<float>(means[c][1] + noise(gen)));
  }

  const auto start = Clock::now();
  const tldr::Codebook init = tldr::InitCodebook(tldr::CodebookInit::kXavier, 3, 2, {}, 17);
  tldr::TrainOptions opts;
  opts.epochs = 30;
  opts.ema.decay = 0.9;
  opts.seed = 17;
  const tldr::TrainResult r = tldr::TrainCodebook(points, 2, init, opts);
  const double elapsed = Seconds(start);

  // Greedy matching: repeatedly take the closest remaining (code, mean) pair.
  std::vector<bool> code_used(3, false), mean_used(3, false);
  double worst = 0;
  for (int round = 0; round < 3; ++round) {
    double best = std::numeric_limits<double>::infinity();
    int bc = -1, bm = -1;
    for (int c = 0; c < 3; ++c) {
      for (int m = 0; m < 3; ++m) {
        if (code_used[c] || mean_used[m]) continue;
        const double dx = r.codebook.row(c)[0] - means[m][0], dy = r.codebook.row(c)[1] - means[m][1];
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (dist < best) {
          best = dist;
          bc = c;
          bm = m;
        }
      }
    }
    code_used[bc] = mean_used[bm] = true;
    worst = std::max(worst, best);
  }
  Checker check;
  check.Expect(worst <= 0.05, "a code is " + std::to_string(worst) + " from its mean");
  check.Expect(r.loss_trace.size() == 30 && r.loss_trace.back() < 0.05,
               "epoch-30 loss " + std::to_string(r.loss_trace.back()));
  check.Expect(elapsed < 10.0, "runtime over 10 s");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max matched distance %.4f; epoch-30 loss %.4f; %.3f s", worst,
                r.loss_trace.back(), elapsed);
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 4. K-Means: monotone objective and both fixed-point conditions.
Outcome KMeans() {
  constexpr std::size_t kN = 1000, kDim = 16, kClusters = 10;
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data(kN * kDim);
  for (auto& v : data) v = u(gen);

  tldr::KMeansOptions opts;
  opts.clusters = kClusters;
  opts.max_iter = 1000;
  opts.tol = 0.0;
  opts.seed = 404;
  const tldr::KMeansResult r = tldr::KMeansFit(data, kDim, tldr::FeatureMode::kRawIndex, opts);

  Checker check;
  const auto& trace = r.model.objective_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    check.Expect(trace[i] <= trace[i - 1], "objective rose at iteration " + std::to_string(i));
  }
  check.Expect(r.model.iterations < opts.max_iter, "did not converge");

  double worst_mean = 0;
  for (std::size_t c = 0; c < kClusters; ++c) {
    std::vector<double> mean(kDim, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < kN; ++i) {
      if (r.labels[i] != c) continue;
      ++count;
      for (std::size_t j = 0; j < kDim; ++j) mean[j] += data[i * kDim + j];
    }
    check.Expect(count > 0, "empty cluster");
    for (std::size_t j = 0; j < kDim && count > 0; ++j) {
      worst_mean = std::max(worst_mean, std::abs(r.model.centroid(c)[j] - mean[j] / count));
    }
  }
  check.Expect(worst_mean <= 1e-6, "centroid/mean gap " + std::to_string(worst_mean));

  std::size_t not_nearest = 0;
  for (std::size_t i = 0; i < kN; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kClusters; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < kDim; ++j) {
        const double diff = data[i * kDim + j] - r.model.centroid(c)[j];
        s += diff * diff;
      }
      if (s < best_d) {
        best_d = s;
        best = c;
      }
    }
    not_nearest += best != r.labels[i];
  }
  check.Expect(not_nearest == 0, std::to_string(not_nearest) + " members not nearest their centroid");
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%zu Lloyd iterations, objective %.4f -> %.4f monotone; max centroid-mean gap %.2g",
                r.model.iterations, trace.front(), trace.back(), worst_mean);
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 5. Selection arithmetic.
Outcome Selection() {
  Checker check;
  std::mt19937_64 gen(505);
  std::size_t trials = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + gen() % 5000, clusters = 1 + gen() % 200;
    std::map<tldr::ClusterId, std::vector<std::string>> groups;
    std::vector<tldr::Candidate> candidates;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      // Skewed cluster sizes.
      const auto c = static_cast<tldr::ClusterId>(std::floor(clusters * std::pow(u(gen), 3.0)));
      const std::string id = "r" + std::to_string(i);
      groups[c].push_back(id);
      candidates.push_back({id, c, u(gen), u(gen)});
    }
    const std::size_t lo = n / 4, hi = lo + groups.size();
    auto in_bounds = [&](const tldr::SelectionPlan& plan, const char* name) {
      const std::set<std::string> unique(plan.selected.begin(), plan.selected.end());
      check.Expect(unique.size() == plan.selected.size(), std::string(name) + ": duplicates");
      check.Expect(plan.selected.size() >= lo && plan.selected.size() <= hi,
                   std::string(name) + ": size " + std::to_string(plan.selected.size()) + " outside [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
    };
    in_bounds(tldr::UniformSelect(groups, 25, gen()), "uniform");
    in_bounds(tldr::DistanceSelect(candidates, 25, tldr::DistanceMode::kFarthest), "distance_far");
    in_bounds(tldr::DistanceSelect(candidates, 25, tldr::DistanceMode::kNearest), "distance_near");
    in_bounds(tldr::ScoreSelect(candidates, 25, tldr::ScoreMode::kHard), "score_hard");
    in_bounds(tldr::ScoreSelect(candidates, 25, tldr::ScoreMode::kEasy), "score_easy");
    const tldr::SelectionPlan all = tldr::UniformSelect(groups, 100, gen());
    check.Expect(all.selected.size() == n, "M=100 dropped records");
    ++trials;
  }

  std::vector<int> perm(1000);
  for (int i = 0; i < 1000; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<tldr::ScoredId> items;
  std::set<std::string> top;
  for (int i = 0; i < 1000; ++i) {
    items.push_back({"s" + std::to_string(i), (perm[i] + 0.5) / 1000.0});
    if (perm[i] >= 500) top.insert("s" + std::to_string(i));
  }
  const auto kept = tldr::ItmFilter(items, 0.5);
  check.Expect(kept.size() == 500 && std::set<std::string>(kept.begin(), kept.end()) == top,
               "itm filter did not keep exactly the top 500");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu random assignments x 5 strategies within [floor(n/4), floor(n/4)+N]; "
                "M=100 identity; itm p=0.5 kept %zu", trials, kept.size());
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 6. Refinement properties over fuzzed caption pairs.
Outcome Refinement() {
  static const std::vector<std::string> words = {"a", "Dog", "gift", "box.", "why?", "wow!", "caf\xc3\xa9", "-", "2024"};
  static const std::vector<std::string> gaps = {" ", "  ", "\t", "\n"};
  std::mt19937_64 gen(606);
  auto text = [&](std::size_t max_words) {
    std::string s;
    const std::size_t n = gen() % (max_words + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 || gen() % 5 == 0) s += gaps[gen() % gaps.size()];
      s += words[gen() % words.size()];
    }
    if (gen() % 5 == 0) s += gaps[gen() % gaps.size()];
    return s;
  };
  Checker check;
  for (int i = 0; i < 1000; ++i) {
    const std::string original = text(80), generated = text(80);
    const std::size_t max_words = 1 + gen() % 80;
    const std::string out = tldr::RefineCaption(original, generated, max_words);
    check.Expect(out.compare(0, original.size(), original) == 0, "prefix broken for '" + original + "'");
    check.Expect(SplitWords(out) <= std::max(max_words, SplitWords(original)), "word budget exceeded");
    check.Expect(tldr::RefineCaption(original, std::string(), max_words) == original, "empty generated changed text");
    check.Expect(tldr::RefineCaption(original, std::nullopt, max_words) == original, "absent generated changed text");
  }
  return {check.pass(), check.pass() ? "1000 fuzzed pairs: prefix, word budget and identity hold" : check.failure()};
}

// 7. End-to-end determinism on the 10,000-record synthetic corpus.
Outcome EndToEnd(const fs::path& scratch) {
  const auto start = Clock::now();
  tldr::SyntheticOptions sopts;
  sopts.records = 10000;
  sopts.seed = 707;
  const tldr::SyntheticCorpus corpus = tldr::WriteSyntheticCorpus(sopts, (scratch / "corpus").string());

  auto run = [&](const std::string& name, int threads) {
    tldr::PipelineConfig cfg;
    cfg.paths.manifest = corpus.manifest;
    cfg.paths.embeddings = corpus.embeddings;
    cfg.paths.keyword_embeddings = corpus.keyword_embeddings;
    cfg.paths.stopwords = corpus.stopwords;
    cfg.paths.output = (scratch / name).string();
    cfg.codebook.k = 64;
    cfg.cluster.n = 10;
    cfg.select.m = 25;
    cfg.seed = 7;
    cfg.threads = threads;
    return tldr::RunPipeline(cfg);
  };
  const tldr::PipelineResult a = run("run_a", 1);
  const tldr::PipelineResult b = run("run_b", 1);
  const tldr::PipelineResult c = run("run_c", 8);

  Checker check;
  for (const char* file : {"reduced.jsonl", "report.json", "report.txt", "selected.jsonl", "plan.json"}) {
    const std::string base = Slurp((scratch / "run_a" / file).string());
    check.Expect(!base.empty(), std::string(file) + " is empty");
    check.Expect(base == Slurp((scratch / "run_b" / file).string()), std::string(file) + " differs between runs");
    check.Expect(base == Slurp((scratch / "run_c" / file).string()), std::string(file) + " differs at 8 threads");
  }
  const double ratio = a.summary.ratio;
  check.Expect(ratio >= 0.25 && ratio <= 0.251, "ratio " + std::to_string(ratio));
  check.Expect(a.summary.after_count >= 2500 && a.summary.after_count <= 2510,
               "output size " + std::to_string(a.summary.after_count));
  (void)b;
  (void)c;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "3 runs (threads 1, 1, 8) byte-identical; %zu -> %zu records, ratio %s; %.1f s",
                a.summary.before_count, a.summary.after_count, tldr::FormatRatio(ratio).c_str(), Seconds(start));
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

// 8. Published reduction ratios from their record counts.
Outcome PublishedRatios() {
  const tldr::ReductionReport cc3m = tldr::MakeReductionReport(2820000, 670000);
  const tldr::ReductionReport large = tldr::MakeReductionReport(15000000, 2500000);
  const std::string a = tldr::FormatRatio(cc3m.ratio), b = tldr::FormatRatio(large.ratio);
  const double ja = tldr::ReductionReportToJson(cc3m).at("ratio").get<double>();
  const double jb = tldr::ReductionReportToJson(large).at("ratio").get<double>();
  const bool ok = a == "0.2376" && b == "0.1667" && ja == 0.2376 && jb == 0.1667;
  return {ok, "2,820,000 -> 670,000 => " + a + "; 15,000,000 -> 2,500,000 => " + b};
}

// 9. Throughput: 10,000 stored 196x64 matrices against K = 3000.
Outcome Throughput(const fs::path& scratch) {
  constexpr std::size_t kRecords = 10000, kL = 196, kD = 64, kK = 3000;
  const std::string path = (scratch / "throughput.emb").string();
  std::mt19937_64 gen(909);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  {
    tldr::EmbeddingStoreWriter writer(path, kL, kD);
    std::vector<float> values(kL * kD);
    for (std::size_t i = 0; i < kRecords; ++i) {
      for (auto& v : values) v = normal(gen);
      writer.Add("img-" + std::to_string(i), values);
    }
    writer.Finish();
  }
  std::vector<float> entries(kK * kD);
  for (auto& v : entries) v = normal(gen);
  tldr::Codebook codebook = MakeCodebook(kK, kD, entries);

  const int threads = 8;
  const auto start = Clock::now();
  const tldr::EmbeddingStore store = tldr::EmbeddingStore::Open(path);
  const std::vector<tldr::IndexVector> result = tldr::QuantizeStore(store, codebook, threads);
  const double elapsed = Seconds(start);

  // Spot-check a sample of records against the exhaustive scan.
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < kRecords; i += 997) {
    const tldr::TokenMatrix m = store.FetchAt(i);
    for (std::size_t l = 0; l < kL; ++l) mismatches += result[i][l] != ScanArgmin(m.row(l).data(), entries, kK, kD);
  }
  fs::remove(path);
  const unsigned cores = std::thread::hardware_concurrency();
  Checker check;
  check.Expect(result.size() == kRecords, "record count");
  check.Expect(mismatches == 0, std::to_string(mismatches) + " spot-check mismatches");
  check.Expect(elapsed <= 60.0, "took " + std::to_string(elapsed) + " s");
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%.1f s for %zu x %zu tokens vs K=%zu (%d worker threads requested, %u hardware cores)",
                elapsed, kRecords, kL, kK, threads, cores);
  return {check.pass(), check.pass() ? buf : check.failure() + "; " + buf};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("tldr_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"quantization oracle", QuantizationOracle},
      {"commitment loss", CommitmentLoss},
      {"codebook learning", CodebookLearning},
      {"k-means", KMeans},
      {"selection arithmetic", Selection},
      {"refinement properties", Refinement},
      {"end-to-end determinism", [&] { return EndToEnd(scratch); }},
      {"published-ratio arithmetic", PublishedRatios},
      {"throughput", [&] { return Throughput(scratch); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first.c_str(), outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(scratch);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
