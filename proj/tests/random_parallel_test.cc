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

#include <atomic>
#include <cstdlib>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "tldr/parallel.h"
#include "tldr/random.h"

namespace tldr {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs |= x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, UniformIsOpenInterval) {
  Rng rng(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngTest, UniformIndexCoversRange) {
  Rng rng(2);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.UniformIndex(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(RngTest, NormalMoments) {
  Rng rng(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngTest, ShuffleIsPermutation) {
  Rng rng(4);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.Shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(DeriveSeedTest, StableAndLabelSensitive) {
  EXPECT_EQ(DeriveSeed(7, "cluster"), DeriveSeed(7, "cluster"));
  EXPECT_NE(DeriveSeed(7, "cluster"), DeriveSeed(7, "select"));
  EXPECT_NE(DeriveSeed(7, "cluster"), DeriveSeed(8, "cluster"));
  // FNV-1a reference values.
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ParallelTest, ChunkBoundariesIndependentOfThreads) {
  for (int threads : {1, 2, 8}) {
    std::vector<std::pair<std::size_t, std::size_t>> ranges(ChunkCount(1000, 64));
    ParallelForChunks(1000, 64, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
      ranges[c] = {b, e};
    });
    for (std::size_t c = 0; c < ranges.size(); ++c) {
      EXPECT_EQ(ranges[c].first, c * 64);
      EXPECT_EQ(ranges[c].second, std::min<std::size_t>(1000, (c + 1) * 64));
    }
  }
}

TEST(ParallelTest, RethrowsLowestChunkError) {
  try {
    ParallelForChunks(100, 10, 4, [](std::size_t c, std::size_t, std::size_t) {
      if (c >= 3) throw std::runtime_error("chunk " + std::to_string(c));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "chunk 3");
  }
}

TEST(ParallelTest, EmptyRangeRunsNothing) {
  std::atomic<int> calls{0};
  ParallelForChunks(0, 8, 4, [&](std::size_t, std::size_t, std::size_t) { ++calls; });
  EXPECT_EQ(calls.load(), 0);
}

TEST(ParallelTest, ResolveThreads) {
  EXPECT_EQ(ResolveThreads(3), 3);
  ::setenv("TLDR_THREADS", "5", 1);
  EXPECT_EQ(ResolveThreads(0), 5);
  ::unsetenv("TLDR_THREADS");
  EXPECT_GE(ResolveThreads(0), 1);
}

}  // namespace
}  // namespace tldr
