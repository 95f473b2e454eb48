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

// Stage runners and the end-to-end reduction pipeline.
//
// Every stage reads its inputs from files, writes its outputs through a
// ".partial" temporary that is renamed only on success, and stamps JSON
// artifacts with the config hash and the stage seed.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tldr/config.h"
#include "tldr/error.h"
#include "tldr/stats.h"

namespace tldr {

// An error raised inside a named stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class StageContext {
 public:
  explicit StageContext(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  const std::string& config_hash() const { return config_hash_; }
  int threads() const { return threads_; }
  std::uint64_t StageSeed(std::string_view stage) const;
  // {"config_hash", "seed", "stage"}
  nlohmann::ordered_json Meta(std::string_view stage) const;

 private:
  PipelineConfig config_;
  std::string config_hash_;
  int threads_;
};

// Writes to "<path>.partial"; Commit() renames it onto <path>. Without a
// commit the partial file stays behind for inspection.
class PartialFile {
 public:
  explicit PartialFile(std::string path);
  const std::string& temp_path() const { return temp_; }
  const std::string& path() const { return path_; }
  void Commit();

 private:
  std::string path_;
  std::string temp_;
};

void RunKeywordsStage(const StageContext& ctx, const std::string& manifest_path,
                      const std::string& out_path);

// keywords_path may be empty for xavier/tags initialization.
void RunInitCodebookStage(const StageContext& ctx, const std::string& keywords_path,
                          const std::string& out_codebook);

void RunTrainCodebookStage(const StageContext& ctx, const std::string& codebook_path,
                           const std::string& store_path, const std::string& out_codebook,
                           const std::string& trace_path);

// Quantizes the manifest's records (manifest order) and records code usage
// in the codebook sidecar written next to out_codebook.
void RunQuantizeStage(const StageContext& ctx, const std::string& manifest_path,
                      const std::string& store_path, const std::string& codebook_path,
                      const std::string& out_index, const std::string& out_codebook);

void RunClusterStage(const StageContext& ctx, const std::string& index_path,
                     const std::string& codebook_path, const std::string& store_path,
                     const std::string& out_model, const std::string& out_assignments);

void RunSelectStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& assignments_path, const std::string& out_manifest,
                    const std::string& out_plan);

void RunFilterStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& out_manifest);

void RunRefineStage(const StageContext& ctx, const std::string& manifest_path,
                    const std::string& out_manifest);

// plan_path may be empty. Writes report JSON, a text table next to it
// ("<stem>.txt") and itm histograms as CSV ("<stem>_itm_before.csv", ...).
ReductionReport RunStatsStage(const StageContext& ctx, const std::string& before_path,
                              const std::string& after_path, const std::string& plan_path,
                              const std::string& out_report);

struct PipelineResult {
  std::string reduced_manifest;
  std::string report;
  ReductionReport summary;
};

// keywords -> init-codebook -> train-codebook -> quantize -> cluster ->
// select -> (filter) -> refine -> stats, all artifacts under paths.output.
// Throws StageError naming the failing stage.
PipelineResult RunPipeline(const PipelineConfig& config);

}  // namespace tldr
