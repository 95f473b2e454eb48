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

// Dataset records and the JSONL manifest format.
//
// One JSON object per line, UTF-8, LF-terminated. Known keys are written in a
// fixed order (id, image_ref, caption, generated_caption, refined_caption,
// scores, cluster, selected); absent optional fields are omitted and unknown
// input keys are carried through verbatim after the known ones. Score values
// are written with 6 significant digits.

#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace tldr {

using ScoreMap = std::map<std::string, double>;

// Score name holding the image-text matching probability.
inline constexpr char kItmScore[] = "itm";

struct DatasetRecord {
  std::string id;
  std::string image_ref;
  std::string caption;
  std::optional<std::string> generated_caption;
  std::optional<std::string> refined_caption;
  std::optional<ScoreMap> scores;
  std::optional<std::uint64_t> cluster;
  std::optional<bool> selected;
  // Unknown input keys, in input order.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  std::optional<double> Score(const std::string& name) const;

  bool operator==(const DatasetRecord&) const = default;
};

struct DatasetManifest {
  std::string source_path;
  std::vector<DatasetRecord> records;

  std::size_t count() const { return records.size(); }
};

// Streaming reader. Records are yielded in file order; ids are checked for
// uniqueness across the whole stream. Blank lines are skipped.
class ManifestReader {
 public:
  explicit ManifestReader(const std::string& path);

  // Returns false at end of file. Throws FormatError with the line number on
  // malformed input and on duplicate ids.
  bool Next(DatasetRecord& record);

  std::size_t line_number() const { return line_number_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_number_ = 0;
  std::unordered_set<std::string> seen_;
};

// Parses one manifest line. `line_number` only decorates error messages.
DatasetRecord ParseRecord(const std::string& line, std::size_t line_number);

// Serializes one record (without the trailing LF).
std::string SerializeRecord(const DatasetRecord& record);

DatasetManifest ReadManifest(const std::string& path);

// Writes records in order and returns the count. Throws InvalidArgument on a
// duplicate id or a non-finite score, IoError when the path is unwritable.
std::size_t WriteManifest(std::span<const DatasetRecord> records, const std::string& path);

// Returns every broken record invariant; empty iff the record is valid.
std::vector<std::string> ValidateRecord(const DatasetRecord& record);

// "%.6g" formatting used for score values.
std::string FormatScore(double value);

}  // namespace tldr
