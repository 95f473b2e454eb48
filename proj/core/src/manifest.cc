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

#include "tldr/manifest.h"

#include <cmath>
#include <cstdio>
#include <utility>

#include "tldr/error.h"

namespace tldr {

namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr const char* kKnownKeys[] = {"id",      "image_ref", "caption", "generated_caption",
                                      "refined_caption", "scores", "cluster", "selected"};

bool IsKnownKey(const std::string& key) {
  for (const char* known : kKnownKeys) {
    if (key == known) return true;
  }
  return false;
}

std::string LinePrefix(std::size_t line_number) {
  return "line " + std::to_string(line_number) + ": ";
}

std::string RequireString(const OrderedJson& obj, const char* key, std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(LinePrefix(line_number) + "missing " + key);
  if (!it->is_string()) {
    throw FormatError(LinePrefix(line_number) + key + " must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> OptionalString(const OrderedJson& obj, const char* key,
                                          std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw FormatError(LinePrefix(line_number) + key + " must be a string");
  }
  return it->get<std::string>();
}

std::string Quote(const std::string& s) {
  try {
    return OrderedJson(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("invalid UTF-8 in string field: ") + e.what());
  }
}

}  // namespace

std::optional<double> DatasetRecord::Score(const std::string& name) const {
  if (!scores) return std::nullopt;
  auto it = scores->find(name);
  if (it == scores->end()) return std::nullopt;
  return it->second;
}

std::string FormatScore(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

DatasetRecord ParseRecord(const std::string& line, std::size_t line_number) {
  OrderedJson obj;
  try {
    obj = OrderedJson::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(LinePrefix(line_number) + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw FormatError(LinePrefix(line_number) + "expected a JSON object");

  DatasetRecord record;
  record.id = RequireString(obj, "id", line_number);
  if (record.id.empty()) throw FormatError(LinePrefix(line_number) + "empty id");
  record.image_ref = RequireString(obj, "image_ref", line_number);
  record.caption = RequireString(obj, "caption", line_number);
  record.generated_caption = OptionalString(obj, "generated_caption", line_number);
  record.refined_caption = OptionalString(obj, "refined_caption", line_number);

  if (auto it = obj.find("scores"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) throw FormatError(LinePrefix(line_number) + "scores must be an object");
    ScoreMap scores;
    for (const auto& [name, value] : it->items()) {
      if (!value.is_number()) {
        throw FormatError(LinePrefix(line_number) + "score '" + name + "' must be a number");
      }
      scores[name] = value.get<double>();
    }
    record.scores = std::move(scores);
  }
  if (auto it = obj.find("cluster"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) {
      throw FormatError(LinePrefix(line_number) + "cluster must be a non-negative integer");
    }
    record.cluster = it->get<std::uint64_t>();
  }
  if (auto it = obj.find("selected"); it != obj.end() && !it->is_null()) {
    if (!it->is_boolean()) throw FormatError(LinePrefix(line_number) + "selected must be a boolean");
    record.selected = it->get<bool>();
  }
  for (const auto& [key, value] : obj.items()) {
    if (!IsKnownKey(key)) record.extra[key] = value;
  }
  return record;
}

std::string SerializeRecord(const DatasetRecord& record) {
  std::string out;
  out.reserve(128 + record.caption.size());
  out += "{\"id\":";
  out += Quote(record.id);
  out += ",\"image_ref\":";
  out += Quote(record.image_ref);
  out += ",\"caption\":";
  out += Quote(record.caption);
  if (record.generated_caption) {
    out += ",\"generated_caption\":";
    out += Quote(*record.generated_caption);
  }
  if (record.refined_caption) {
    out += ",\"refined_caption\":";
    out += Quote(*record.refined_caption);
  }
  if (record.scores) {
    out += ",\"scores\":{";
    bool first = true;
    for (const auto& [name, value] : *record.scores) {
      if (!std::isfinite(value)) {
        throw InvalidArgument("record '" + record.id + "': non-finite score '" + name + "'");
      }
      if (!first) out += ',';
      first = false;
      out += Quote(name);
      out += ':';
      out += FormatScore(value);
    }
    out += '}';
  }
  if (record.cluster) {
    out += ",\"cluster\":";
    out += std::to_string(*record.cluster);
  }
  if (record.selected) {
    out += ",\"selected\":";
    out += *record.selected ? "true" : "false";
  }
  if (record.extra.is_object()) {
    for (const auto& [key, value] : record.extra.items()) {
      if (IsKnownKey(key)) continue;
      out += ',';
      out += Quote(key);
      out += ':';
      out += value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
    }
  }
  out += '}';
  return out;
}

ManifestReader::ManifestReader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw IoError("cannot open manifest '" + path + "'");
}

bool ManifestReader::Next(DatasetRecord& record) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    record = ParseRecord(line, line_number_);
    if (!seen_.insert(record.id).second) {
      throw FormatError("line " + std::to_string(line_number_) + ": duplicate id '" +
                        record.id + "'");
    }
    return true;
  }
  if (in_.bad()) throw IoError("read failure on manifest '" + path_ + "'");
  return false;
}

DatasetManifest ReadManifest(const std::string& path) {
  DatasetManifest manifest;
  manifest.source_path = path;
  ManifestReader reader(path);
  DatasetRecord record;
  while (reader.Next(record)) manifest.records.push_back(std::move(record));
  return manifest;
}

std::size_t WriteManifest(std::span<const DatasetRecord> records, const std::string& path) {
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (const auto& record : records) {
    if (!seen.insert(record.id).second) {
      throw InvalidArgument("duplicate id '" + record.id + "'");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  for (const auto& record : records) {
    out << SerializeRecord(record) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failure on manifest '" + path + "'");
  return records.size();
}

std::vector<std::string> ValidateRecord(const DatasetRecord& record) {
  std::vector<std::string> violations;
  if (record.id.empty()) violations.emplace_back("empty id");
  if (record.scores) {
    for (const auto& [name, value] : *record.scores) {
      if (!std::isfinite(value)) {
        violations.push_back("non-finite score '" + name + "'");
      } else if (name == kItmScore && (value < 0.0 || value > 1.0)) {
        violations.emplace_back("itm out of [0,1]");
      }
    }
  }
  if (record.refined_caption &&
      record.refined_caption->compare(0, record.caption.size(), record.caption) != 0) {
    violations.emplace_back("refined_caption does not begin with caption");
  }
  return violations;
}

}  // namespace tldr
