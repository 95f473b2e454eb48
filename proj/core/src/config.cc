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

#include "tldr/config.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tldr/cluster.h"
#include "tldr/codebook.h"
#include "tldr/error.h"
#include "tldr/random.h"
#include "tldr/select.h"

namespace tldr {

namespace {

template <typename T>
void Read(const nlohmann::json& section, const char* key, T& out, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("config key '" + where + key + "' has the wrong type");
  }
}

void CheckKeys(const nlohmann::json& actual, const nlohmann::json& reference, const std::string& where) {
  if (!actual.is_object()) throw InvalidArgument("config section '" + where + "' must be an object");
  for (const auto& [key, value] : actual.items()) {
    if (!reference.contains(key)) throw InvalidArgument("unknown config key '" + where + key + "'");
    if (reference.at(key).is_object()) CheckKeys(value, reference.at(key), where + key + ".");
  }
}

}  // namespace

nlohmann::json ConfigToJson(const PipelineConfig& c) {
  return {
      {"paths",
       {{"manifest", c.paths.manifest},
        {"embeddings", c.paths.embeddings},
        {"keyword_embeddings", c.paths.keyword_embeddings},
        {"stopwords", c.paths.stopwords},
        {"output", c.paths.output}}},
      {"codebook",
       {{"k", c.codebook.k}, {"init", c.codebook.init}, {"beta", c.codebook.beta}, {"max_ngram", c.codebook.max_ngram}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch", c.train.batch},
        {"decay", c.train.decay},
        {"epsilon", c.train.epsilon},
        {"reseed", c.train.reseed}}},
      {"cluster",
       {{"feature", c.cluster.feature}, {"n", c.cluster.n}, {"max_iter", c.cluster.max_iter}, {"tol", c.cluster.tol}}},
      {"select",
       {{"strategy", c.select.strategy},
        {"m", c.select.m},
        {"drop_fraction", c.select.drop_fraction},
        {"score", c.select.score}}},
      {"refine", {{"max_words", c.refine.max_words}}},
      {"stats", {{"bins", c.stats.bins}}},
      {"seed", c.seed},
      {"threads", c.threads},
  };
}

PipelineConfig ConfigFromJson(const nlohmann::json& json) {
  CheckKeys(json, ConfigToJson(PipelineConfig{}), "");
  PipelineConfig c;
  const nlohmann::json empty = nlohmann::json::object();
  auto section = [&](const char* name) -> const nlohmann::json& {
    return json.contains(name) ? json.at(name) : empty;
  };
  const auto& paths = section("paths");
  Read(paths, "manifest", c.paths.manifest, "paths.");
  Read(paths, "embeddings", c.paths.embeddings, "paths.");
  Read(paths, "keyword_embeddings", c.paths.keyword_embeddings, "paths.");
  Read(paths, "stopwords", c.paths.stopwords, "paths.");
  Read(paths, "output", c.paths.output, "paths.");
  const auto& codebook = section("codebook");
  Read(codebook, "k", c.codebook.k, "codebook.");
  Read(codebook, "init", c.codebook.init, "codebook.");
  Read(codebook, "beta", c.codebook.beta, "codebook.");
  Read(codebook, "max_ngram", c.codebook.max_ngram, "codebook.");
  const auto& train = section("train");
  Read(train, "epochs", c.train.epochs, "train.");
  Read(train, "batch", c.train.batch, "train.");
  Read(train, "decay", c.train.decay, "train.");
  Read(train, "epsilon", c.train.epsilon, "train.");
  Read(train, "reseed", c.train.reseed, "train.");
  const auto& cluster = section("cluster");
  Read(cluster, "feature", c.cluster.feature, "cluster.");
  Read(cluster, "n", c.cluster.n, "cluster.");
  Read(cluster, "max_iter", c.cluster.max_iter, "cluster.");
  Read(cluster, "tol", c.cluster.tol, "cluster.");
  const auto& select = section("select");
  Read(select, "strategy", c.select.strategy, "select.");
  Read(select, "m", c.select.m, "select.");
  Read(select, "drop_fraction", c.select.drop_fraction, "select.");
  Read(select, "score", c.select.score, "select.");
  Read(section("refine"), "max_words", c.refine.max_words, "refine.");
  Read(section("stats"), "bins", c.stats.bins, "stats.");
  Read(json, "seed", c.seed, "");
  Read(json, "threads", c.threads, "");
  return c;
}

void ApplyOverride(nlohmann::json& json, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgument("override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  nlohmann::json::json_pointer pointer;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    pointer /= key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const nlohmann::json defaults = ConfigToJson(PipelineConfig{});
  if (!defaults.contains(pointer)) throw InvalidArgument("unknown config key '" + key + "'");
  if (defaults.at(pointer).is_string()) {
    json[pointer] = value;
    return;
  }
  try {
    json[pointer] = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    throw InvalidArgument("cannot parse value for '" + key + "': '" + value + "'");
  }
}

PipelineConfig BuildConfig(const std::optional<std::string>& file,
                           std::span<const std::string> overrides) {
  nlohmann::json json = ConfigToJson(PipelineConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot open config '" + *file + "'");
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument("malformed config '" + *file + "': " + e.what());
    }
    CheckKeys(patch, json, "");
    json.merge_patch(patch);
  }
  for (const auto& o : overrides) ApplyOverride(json, o);
  return ConfigFromJson(json);
}

void ValidateConfig(const PipelineConfig& c, bool check_paths) {
  auto fail = [](const std::string& what) { throw InvalidArgument("invalid config: " + what); };
  if (c.codebook.k == 0) fail("codebook.k must be >= 1");
  if (c.codebook.k > 0xffffffffULL) fail("codebook.k too large");
  const CodebookInit init = ParseCodebookInit(c.codebook.init);
  if (!(c.codebook.beta >= 0.0)) fail("codebook.beta must be >= 0");
  if (c.codebook.max_ngram != 1 && c.codebook.max_ngram != 2) fail("codebook.max_ngram must be 1 or 2");
  if (c.train.batch == 0) fail("train.batch must be >= 1");
  if (!(c.train.decay >= 0.0 && c.train.decay <= 1.0)) fail("train.decay must lie in [0, 1]");
  if (!(c.train.epsilon > 0.0)) fail("train.epsilon must be > 0");
  ParseFeatureMode(c.cluster.feature);
  if (c.cluster.n == 0) fail("cluster.n must be >= 1");
  if (!(c.cluster.tol >= 0.0)) fail("cluster.tol must be >= 0");
  ParseSelectStrategy(c.select.strategy);
  if (!(c.select.m > 0.0 && c.select.m <= 100.0)) fail("select.m must lie in (0, 100]");
  if (!(c.select.drop_fraction >= 0.0 && c.select.drop_fraction < 1.0)) {
    fail("select.drop_fraction must lie in [0, 1)");
  }
  if (c.refine.max_words == 0) fail("refine.max_words must be >= 1");
  if (c.stats.bins == 0) fail("stats.bins must be >= 1");
  if (c.threads < 0) fail("threads must be >= 0");
  if (!check_paths) return;
  auto require = [&](const std::string& path, const char* key) {
    if (path.empty()) fail(std::string("paths.") + key + " is required");
    if (!std::filesystem::exists(path)) fail(std::string("paths.") + key + " does not exist: " + path);
  };
  require(c.paths.manifest, "manifest");
  require(c.paths.embeddings, "embeddings");
  if (init != CodebookInit::kXavier) require(c.paths.keyword_embeddings, "keyword_embeddings");
  if (!c.paths.stopwords.empty()) require(c.paths.stopwords, "stopwords");
}

std::string ConfigHash(const PipelineConfig& config) {
  nlohmann::json json = ConfigToJson(config);
  json["paths"].erase("output");
  json.erase("threads");
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(Fnv1a64(json.dump())));
  return hex;
}

}  // namespace tldr
