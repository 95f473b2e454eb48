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

// Caption refinement: the original caption followed by the generated one.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "tldr/manifest.h"

namespace tldr {

// Number of whitespace-delimited words.
std::size_t CountWords(std::string_view text);

struct RefinedCaption {
  std::string text;
  bool refined = false;   // a non-empty generated caption was supplied
  bool overflow = false;  // the original alone exceeds max_words
};

// original + joiner + generated, where joiner is " " after '.', '!' or '?'
// and ". " otherwise. The generated caption is cut at word boundaries so the
// result has at most max_words words; the original is never shortened.
RefinedCaption RefineCaptionDetailed(std::string_view original,
                                     const std::optional<std::string>& generated,
                                     std::size_t max_words);

std::string RefineCaption(std::string_view original, const std::optional<std::string>& generated,
                          std::size_t max_words);

struct RefineSummary {
  std::size_t refined = 0;
  std::size_t overflow = 0;
};

// Sets refined_caption on every record (equal to caption when there is no
// generated caption).
RefineSummary RefineManifest(DatasetManifest& manifest, std::size_t max_words);

}  // namespace tldr
