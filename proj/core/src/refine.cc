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

#include "tldr/refine.h"

#include "tldr/error.h"

namespace tldr {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::size_t CountWords(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (IsSpace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

RefinedCaption RefineCaptionDetailed(std::string_view original,
                                     const std::optional<std::string>& generated,
                                     std::size_t max_words) {
  if (max_words == 0) throw InvalidArgument("max_words must be >= 1");
  RefinedCaption result{std::string(original), false, CountWords(original) > max_words};
  if (!generated) return result;

  std::string_view gen(*generated);
  while (!gen.empty() && IsSpace(gen.front())) gen.remove_prefix(1);
  while (!gen.empty() && IsSpace(gen.back())) gen.remove_suffix(1);
  if (gen.empty()) return result;
  result.refined = true;

  const char last = original.empty() ? '\0' : original.back();
  std::string head(original);
  head += (last == '.' || last == '!' || last == '?') ? " " : ". ";
  const std::size_t used = CountWords(head);
  if (used >= max_words) return result;

  // Cut after the budget-th word of the generated caption.
  std::size_t budget = max_words - used;
  std::size_t end = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (IsSpace(gen[i])) {
      if (in_word && budget == 0) break;
      in_word = false;
    } else if (!in_word) {
      if (budget == 0) break;
      in_word = true;
      --budget;
    }
    if (in_word) end = i + 1;
  }
  result.text = head;
  result.text.append(gen.substr(0, end));
  return result;
}

std::string RefineCaption(std::string_view original, const std::optional<std::string>& generated,
                          std::size_t max_words) {
  return RefineCaptionDetailed(original, generated, max_words).text;
}

RefineSummary RefineManifest(DatasetManifest& manifest, std::size_t max_words) {
  RefineSummary summary;
  for (auto& record : manifest.records) {
    RefinedCaption r = RefineCaptionDetailed(record.caption, record.generated_caption, max_words);
    summary.refined += r.refined ? 1 : 0;
    summary.overflow += r.overflow ? 1 : 0;
    record.refined_caption = std::move(r.text);
  }
  return summary;
}

}  // namespace tldr
