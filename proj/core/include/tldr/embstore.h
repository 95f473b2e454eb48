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

// TLDREMB1: a single-pass binary store of per-record token-embedding matrices.
//
// Layout, little-endian throughout:
//
//   offset 0   char[8]  magic "TLDREMB1"
//          8   u32      version (1)
//         12   u32      record count
//         16   u32      L (rows per record)
//         20   u32      D (columns per record)
//         24   u8       dtype (0 = f32)
//         25   records: u16 id_len, id bytes (UTF-8), L*D f32 row-major
//
// The count field is patched when the writer finishes, so writing stays
// streamable. Readers build an id -> offset index at open time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tldr {

inline constexpr char kStoreMagic[8] = {'T', 'L', 'D', 'R', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kStoreVersion = 1;
inline constexpr std::size_t kStoreHeaderBytes = 25;

// Row-major L x D matrix of 32-bit reals.
class TokenMatrix {
 public:
  TokenMatrix() = default;
  TokenMatrix(std::size_t rows, std::size_t cols);
  TokenMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const float> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<float> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  float at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  float& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool AllFinite() const;

  bool operator==(const TokenMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

// Bytes occupied by one record with an id of `id_bytes` bytes.
std::size_t StoreRecordBytes(std::size_t id_bytes, std::size_t rows, std::size_t cols);

class EmbeddingStoreWriter {
 public:
  EmbeddingStoreWriter(const std::string& path, std::uint32_t rows, std::uint32_t cols);
  ~EmbeddingStoreWriter();

  EmbeddingStoreWriter(const EmbeddingStoreWriter&) = delete;
  EmbeddingStoreWriter& operator=(const EmbeddingStoreWriter&) = delete;

  // Throws InvalidArgument on a shape mismatch, a non-finite value or a
  // duplicate id.
  void Add(std::string_view id, const TokenMatrix& matrix);
  void Add(std::string_view id, std::span<const float> values);

  // Patches the header count and closes the file. Returns the record count.
  std::size_t Finish();

 private:
  std::string path_;
  std::ofstream out_;
  std::uint32_t rows_;
  std::uint32_t cols_;
  std::uint32_t count_ = 0;
  bool finished_ = false;
  std::unordered_set<std::string> ids_;
  std::vector<char> scratch_;
};

std::size_t WriteStore(std::span<const std::pair<std::string, TokenMatrix>> items,
                       const std::string& path, std::uint32_t rows, std::uint32_t cols);

// Read-only, memory-mapped view of a TLDREMB1 file. Safe for concurrent
// Fetch calls from any number of threads.
class EmbeddingStore {
 public:
  // Throws FormatError("not an embedding store") on a bad magic, FormatError
  // naming the id on a truncated payload.
  static EmbeddingStore Open(const std::string& path);

  EmbeddingStore(EmbeddingStore&& other) noexcept;
  EmbeddingStore& operator=(EmbeddingStore&& other) noexcept;
  EmbeddingStore(const EmbeddingStore&) = delete;
  EmbeddingStore& operator=(const EmbeddingStore&) = delete;
  ~EmbeddingStore();

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  bool Contains(std::string_view id) const;

  // Throws NotFoundError for an unknown id.
  TokenMatrix Fetch(std::string_view id) const;
  TokenMatrix FetchAt(std::size_t index) const;
  // Copies record `index` into `out` (rows * cols floats).
  void FetchInto(std::size_t index, std::span<float> out) const;
  std::size_t IndexOf(std::string_view id) const;

 private:
  EmbeddingStore() = default;
  void Release();

  const unsigned char* data_ = nullptr;
  std::size_t bytes_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::size_t> offsets_;  // payload offsets
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tldr
