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

#include "tldr/embstore.h"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>

#include "tldr/error.h"

namespace tldr {

namespace {

template <typename T>
T ToLittle(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
void PutLe(std::vector<char>& buf, T value) {
  value = ToLittle(value);
  const char* p = reinterpret_cast<const char*>(&value);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T GetLe(const unsigned char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return ToLittle(value);
}

void EncodeFloats(std::span<const float> values, std::vector<char>& buf) {
  const std::size_t start = buf.size();
  buf.resize(start + values.size() * sizeof(float));
  std::memcpy(buf.data() + start, values.data(), values.size() * sizeof(float));
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      float v = ToLittle(values[i]);
      std::memcpy(buf.data() + start + i * sizeof(float), &v, sizeof(float));
    }
  }
}

}  // namespace

TokenMatrix::TokenMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

TokenMatrix::TokenMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw InvalidArgument("token matrix expects " + std::to_string(rows * cols) + " values, got " +
                          std::to_string(values_.size()));
  }
}

bool TokenMatrix::AllFinite() const {
  for (float v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::size_t StoreRecordBytes(std::size_t id_bytes, std::size_t rows, std::size_t cols) {
  return sizeof(std::uint16_t) + id_bytes + rows * cols * sizeof(float);
}

EmbeddingStoreWriter::EmbeddingStoreWriter(const std::string& path, std::uint32_t rows,
                                           std::uint32_t cols)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw InvalidArgument("embedding store needs L >= 1 and D >= 1");
  if (!out_) throw IoError("cannot write embedding store '" + path + "'");
  std::vector<char> header(kStoreMagic, kStoreMagic + sizeof(kStoreMagic));
  PutLe<std::uint32_t>(header, kStoreVersion);
  PutLe<std::uint32_t>(header, 0);
  PutLe<std::uint32_t>(header, rows);
  PutLe<std::uint32_t>(header, cols);
  header.push_back(0);  // dtype f32
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

EmbeddingStoreWriter::~EmbeddingStoreWriter() {
  if (!finished_) {
    try {
      Finish();
    } catch (...) {
    }
  }
}

void EmbeddingStoreWriter::Add(std::string_view id, const TokenMatrix& matrix) {
  if (matrix.rows() != rows_ || matrix.cols() != cols_) {
    throw InvalidArgument("shape mismatch for id '" + std::string(id) + "': got " +
                          std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()) +
                          ", store is " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  Add(id, matrix.values());
}

void EmbeddingStoreWriter::Add(std::string_view id, std::span<const float> values) {
  if (finished_) throw InvalidArgument("embedding store writer already finished");
  if (id.empty() || id.size() > 0xffff) {
    throw InvalidArgument("id length must be in [1, 65535]: '" + std::string(id) + "'");
  }
  if (values.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw InvalidArgument("shape mismatch for id '" + std::string(id) + "'");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite value for id '" + std::string(id) + "'");
  }
  if (!ids_.emplace(id).second) throw InvalidArgument("duplicate id '" + std::string(id) + "'");

  scratch_.clear();
  PutLe<std::uint16_t>(scratch_, static_cast<std::uint16_t>(id.size()));
  scratch_.insert(scratch_.end(), id.begin(), id.end());
  EncodeFloats(values, scratch_);
  out_.write(scratch_.data(), static_cast<std::streamsize>(scratch_.size()));
  if (!out_) throw IoError("write failure on embedding store '" + path_ + "'");
  ++count_;
}

std::size_t EmbeddingStoreWriter::Finish() {
  if (finished_) return count_;
  finished_ = true;
  std::vector<char> count;
  PutLe<std::uint32_t>(count, count_);
  out_.seekp(12);
  out_.write(count.data(), static_cast<std::streamsize>(count.size()));
  out_.close();
  if (!out_) throw IoError("write failure on embedding store '" + path_ + "'");
  return count_;
}

std::size_t WriteStore(std::span<const std::pair<std::string, TokenMatrix>> items,
                       const std::string& path, std::uint32_t rows, std::uint32_t cols) {
  EmbeddingStoreWriter writer(path, rows, cols);
  for (const auto& [id, matrix] : items) writer.Add(id, matrix);
  return writer.Finish();
}

EmbeddingStore EmbeddingStore::Open(const std::string& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) throw IoError("cannot open embedding store '" + path + "'");
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    throw IoError("cannot stat embedding store '" + path + "'");
  }
  const auto bytes = static_cast<std::size_t>(st.st_size);
  if (bytes < kStoreHeaderBytes) {
    ::close(fd);
    throw FormatError("not an embedding store: '" + path + "'");
  }
  void* map = ::mmap(nullptr, bytes, PROT_READ, MAP_PRIVATE, fd, 0);
  ::close(fd);
  if (map == MAP_FAILED) throw IoError("cannot map embedding store '" + path + "'");

  EmbeddingStore store;
  store.data_ = static_cast<const unsigned char*>(map);
  store.bytes_ = bytes;
  const unsigned char* p = store.data_;
  if (std::memcmp(p, kStoreMagic, sizeof(kStoreMagic)) != 0) {
    throw FormatError("not an embedding store: '" + path + "'");
  }
  const auto version = GetLe<std::uint32_t>(p + 8);
  if (version != kStoreVersion) {
    throw FormatError("unsupported embedding store version " + std::to_string(version));
  }
  const auto count = GetLe<std::uint32_t>(p + 12);
  store.rows_ = GetLe<std::uint32_t>(p + 16);
  store.cols_ = GetLe<std::uint32_t>(p + 20);
  if (p[24] != 0) throw FormatError("unsupported embedding store dtype " + std::to_string(p[24]));
  if (store.rows_ == 0 || store.cols_ == 0) throw FormatError("embedding store has zero L or D");

  const std::size_t payload = store.rows_ * store.cols_ * sizeof(float);
  std::size_t offset = kStoreHeaderBytes;
  store.ids_.reserve(count);
  store.offsets_.reserve(count);
  store.index_.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (offset + sizeof(std::uint16_t) > bytes) {
      throw FormatError("truncated embedding store: record #" + std::to_string(i) + " missing");
    }
    const auto id_len = GetLe<std::uint16_t>(p + offset);
    offset += sizeof(std::uint16_t);
    if (offset + id_len > bytes) {
      throw FormatError("truncated embedding store: id of record #" + std::to_string(i));
    }
    std::string id(reinterpret_cast<const char*>(p + offset), id_len);
    offset += id_len;
    if (offset + payload > bytes) {
      throw FormatError("truncated payload for id '" + id + "'");
    }
    if (!store.index_.emplace(id, store.ids_.size()).second) {
      throw FormatError("duplicate id '" + id + "' in embedding store");
    }
    store.ids_.push_back(std::move(id));
    store.offsets_.push_back(offset);
    offset += payload;
  }
  if (offset != bytes) {
    throw FormatError("embedding store has " + std::to_string(bytes - offset) +
                      " trailing bytes after " + std::to_string(count) + " records");
  }
  return store;
}

EmbeddingStore::EmbeddingStore(EmbeddingStore&& other) noexcept { *this = std::move(other); }

EmbeddingStore& EmbeddingStore::operator=(EmbeddingStore&& other) noexcept {
  if (this != &other) {
    Release();
    data_ = std::exchange(other.data_, nullptr);
    bytes_ = std::exchange(other.bytes_, 0);
    rows_ = other.rows_;
    cols_ = other.cols_;
    ids_ = std::move(other.ids_);
    offsets_ = std::move(other.offsets_);
    index_ = std::move(other.index_);
  }
  return *this;
}

EmbeddingStore::~EmbeddingStore() { Release(); }

void EmbeddingStore::Release() {
  if (data_ != nullptr) {
    ::munmap(const_cast<unsigned char*>(data_), bytes_);
    data_ = nullptr;
  }
}

bool EmbeddingStore::Contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::size_t EmbeddingStore::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw NotFoundError("id not found in embedding store: '" + std::string(id) + "'");
  return it->second;
}

TokenMatrix EmbeddingStore::Fetch(std::string_view id) const { return FetchAt(IndexOf(id)); }

TokenMatrix EmbeddingStore::FetchAt(std::size_t index) const {
  TokenMatrix matrix(rows_, cols_);
  FetchInto(index, matrix.values());
  return matrix;
}

void EmbeddingStore::FetchInto(std::size_t index, std::span<float> out) const {
  if (index >= offsets_.size()) throw NotFoundError("record index out of range");
  if (out.size() != rows_ * cols_) throw InvalidArgument("FetchInto: output size mismatch");
  const unsigned char* src = data_ + offsets_[index];
  std::memcpy(out.data(), src, out.size() * sizeof(float));
  if constexpr (std::endian::native != std::endian::little) {
    for (float& v : out) v = ToLittle(v);
  }
}

}  // namespace tldr
