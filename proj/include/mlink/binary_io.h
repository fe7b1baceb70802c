// Copyright 2026 The mentionlink Authors.
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

#ifndef MLINK_BINARY_IO_H_
#define MLINK_BINARY_IO_H_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mlink/errors.h"

namespace mlink {

// Appends little-endian encoded values to an in-memory buffer.
class BinaryWriter {
 public:
  void WriteMagic(std::string_view magic) { buffer_.append(magic); }

  template <typename T>
  void Write(T value) {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(std::begin(bytes), std::end(bytes));
    }
    buffer_.append(reinterpret_cast<const char *>(bytes), sizeof(T));
  }

  template <typename T>
  void WriteArray(std::span<const T> values) {
    for (const T &v : values) Write(v);
  }

  // u32 byte length followed by the raw UTF-8 bytes.
  void WriteString(std::string_view s) {
    Write(static_cast<uint32_t>(s.size()));
    buffer_.append(s);
  }

  const std::string &buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

// Reads values produced by BinaryWriter; every overrun is a parse error.
class BinaryReader {
 public:
  BinaryReader(std::string_view data, std::string source)
      : data_(data), source_(std::move(source)) {}

  void ExpectMagic(std::string_view magic) {
    if (Take(magic.size()) != magic) {
      Fail(ErrorKind::kParse, source_ + ": bad magic, expected \"" +
                                  std::string(magic) + "\"");
    }
  }

  template <typename T>
  T Read() {
    static_assert(std::is_arithmetic_v<T>);
    std::string_view raw = Take(sizeof(T));
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, raw.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(std::begin(bytes), std::end(bytes));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  template <typename T>
  void ReadArray(std::span<T> out) {
    for (T &v : out) v = Read<T>();
  }

  std::string ReadString() {
    const uint32_t size = Read<uint32_t>();
    return std::string(Take(size));
  }

  bool AtEnd() const { return offset_ == data_.size(); }

  void ExpectEnd() const {
    if (!AtEnd()) Fail(ErrorKind::kParse, source_ + ": trailing bytes");
  }

  const std::string &source() const { return source_; }

 private:
  std::string_view Take(size_t n) {
    if (data_.size() - offset_ < n) {
      Fail(ErrorKind::kParse, source_ + ": truncated file");
    }
    std::string_view out = data_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  std::string_view data_;
  size_t offset_ = 0;
  std::string source_;
};

// Reads a whole file. Missing files raise ErrorKind::kNotFound.
std::string ReadFile(const std::filesystem::path &path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// observe either the previous content or the complete new content.
void WriteFileAtomic(const std::filesystem::path &path,
                     std::string_view contents);

}  // namespace mlink

#endif  // MLINK_BINARY_IO_H_
