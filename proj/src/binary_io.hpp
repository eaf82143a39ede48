// Copyright 2026 The MapsTP Authors
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

#ifndef MAPSTP__SRC__BINARY_IO_HPP_
#define MAPSTP__SRC__BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mapstp/errors.hpp"

namespace mapstp::detail
{

// Explicit little-endian encoding, independent of host byte order.
class ByteWriter
{
public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void u64(std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void str(std::string_view s)
  {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  void append(const ByteWriter & other)
  {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
  }

  std::size_t size() const noexcept { return bytes_.size(); }
  const std::vector<std::uint8_t> & bytes() const noexcept { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader; `where()` names the current context in errors.
class ByteReader
{
public:
  ByteReader(const std::uint8_t * data, std::size_t size, std::string context)
  : data_(data), size_(size), context_(std::move(context))
  {
  }

  std::uint8_t u8()
  {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32()
  {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    }
    return v;
  }
  std::uint64_t u64()
  {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    }
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n)
  {
    need(n);
    std::string s(reinterpret_cast<const char *>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(u32()); }

  /// Sub-reader over the next n bytes.
  ByteReader sub(std::size_t n, std::string context)
  {
    need(n);
    ByteReader r(data_ + pos_, n, std::move(context));
    pos_ += n;
    return r;
  }

  std::size_t remaining() const noexcept { return size_ - pos_; }
  bool done() const noexcept { return pos_ == size_; }
  const std::string & context() const noexcept { return context_; }
  void set_context(std::string context) { context_ = std::move(context); }

  [[noreturn]] void fail(const std::string & what) const
  {
    throw ParseError(context_ + ": " + what);
  }

private:
  void need(std::size_t n) const
  {
    if (size_ - pos_ < n) {
      fail("truncated (needed " + std::to_string(n) + " more bytes, " + std::to_string(size_ - pos_) + " left)");
    }
  }

  const std::uint8_t * data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path & path);
void write_file(const std::filesystem::path & path, const std::vector<std::uint8_t> & bytes);
void write_text_file(const std::filesystem::path & path, std::string_view text);

}  // namespace mapstp::detail

#endif  // MAPSTP__SRC__BINARY_IO_HPP_
