#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "qa/error.hpp"

namespace qa::io {

/// Little-endian fixed-width encoder over an in-memory buffer.
class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.append(raw); }

  template <typename T>
  void integer(T value) {
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buffer_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
  }

  void u32(std::uint32_t v) { integer(v); }
  void u64(std::uint64_t v) { integer(v); }
  void f64(double v) { integer(std::bit_cast<std::uint64_t>(v)); }

  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  const std::string& buffer() const noexcept { return buffer_; }

 private:
  std::string buffer_;
};

/// Bounds-checked counterpart of ByteWriter; running past the end throws.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    if (n > data_.size() - pos_) throw Error("format", "truncated file");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T integer() {
    auto raw = bytes(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(raw[i])) << (8 * i);
    }
    return static_cast<T>(u);
  }

  std::uint32_t u32() { return integer<std::uint32_t>(); }
  std::uint64_t u64() { return integer<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(integer<std::uint64_t>()); }

  std::string string() {
    const auto n = u32();
    return std::string(bytes(n));
  }

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Whole-file helpers; failures throw qa::Error("io", ...).
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace qa::io
