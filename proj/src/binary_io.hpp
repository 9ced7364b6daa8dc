#pragma once

// Little-endian byte encoding shared by the .iqb, .dsb and .cnw containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "coexist/errors.hpp"

namespace coexist::detail {

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void str(std::string_view s) { bytes(s.data(), s.size()); }
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u8(std::uint8_t v) { uint(v); }
  void u16(std::uint16_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  std::size_t size() const noexcept { return buf_.size(); }
  const std::string& data() const noexcept { return buf_; }
  std::string& data() noexcept { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  std::string_view take(std::size_t n, const char* field) {
    if (remaining() < n) {
      throw FormatError(what_ + ": truncated while reading " + field + " (need " +
                            std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")",
                        pos_);
    }
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T uint(const char* field) {
    auto s = take(sizeof(T), field);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= T(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::uint8_t u8(const char* f) { return uint<std::uint8_t>(f); }
  std::uint16_t u16(const char* f) { return uint<std::uint16_t>(f); }
  std::uint32_t u32(const char* f) { return uint<std::uint32_t>(f); }
  std::uint64_t u64(const char* f) { return uint<std::uint64_t>(f); }
  float f32(const char* f) { return std::bit_cast<float>(u32(f)); }
  double f64(const char* f) { return std::bit_cast<double>(u64(f)); }

  void expect_magic(std::string_view magic) {
    const auto at = pos_;
    auto got = take(magic.size(), "magic");
    if (got != magic) {
      throw FormatError(what_ + ": bad magic, expected \"" + std::string(magic) + "\"", at);
    }
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw FormatError(what_ + ": " + msg, at);
  }

 private:
  std::string_view data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

}  // namespace coexist::detail
