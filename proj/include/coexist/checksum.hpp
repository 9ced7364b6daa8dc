#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace coexist {

/// Streaming XXH64 (seed 0 unless given). Used as the footer checksum of
/// the .dsb and .cnw containers.
class Xxh64 {
 public:
  explicit Xxh64(std::uint64_t seed = 0);

  void update(std::span<const std::byte> data);
  void update(const void* data, std::size_t len);
  std::uint64_t digest() const;

 private:
  std::uint64_t v_[4];
  std::uint64_t total_len_ = 0;
  std::uint64_t seed_;
  unsigned char buf_[32];
  std::size_t buf_len_ = 0;
};

std::uint64_t xxh64(const void* data, std::size_t len, std::uint64_t seed = 0);

/// SHA-256 of `text`, raw 32 bytes.
std::string sha256(std::string_view text);

std::string to_hex(std::string_view bytes);

}  // namespace coexist
