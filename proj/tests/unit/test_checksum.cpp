#include <doctest.h>

#include <string>

#include "coexist/checksum.hpp"

using coexist::xxh64;

namespace {
std::uint64_t h(const std::string& s, std::uint64_t seed = 0) { return xxh64(s.data(), s.size(), seed); }
}  // namespace

TEST_CASE("xxh64 matches reference digests") {
  // Reference values from the python-xxhash package.
  CHECK(h("") == 0xef46db3751d8e999ULL);
  CHECK(h("a") == 0xd24ec4f1a98c6e5bULL);
  CHECK(h("abc") == 0x44bc2cf5ad770999ULL);
  CHECK(h("Nobody inspects the spammish repetition") == 0xfbcea83c8a378bf1ULL);
  CHECK(h("abc", 1) == 0xbea9ca8199328908ULL);
  std::string block;
  for (int r = 0; r < 3; ++r)
    for (int i = 0; i < 256; ++i) block.push_back(static_cast<char>(i));
  CHECK(h(block) == 0x8e03c838c596036fULL);
}

TEST_CASE("streaming xxh64 equals one-shot for every split point") {
  std::string data;
  for (int i = 0; i < 200; ++i) data.push_back(static_cast<char>(i * 7 + 3));
  const auto whole = h(data);
  for (std::size_t cut = 0; cut <= data.size(); cut += 3) {
    coexist::Xxh64 s;
    s.update(data.data(), cut);
    s.update(data.data() + cut, data.size() - cut);
    CHECK(s.digest() == whole);
  }
}

TEST_CASE("sha256 of abc") {
  CHECK(coexist::to_hex(coexist::sha256("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(coexist::to_hex(coexist::sha256("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
