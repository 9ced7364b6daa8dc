#include "coexist/tensor_file.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "coexist/checksum.hpp"
#include "coexist/errors.hpp"

namespace coexist::nn {
namespace {

constexpr std::string_view kMagic = "CNW1";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 32;
constexpr std::uint8_t kDtypeF32 = 0;

}  // namespace

const Tensor* TensorFile::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

std::string encode_tensor_file(const TensorFile& f) {
  detail::ByteWriter w;
  w.str(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(f.tensors.size()));
  w.bytes(f.arch_hash.data(), f.arch_hash.size());
  for (const auto& nt : f.tensors) {
    nt.tensor.validate(nt.name);
    if (nt.name.size() > 0xFFFF) throw ConfigError("tensor name too long: " + nt.name.substr(0, 40));
    if (nt.tensor.rank() > 0xFF) throw ConfigError(nt.name + ": too many dims");
    w.u16(static_cast<std::uint16_t>(nt.name.size()));
    w.str(nt.name);
    w.u8(kDtypeF32);
    w.u8(static_cast<std::uint8_t>(nt.tensor.rank()));
    for (auto d : nt.tensor.dims) {
      if (d > 0xFFFFFFFFu) throw ConfigError(nt.name + ": dim exceeds u32");
      w.u32(static_cast<std::uint32_t>(d));
    }
    for (float v : nt.tensor.data) w.f32(v);
  }
  const auto& buf = w.data();
  w.u64(xxh64(buf.data() + kHeaderBytes, buf.size() - kHeaderBytes));
  return w.data();
}

TensorFile decode_tensor_file(const std::string& bytes, const std::string& what) {
  detail::ByteReader r(bytes, what);
  if (bytes.empty()) r.fail("empty file", 0);
  r.expect_magic(kMagic);
  if (auto at = r.pos(); r.u32("version") != kVersion) r.fail("unsupported version", at);
  const std::uint32_t n = r.u32("n_tensors");
  TensorFile f;
  auto hash = r.take(32, "architecture hash");
  std::copy(hash.begin(), hash.end(), f.arch_hash.begin());

  for (std::uint32_t t = 0; t < n; ++t) {
    NamedTensor nt;
    const auto len = r.u16("name_len");
    nt.name = std::string(r.take(len, "tensor name"));
    if (auto at = r.pos(); r.u8("dtype") != kDtypeF32) r.fail(nt.name + ": unsupported dtype", at);
    const auto ndim = r.u8("ndim");
    std::size_t count = 1;
    const auto dims_at = r.pos();
    bool overflow = false;
    for (std::uint8_t i = 0; i < ndim; ++i) {
      const std::size_t d = r.u32("dim");
      nt.tensor.dims.push_back(d);
      if (d != 0 && count > (std::size_t{1} << 40) / d) overflow = true;
      count *= d;
    }
    if (overflow || count > r.remaining() / 4) r.fail(nt.name + ": tensor data truncated", dims_at);
    nt.tensor.data.resize(count);
    for (auto& v : nt.tensor.data) v = r.f32("tensor data");
    f.tensors.push_back(std::move(nt));
  }
  const std::size_t body_end = r.pos();
  const auto footer_at = r.pos();
  const std::uint64_t sum = r.u64("checksum");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum", r.pos());
  if (sum != xxh64(bytes.data() + kHeaderBytes, body_end - kHeaderBytes)) {
    r.fail("checksum mismatch", footer_at);
  }
  return f;
}

void write_tensor_file(const TensorFile& f, const std::string& path) {
  detail::write_file(path, encode_tensor_file(f));
}

TensorFile read_tensor_file(const std::string& path) {
  return decode_tensor_file(detail::read_file(path), "cnw " + path);
}

}  // namespace coexist::nn
