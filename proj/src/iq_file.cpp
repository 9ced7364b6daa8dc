#include "coexist/iq_file.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "coexist/errors.hpp"

namespace coexist {
namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return data;
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

namespace {
constexpr std::string_view kMagic = "IQB1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_iqb(const std::string& path, const IqStream& x, const nlohmann::json* meta) {
  x.validate();
  detail::ByteWriter w;
  w.str(kMagic);
  w.u32(kVersion);
  w.f64(x.sample_rate_hz);
  w.f64(x.t0_s);
  w.u64(x.samples.size());
  for (const auto& s : x.samples) {
    w.f32(s.real());
    w.f32(s.imag());
  }
  detail::write_file(path, w.data());
  if (meta != nullptr) detail::write_file(path + ".json", meta->dump(2) + "\n");
}

IqStream read_iqb(const std::string& path) {
  const std::string data = detail::read_file(path);
  detail::ByteReader r(data, "iqb " + path);
  r.expect_magic(kMagic);
  const auto version_at = r.pos();
  if (auto v = r.u32("version"); v != kVersion) {
    r.fail("unsupported version " + std::to_string(v), version_at);
  }
  IqStream x;
  const auto rate_at = r.pos();
  x.sample_rate_hz = r.f64("sample_rate_hz");
  if (!(x.sample_rate_hz > 0.0) || !std::isfinite(x.sample_rate_hz)) {
    r.fail("sample_rate_hz must be positive", rate_at);
  }
  x.t0_s = r.f64("t0_s");
  const auto n_at = r.pos();
  const std::uint64_t n = r.u64("n_samples");
  if (n > r.remaining() / 8) {
    r.fail("body truncated: header declares " + std::to_string(n) + " samples but only " +
               std::to_string(r.remaining()) + " body bytes follow",
           n_at);
  }
  x.samples.resize(n);
  for (auto& s : x.samples) {
    const float i = r.f32("I");
    const float q = r.f32("Q");
    s = Sample(i, q);
  }
  if (r.remaining() != 0) r.fail("trailing bytes after body", r.pos());
  return x;
}

nlohmann::json read_iqb_meta(const std::string& path) {
  const std::string side = path + ".json";
  if (!std::filesystem::exists(side)) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(detail::read_file(side));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("iqb sidecar " + side + ": " + e.what(), e.byte);
  }
}

}  // namespace coexist
