#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "coexist/checksum.hpp"
#include "coexist/errors.hpp"
#include "coexist/framing.hpp"

namespace coexist::framing {
namespace {

constexpr std::string_view kMagic = "DSB1";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4 + 4;
constexpr std::size_t kRecordBytes = 1 + kWindowValues * 4;

nlohmann::json meta_to_json(const Dataset& ds) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : ds.meta.cells) {
    cells.push_back({{"radar_gain_db", c.has_radar ? nlohmann::json(c.radar_gain_db) : nlohmann::json()},
                     {"cellular_gain_db", c.has_cellular ? nlohmann::json(c.cellular_gain_db) : nlohmann::json()},
                     {"n_windows", c.n_windows},
                     {"n_radar", c.n_radar}});
  }
  return {{"format", "dsb"},
          {"version", kVersion},
          {"checksum", "xxh64"},
          {"n_windows", ds.windows.size()},
          {"label_counts", {{"0", ds.count(0)}, {"1", ds.count(1)}}},
          {"radar_gains_db", ds.meta.radar_gains_db},
          {"cellular_gains_db", ds.meta.cellular_gains_db},
          {"per_cell", ds.meta.per_cell},
          {"seed", ds.meta.seed},
          {"scenario_hash", ds.meta.scenario_hash},
          {"sample_rate_hz", ds.meta.sample_rate_hz},
          {"cells", cells}};
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
  DatasetMeta m;
  m.radar_gains_db = j.value("radar_gains_db", std::vector<double>{});
  m.cellular_gains_db = j.value("cellular_gains_db", std::vector<double>{});
  m.per_cell = j.value("per_cell", std::uint64_t{0});
  m.seed = j.value("seed", std::uint64_t{0});
  m.scenario_hash = j.value("scenario_hash", std::string{});
  m.sample_rate_hz = j.value("sample_rate_hz", 1.024e6);
  for (const auto& c : j.value("cells", nlohmann::json::array())) {
    CellInfo ci;
    ci.has_radar = !c.at("radar_gain_db").is_null();
    ci.has_cellular = !c.at("cellular_gain_db").is_null();
    if (ci.has_radar) ci.radar_gain_db = c.at("radar_gain_db").get<double>();
    if (ci.has_cellular) ci.cellular_gain_db = c.at("cellular_gain_db").get<double>();
    ci.n_windows = c.at("n_windows").get<std::uint64_t>();
    ci.n_radar = c.at("n_radar").get<std::uint64_t>();
    m.cells.push_back(ci);
  }
  return m;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
  if (ds.windows.empty()) throw ConfigError("write_dataset: dataset is empty");
  detail::ByteWriter w;
  w.str(kMagic);
  w.u32(kVersion);
  w.u64(ds.windows.size());
  w.u32(static_cast<std::uint32_t>(kWindowLen));
  w.u32(static_cast<std::uint32_t>(kChannels));
  w.data().reserve(kHeaderBytes + ds.windows.size() * kRecordBytes + 8);
  for (const auto& lw : ds.windows) {
    if (lw.label > 1) throw ConfigError("write_dataset: label must be 0 or 1");
    w.u8(lw.label);
    for (float v : lw.window.data) w.f32(v);
  }
  const auto& buf = w.data();
  w.u64(xxh64(buf.data() + kHeaderBytes, buf.size() - kHeaderBytes));
  detail::write_file(path, w.data());
  detail::write_file(path + ".json", meta_to_json(ds).dump(2) + "\n");
}

Dataset read_dataset(const std::string& path) {
  const std::string data = detail::read_file(path);
  detail::ByteReader r(data, "dsb " + path);
  r.expect_magic(kMagic);
  if (auto at = r.pos(); r.u32("version") != kVersion) r.fail("unsupported version", at);
  const auto n_at = r.pos();
  const std::uint64_t n = r.u64("n_windows");
  if (auto at = r.pos(); r.u32("window_len") != kWindowLen) r.fail("window_len must be 1024", at);
  if (auto at = r.pos(); r.u32("channels") != kChannels) r.fail("channels must be 2", at);
  if (n == 0) r.fail("empty dataset", n_at);
  if (r.remaining() < 8 || n > (r.remaining() - 8) / kRecordBytes) {
    r.fail("body truncated: header declares " + std::to_string(n) + " windows", n_at);
  }
  if (r.remaining() != n * kRecordBytes + 8) r.fail("unexpected trailing bytes", r.pos());

  const std::uint64_t expect = xxh64(data.data() + kHeaderBytes, n * kRecordBytes);

  Dataset ds;
  ds.meta = meta_from_json([&] {
    const auto side = path + ".json";
    if (!std::filesystem::exists(side)) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(detail::read_file(side));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("dsb sidecar " + side + ": " + e.what(), 0);
    }
  }());

  ds.windows.resize(n);
  for (auto& lw : ds.windows) {
    const auto at = r.pos();
    lw.label = r.u8("label");
    if (lw.label > 1) r.fail("label must be 0 or 1", at);
    lw.window.sample_rate_hz = ds.meta.sample_rate_hz;
    for (auto& v : lw.window.data) {
      v = r.f32("sample");
      if (!std::isfinite(v)) r.fail("non-finite sample value", r.pos() - 4);
    }
  }
  const auto footer_at = r.pos();
  if (r.u64("checksum") != expect) r.fail("checksum mismatch", footer_at);
  return ds;
}

std::uint64_t dataset_checksum(const std::string& path) {
  const std::string data = detail::read_file(path);
  detail::ByteReader r(data, "dsb " + path);
  if (data.size() < kHeaderBytes + 8) r.fail("file too short", 0);
  detail::ByteReader tail(std::string_view(data).substr(data.size() - 8), "dsb " + path);
  return tail.u64("checksum");
}

}  // namespace coexist::framing
