#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coexist/iq.hpp"
#include "coexist/scenario.hpp"
#include "coexist/waveforms.hpp"

namespace coexist::framing {

inline constexpr std::size_t kWindowLen = 1024;
inline constexpr std::size_t kChannels = 2;
inline constexpr std::size_t kWindowValues = kWindowLen * kChannels;

/// 1024 x 2 row-major slice: data[2*n] = I, data[2*n + 1] = Q.
/// `start_sample` is the absolute sample index (t = start_sample / fs).
struct IqWindow {
  std::array<float, kWindowValues> data{};
  std::uint64_t start_sample = 0;
  double sample_rate_hz = 1.024e6;

  float i(std::size_t n) const { return data[2 * n]; }
  float q(std::size_t n) const { return data[2 * n + 1]; }
  double start_s() const { return static_cast<double>(start_sample) / sample_rate_hz; }
  double end_s() const { return static_cast<double>(start_sample + kWindowLen) / sample_rate_hz; }

  bool operator==(const IqWindow&) const = default;
};

struct LabeledWindow {
  IqWindow window;
  std::uint8_t label = 0;

  bool operator==(const LabeledWindow&) const = default;
};

enum class NormPolicy { unit_rms, max_abs, none };

NormPolicy norm_policy_from_string(const std::string& s);
const char* to_string(NormPolicy p);

/// Windows at offsets 0, hop, 2*hop, ...; the trailing partial window is
/// dropped.
std::vector<IqWindow> window_stream(const IqStream& x, std::size_t hop = kWindowLen);

IqWindow normalize(const IqWindow& w, NormPolicy policy);

/// Fraction of the window's time span covered by `bursts`.
double burst_overlap_fraction(const IqWindow& w, std::span<const TimeSpan> bursts);

inline constexpr double kLabelOverlapThreshold = 0.25;

/// Label 1 iff at least 25% of the window span overlaps a burst.
std::vector<LabeledWindow> label_windows(std::span<const IqWindow> windows,
                                         std::span<const TimeSpan> bursts);

/// One gain cell of a generated dataset. Gains are meaningful only when
/// the matching component is present.
struct CellInfo {
  double radar_gain_db = 0.0;
  double cellular_gain_db = 0.0;
  bool has_radar = false;
  bool has_cellular = false;
  std::uint64_t n_windows = 0;
  std::uint64_t n_radar = 0;

  bool operator==(const CellInfo&) const = default;
};

struct DatasetMeta {
  std::vector<double> radar_gains_db;
  std::vector<double> cellular_gains_db;
  std::uint64_t per_cell = 0;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  double sample_rate_hz = 1.024e6;
  std::vector<CellInfo> cells;

  bool operator==(const DatasetMeta&) const = default;
};

/// Dataset windows are detached from stream positions: start_sample is 0
/// and the sample rate lives in `meta`.
struct Dataset {
  std::vector<LabeledWindow> windows;
  DatasetMeta meta;

  std::size_t count(std::uint8_t label) const;
  bool operator==(const Dataset&) const = default;
};

struct TrainingMixOptions {
  waveforms::RadarWaveformConfig radar;
  waveforms::CellularWaveformConfig cellular;
  /// Radar-to-BS taps are evaluated at a random time in [0, trajectory_s].
  double trajectory_s = 120.0;
  /// Gains are referenced to the noise floor with the radar at this time.
  double reference_time_s = 60.0;
  double min_minority_fraction = 0.20;
};

/// Gain grid dataset: one cell per (radar, cellular) gain pair, one
/// cellular-only cell per cellular gain and one noise-only cell, each with
/// `per_cell` windows, labeled from burst spans and shuffled.
///
/// Gains are in dB relative to the scenario noise power: a radar gain of
/// 0 dB puts the pulse peak power at the noise floor (radar at the
/// reference time), a cellular gain of 0 dB puts the OFDM RMS power there.
Dataset build_training_mix(const scenario::Scenario& scn, std::span<const double> radar_gains_db,
                           std::span<const double> cellular_gains_db, std::size_t per_cell,
                           std::uint64_t seed, const TrainingMixOptions& opts = {});

/// .dsb container plus `<path>.json` metadata sidecar.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

/// XXH64 footer checksum of a written .dsb file.
std::uint64_t dataset_checksum(const std::string& path);

}  // namespace coexist::framing
