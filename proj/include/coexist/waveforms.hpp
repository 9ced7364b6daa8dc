#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coexist/iq.hpp"

namespace coexist::waveforms {

/// Pulsed linear-FM radar. Pulses start at every `pri_s` from the beginning
/// of each burst span and sweep `chirp_bandwidth_hz` centered on 0 Hz.
struct RadarWaveformConfig {
  double pri_s = 1e-3;
  double pulse_width_s = 100e-6;
  double chirp_bandwidth_hz = 200e3;
  double amplitude = 1.0;
  std::vector<TimeSpan> burst_spans;  // empty => transmits throughout

  void validate() const;
};

enum class Modulation { qpsk };

/// CP-OFDM downlink with random QPSK on the centered occupied subcarriers.
struct CellularWaveformConfig {
  int fft_size = 1024;
  int cp_len = 72;
  int occupied_subcarriers = 600;
  Modulation modulation = Modulation::qpsk;
  double amplitude = 1.0;  // RMS

  int symbol_len() const noexcept { return fft_size + cp_len; }
  void validate() const;
};

IqStream gen_radar(const RadarWaveformConfig& cfg, double duration_s, double sample_rate_hz,
                   std::uint64_t seed);

/// Radar samples for absolute times t0_s + k / sample_rate_hz, k < n. Pulse
/// timing and chirp phase match gen_radar at the same instants, so
/// consecutive segments tile seamlessly.
IqStream gen_radar_segment(const RadarWaveformConfig& cfg, double t0_s, std::size_t n,
                           double sample_rate_hz, std::uint64_t seed);

IqStream gen_cellular(const CellularWaveformConfig& cfg, double duration_s, double sample_rate_hz,
                      std::uint64_t seed);

/// Exactly `n` samples of CP-OFDM (the final symbol may be truncated).
IqStream gen_cellular_samples(const CellularWaveformConfig& cfg, std::size_t n,
                              double sample_rate_hz, std::uint64_t seed);

IqStream gen_awgn(double power, std::size_t n, std::uint64_t seed, double sample_rate_hz = 1.024e6);

struct MixPart {
  const IqStream* stream;
  double gain_db;
};

/// Sum of the parts each scaled by 10^(gain_db/20), aligned on absolute
/// time; shorter streams are zero padded.
IqStream mix(std::span<const MixPart> parts);
IqStream mix(std::initializer_list<MixPart> parts);

IqStream scale(const IqStream& x, double gain_db);

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace coexist::waveforms
