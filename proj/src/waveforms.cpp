#include "coexist/waveforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "coexist/errors.hpp"
#include "coexist/fft.hpp"
#include "coexist/rng.hpp"

namespace coexist {

void IqStream::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ConfigError("IqStream: sample_rate_hz must be positive, got " +
                      std::to_string(sample_rate_hz));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag())) {
      throw ConfigError("IqStream: non-finite sample at index " + std::to_string(i));
    }
  }
}

double energy(const IqStream& x) {
  double acc = 0.0;
  for (const auto& s : x.samples) {
    const double re = s.real(), im = s.imag();
    acc += re * re + im * im;
  }
  return acc;
}

double mean_power(const IqStream& x) {
  return x.samples.empty() ? 0.0 : energy(x) / static_cast<double>(x.samples.size());
}

namespace waveforms {

using std::numbers::pi;

void RadarWaveformConfig::validate() const {
  if (!(pri_s > 0.0)) throw ConfigError("radar: pri_s must be positive");
  if (!(pulse_width_s > 0.0 && pulse_width_s < pri_s)) {
    throw ConfigError("radar: need 0 < pulse_width_s < pri_s");
  }
  if (!(chirp_bandwidth_hz >= 0.0)) throw ConfigError("radar: chirp_bandwidth_hz must be >= 0");
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw ConfigError("radar: amplitude must be finite and >= 0");
  }
  for (std::size_t i = 0; i < burst_spans.size(); ++i) {
    const auto& s = burst_spans[i];
    if (!(s.end_s > s.start_s)) {
      throw ConfigError("radar: burst span " + std::to_string(i) + " is empty or reversed");
    }
    if (i > 0 && s.start_s < burst_spans[i - 1].end_s) {
      throw ConfigError("radar: burst spans must be ordered and non-overlapping");
    }
  }
}

void CellularWaveformConfig::validate() const {
  if (fft_size <= 0) throw ConfigError("cellular: fft_size must be positive");
  if (!(occupied_subcarriers > 0 && occupied_subcarriers < fft_size)) {
    throw ConfigError("cellular: need 0 < occupied_subcarriers < fft_size");
  }
  if (cp_len < 0 || cp_len >= fft_size) throw ConfigError("cellular: need 0 <= cp_len < fft_size");
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw ConfigError("cellular: amplitude must be finite and >= 0");
  }
}

namespace {

std::size_t sample_count(double duration_s, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("duration_s must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

double initial_phase(std::uint64_t seed) {
  auto rng = make_rng(seed, {0x7261646172ULL});
  return std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
}

}  // namespace

IqStream gen_radar_segment(const RadarWaveformConfig& cfg, double t0_s, std::size_t n,
                           double sample_rate_hz, std::uint64_t seed) {
  cfg.validate();
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
  if (cfg.pulse_width_s * sample_rate_hz < 2.0) {
    throw ConfigError("radar: pulse must span at least 2 samples");
  }

  IqStream out;
  out.sample_rate_hz = sample_rate_hz;
  out.t0_s = t0_s;
  out.samples.assign(n, Sample{});
  if (cfg.amplitude == 0.0) return out;

  const double phi0 = initial_phase(seed);
  const double half_bw = 0.5 * cfg.chirp_bandwidth_hz;
  const double sweep_rate = cfg.chirp_bandwidth_hz / cfg.pulse_width_s;
  const std::vector<TimeSpan> always{{-INFINITY, INFINITY}};
  const auto& spans = cfg.burst_spans.empty() ? always : cfg.burst_spans;

  for (const auto& span : spans) {
    // Sample range overlapping this burst.
    const double k_lo = std::ceil((span.start_s - t0_s) * sample_rate_hz);
    const double k_hi = std::ceil((span.end_s - t0_s) * sample_rate_hz);
    const auto first = static_cast<std::size_t>(std::clamp(k_lo, 0.0, static_cast<double>(n)));
    const auto last = static_cast<std::size_t>(std::clamp(k_hi, 0.0, static_cast<double>(n)));
    const double origin = std::isfinite(span.start_s) ? span.start_s : 0.0;

    for (std::size_t k = first; k < last; ++k) {
      const double t = t0_s + static_cast<double>(k) / sample_rate_hz;
      if (t < span.start_s || t >= span.end_s) continue;
      const double rel = t - origin;
      const double m = std::floor(rel / cfg.pri_s);
      const double tau = rel - m * cfg.pri_s;
      if (tau < 0.0 || tau >= cfg.pulse_width_s) continue;
      const double phase = 2.0 * pi * (-half_bw * tau + 0.5 * sweep_rate * tau * tau) + phi0;
      out.samples[k] = Sample(static_cast<float>(cfg.amplitude * std::cos(phase)),
                              static_cast<float>(cfg.amplitude * std::sin(phase)));
    }
  }
  return out;
}

IqStream gen_radar(const RadarWaveformConfig& cfg, double duration_s, double sample_rate_hz,
                   std::uint64_t seed) {
  return gen_radar_segment(cfg, 0.0, sample_count(duration_s, sample_rate_hz), sample_rate_hz,
                           seed);
}

IqStream gen_cellular_samples(const CellularWaveformConfig& cfg, std::size_t n,
                              double sample_rate_hz, std::uint64_t seed) {
  cfg.validate();
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");

  IqStream out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(n);
  if (cfg.amplitude == 0.0 || n == 0) return out;

  const std::size_t nfft = static_cast<std::size_t>(cfg.fft_size);
  const std::size_t cp = static_cast<std::size_t>(cfg.cp_len);
  const std::size_t sym_len = nfft + cp;
  const int occ = cfg.occupied_subcarriers;
  // Subcarrier offsets -ceil(occ/2)..-1 and 1..floor(occ/2); DC unused.
  std::vector<std::size_t> bins;
  bins.reserve(static_cast<std::size_t>(occ));
  for (int k = -(occ - occ / 2); k <= occ / 2; ++k) {
    if (k == 0) continue;
    bins.push_back(static_cast<std::size_t>(k < 0 ? cfg.fft_size + k : k));
  }

  auto rng = make_rng(seed, {0x6f66646dULL});
  std::bernoulli_distribution bit(0.5);
  const double a = std::numbers::sqrt2 / 2.0;

  std::vector<std::complex<double>> freq(nfft);
  std::vector<std::complex<double>> body;
  std::vector<std::complex<double>> acc(n);
  for (std::size_t pos = 0; pos < n; pos += sym_len) {
    std::fill(freq.begin(), freq.end(), std::complex<double>{});
    for (auto b : bins) freq[b] = {bit(rng) ? a : -a, bit(rng) ? a : -a};
    body = dsp::ifft(freq);
    for (std::size_t i = 0; i < sym_len && pos + i < n; ++i) {
      acc[pos + i] = i < cp ? body[nfft - cp + i] : body[i - cp];
    }
  }

  double p = 0.0;
  for (const auto& v : acc) p += std::norm(v);
  const double rms = std::sqrt(p / static_cast<double>(n));
  const double g = rms > 0.0 ? cfg.amplitude / rms : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = Sample(static_cast<float>(acc[i].real() * g), static_cast<float>(acc[i].imag() * g));
  }
  return out;
}

IqStream gen_cellular(const CellularWaveformConfig& cfg, double duration_s, double sample_rate_hz,
                      std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = sample_count(duration_s, sample_rate_hz);
  if (n < static_cast<std::size_t>(cfg.symbol_len())) {
    throw ConfigError("cellular: duration shorter than one OFDM symbol (" +
                      std::to_string(cfg.symbol_len()) + " samples)");
  }
  return gen_cellular_samples(cfg, n, sample_rate_hz, seed);
}

IqStream gen_awgn(double power, std::size_t n, std::uint64_t seed, double sample_rate_hz) {
  if (!(power >= 0.0) || !std::isfinite(power)) throw ConfigError("awgn: power must be >= 0");
  IqStream out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(n);
  if (power == 0.0) return out;
  auto rng = make_rng(seed, {0x6177676eULL});
  std::normal_distribution<double> normal(0.0, std::sqrt(power / 2.0));
  for (auto& s : out.samples) {
    const double re = normal(rng);
    const double im = normal(rng);
    s = Sample(static_cast<float>(re), static_cast<float>(im));
  }
  return out;
}

IqStream mix(std::span<const MixPart> parts) {
  if (parts.empty()) throw ConfigError("mix: no input streams");
  const double fs = parts.front().stream->sample_rate_hz;
  double t0 = parts.front().stream->t0_s;
  for (const auto& p : parts) {
    if (std::abs(p.stream->sample_rate_hz - fs) > 1e-9 * fs) {
      throw ConfigError("mix: mismatched sample rates (" + std::to_string(fs) + " vs " +
                        std::to_string(p.stream->sample_rate_hz) + ")");
    }
    t0 = std::min(t0, p.stream->t0_s);
  }

  std::vector<std::size_t> offsets;
  std::size_t len = 0;
  for (const auto& p : parts) {
    const auto off = static_cast<std::size_t>(std::llround((p.stream->t0_s - t0) * fs));
    offsets.push_back(off);
    len = std::max(len, off + p.stream->size());
  }

  std::vector<std::complex<double>> acc(len);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double g = db_to_amplitude(parts[i].gain_db);
    const auto& src = parts[i].stream->samples;
    for (std::size_t k = 0; k < src.size(); ++k) {
      acc[offsets[i] + k] += g * std::complex<double>(src[k].real(), src[k].imag());
    }
  }

  IqStream out;
  out.sample_rate_hz = fs;
  out.t0_s = t0;
  out.samples.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    out.samples[k] = Sample(static_cast<float>(acc[k].real()), static_cast<float>(acc[k].imag()));
  }
  return out;
}

IqStream mix(std::initializer_list<MixPart> parts) {
  return mix(std::span<const MixPart>(parts.begin(), parts.size()));
}

IqStream scale(const IqStream& x, double gain_db) { return mix({MixPart{&x, gain_db}}); }

}  // namespace waveforms
}  // namespace coexist
