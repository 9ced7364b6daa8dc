#include <algorithm>
#include <cmath>
#include <random>

#include "coexist/errors.hpp"
#include "coexist/framing.hpp"
#include "coexist/logging.hpp"
#include "coexist/rng.hpp"

namespace coexist::framing {

NormPolicy norm_policy_from_string(const std::string& s) {
  if (s == "unit_rms") return NormPolicy::unit_rms;
  if (s == "max_abs") return NormPolicy::max_abs;
  if (s == "none") return NormPolicy::none;
  throw ConfigError("unknown normalization policy '" + s + "'");
}

const char* to_string(NormPolicy p) {
  switch (p) {
    case NormPolicy::unit_rms: return "unit_rms";
    case NormPolicy::max_abs: return "max_abs";
    case NormPolicy::none: return "none";
  }
  return "?";
}

std::vector<IqWindow> window_stream(const IqStream& x, std::size_t hop) {
  if (hop == 0) throw UsageError("window_stream: hop must be >= 1");
  std::vector<IqWindow> out;
  if (x.size() < kWindowLen) return out;
  const std::uint64_t base = static_cast<std::uint64_t>(std::llround(x.t0_s * x.sample_rate_hz));
  out.reserve((x.size() - kWindowLen) / hop + 1);
  for (std::size_t off = 0; off + kWindowLen <= x.size(); off += hop) {
    IqWindow w;
    w.start_sample = base + off;
    w.sample_rate_hz = x.sample_rate_hz;
    for (std::size_t n = 0; n < kWindowLen; ++n) {
      w.data[2 * n] = x.samples[off + n].real();
      w.data[2 * n + 1] = x.samples[off + n].imag();
    }
    out.push_back(w);
  }
  return out;
}

IqWindow normalize(const IqWindow& w, NormPolicy policy) {
  double scale = 1.0;
  switch (policy) {
    case NormPolicy::none: return w;
    case NormPolicy::unit_rms: {
      double acc = 0.0;
      for (float v : w.data) acc += static_cast<double>(v) * v;
      if (acc == 0.0) return w;
      scale = 1.0 / std::sqrt(acc / static_cast<double>(kWindowValues));
      break;
    }
    case NormPolicy::max_abs: {
      double m = 0.0;
      for (float v : w.data) m = std::max(m, std::abs(static_cast<double>(v)));
      if (m == 0.0) return w;
      scale = 1.0 / m;
      break;
    }
  }
  IqWindow out = w;
  for (auto& v : out.data) v = static_cast<float>(static_cast<double>(v) * scale);
  return out;
}

double burst_overlap_fraction(const IqWindow& w, std::span<const TimeSpan> bursts) {
  const double a = w.start_s();
  const double b = w.end_s();
  double covered = 0.0;
  for (const auto& s : bursts) covered += std::max(0.0, std::min(b, s.end_s) - std::max(a, s.start_s));
  return covered / (b - a);
}

std::vector<LabeledWindow> label_windows(std::span<const IqWindow> windows,
                                         std::span<const TimeSpan> bursts) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    // Relative slack absorbs rounding in the seconds-domain overlap.
    const bool radar = burst_overlap_fraction(w, bursts) >= kLabelOverlapThreshold - 1e-9;
    out.push_back({w, static_cast<std::uint8_t>(radar ? 1 : 0)});
  }
  return out;
}

std::size_t Dataset::count(std::uint8_t label) const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [&](const auto& w) { return w.label == label; }));
}

namespace {

double power_db(double p) { return p > 0.0 ? 10.0 * std::log10(p) : 0.0; }

double tap_db(const scenario::ChannelTaps& h) { return 20.0 * std::log10(std::abs(h.gains.front())); }

}  // namespace

Dataset build_training_mix(const scenario::Scenario& scn, std::span<const double> radar_gains_db,
                           std::span<const double> cellular_gains_db, std::size_t per_cell,
                           std::uint64_t seed, const TrainingMixOptions& opts) {
  if (radar_gains_db.empty() || cellular_gains_db.empty()) {
    throw ConfigError("build_training_mix: gain lists must be non-empty");
  }
  if (per_cell == 0) throw ConfigError("build_training_mix: per_cell must be >= 1");
  scn.validate();

  const double fs = scn.sample_rate_hz;
  const std::size_t n = per_cell * kWindowLen;
  const double cell_duration = static_cast<double>(n) / fs;
  const auto& bs = scn.bs();
  const auto& radar = scn.radar();
  const auto& ue = *scn.ues().front();
  const double floor_db = power_db(scn.noise_power);
  const double radar_ref_db =
      tap_db(scenario::compute_taps(scn, radar, bs, opts.reference_time_s, scn.carrier_hz_radar));
  const auto cell_taps = scenario::compute_taps(scn, bs, ue, 0.0, scn.carrier_hz_cellular);

  waveforms::RadarWaveformConfig radar_cfg = opts.radar;
  radar_cfg.amplitude = 1.0;
  if (radar_cfg.burst_spans.empty()) radar_cfg.burst_spans = {{0.0, cell_duration}};
  waveforms::CellularWaveformConfig cell_cfg = opts.cellular;
  cell_cfg.amplitude = 1.0;

  std::vector<CellInfo> cells;
  for (double rg : radar_gains_db)
    for (double cg : cellular_gains_db) cells.push_back({rg, cg, true, true, 0, 0});
  for (double cg : cellular_gains_db) cells.push_back({0.0, cg, false, true, 0, 0});
  cells.push_back({0.0, 0.0, false, false, 0, 0});

  Dataset ds;
  ds.windows.reserve(cells.size() * per_cell);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    auto rng = make_rng(seed, {c, 0x63656c6cULL});
    const auto noise = waveforms::gen_awgn(scn.noise_power, n, rng(), fs);
    std::vector<waveforms::MixPart> parts{{&noise, 0.0}};
    std::vector<TimeSpan> bursts;

    IqStream radar_rx, cell_rx;
    if (cell.has_radar) {
      const double t_cell = std::uniform_real_distribution<double>(0.0, opts.trajectory_s)(rng);
      const auto taps = scenario::compute_taps(scn, radar, bs, t_cell, scn.carrier_hz_radar);
      radar_rx = scenario::apply_channel(waveforms::gen_radar_segment(radar_cfg, 0.0, n, fs, rng()), taps);
      parts.push_back({&radar_rx, cell.radar_gain_db + floor_db - radar_ref_db});
      bursts = radar_cfg.burst_spans;
    }
    if (cell.has_cellular) {
      cell_rx = scenario::apply_channel(waveforms::gen_cellular_samples(cell_cfg, n, fs, rng()), cell_taps);
      parts.push_back({&cell_rx, cell.cellular_gain_db + floor_db - tap_db(cell_taps)});
    }
    const auto mixed = waveforms::mix(parts);
    const auto windows = window_stream(mixed);
    for (auto lw : label_windows(windows, bursts)) {
      lw.window.start_sample = 0;
      cell.n_windows += 1;
      cell.n_radar += lw.label;
      ds.windows.push_back(lw);
    }
  }

  // Fisher-Yates with an explicit index draw so the order is pinned by the
  // seed alone.
  auto shuffle_rng = make_rng(seed, {0x73687566ULL});
  for (std::size_t i = ds.windows.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(shuffle_rng() % i);
    std::swap(ds.windows[i - 1], ds.windows[j]);
  }

  ds.meta.radar_gains_db.assign(radar_gains_db.begin(), radar_gains_db.end());
  ds.meta.cellular_gains_db.assign(cellular_gains_db.begin(), cellular_gains_db.end());
  ds.meta.per_cell = per_cell;
  ds.meta.seed = seed;
  ds.meta.scenario_hash = scn.hash();
  ds.meta.sample_rate_hz = fs;
  ds.meta.cells = std::move(cells);
  for (auto& w : ds.windows) w.window.sample_rate_hz = fs;

  const double n_pos = static_cast<double>(ds.count(1));
  const double frac = std::min(n_pos, static_cast<double>(ds.windows.size()) - n_pos) /
                      static_cast<double>(ds.windows.size());
  if (frac < opts.min_minority_fraction) {
    logger()->warn("training mix label balance: minority class is {:.1f}% (< {:.0f}%)", 100.0 * frac,
                   100.0 * opts.min_minority_fraction);
  }
  return ds;
}

}  // namespace coexist::framing
