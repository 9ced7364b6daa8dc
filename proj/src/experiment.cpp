#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <cstdio>

#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"
#include "coexist/logging.hpp"
#include "coexist/rng.hpp"

namespace coexist::control {

TimingMode timing_mode_from_string(const std::string& s) {
  if (s == "none") return TimingMode::none;
  if (s == "wall" || s == "wall_clock") return TimingMode::wall_clock;
  throw ConfigError("unknown timing mode '" + s + "' (expected none or wall)");
}

const char* to_string(TimingMode m) { return m == TimingMode::none ? "none" : "wall"; }

void Timeline::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("timeline: duration_s must be positive");
  for (std::size_t i = 0; i < radar_bursts.size(); ++i) {
    const auto& b = radar_bursts[i];
    if (!(b.start_s >= 0.0 && b.end_s > b.start_s)) {
      throw ConfigError("timeline: burst " + std::to_string(i) + " must satisfy 0 <= start < end");
    }
    if (i > 0 && b.start_s < radar_bursts[i - 1].end_s) {
      throw ConfigError("timeline: bursts must be ordered and non-overlapping");
    }
  }
}

namespace {

constexpr std::uint64_t kTagNoise = 1, kTagCell = 2, kTagRadar = 3;
constexpr std::size_t kWin = framing::kWindowLen;

/// Everything the BS hears during one vote period.
IqStream sense_chunk(const scenario::Scenario& scn, const Timeline& tl, const ExperimentConfig& cfg,
                     std::uint64_t seed, std::size_t chunk, std::uint64_t first_sample, std::size_t n,
                     bool bs_transmitting) {
  const double fs = scn.sample_rate_hz;
  const double t0 = static_cast<double>(first_sample) / fs;
  const double t1 = static_cast<double>(first_sample + n) / fs;

  auto noise = waveforms::gen_awgn(scn.noise_power, n, derive_seed(seed, {kTagNoise, chunk}), fs);
  noise.t0_s = t0;
  std::vector<waveforms::MixPart> parts{{&noise, 0.0}};

  IqStream downlink;
  if (bs_transmitting) {
    auto cell = cfg.cellular;
    cell.amplitude = 1.0;
    downlink = waveforms::gen_cellular_samples(cell, n, fs, derive_seed(seed, {kTagCell, chunk}));
    downlink.t0_s = t0;
    parts.push_back({&downlink, cfg.cellular_tx_gain_db + cfg.self_coupling_db});
  }

  // One extra window in front supplies the channel's delay history.
  const double lead_s = static_cast<double>(kWin) / fs;
  const bool radar_on = std::any_of(tl.radar_bursts.begin(), tl.radar_bursts.end(), [&](const TimeSpan& b) {
    return b.start_s < t1 && b.end_s > t0 - lead_s;
  });
  IqStream radar_rx;
  if (radar_on) {
    auto rcfg = cfg.radar;
    rcfg.amplitude = 1.0;
    rcfg.burst_spans = tl.radar_bursts;
    const auto tx = waveforms::gen_radar_segment(rcfg, t0 - lead_s, n + kWin, fs, derive_seed(seed, {kTagRadar}));
    std::vector<scenario::ChannelTaps> taps;
    const std::size_t blocks = n / kWin + 1;
    for (std::size_t b = 0; b < blocks; ++b) {
      const double tb = std::max(0.0, t0 + (static_cast<double>(b) - 1.0) * lead_s);
      taps.push_back(scenario::compute_taps(scn, scn.radar(), scn.bs(), tb, scn.carrier_hz_radar));
      if (static_cast<std::size_t>(taps.back().delays_samples.back()) >= kWin) {
        throw GeometryError("radar link delay exceeds one window; ship is out of range");
      }
    }
    const auto rx = scenario::apply_channel_blockwise(tx, taps, kWin);
    radar_rx.sample_rate_hz = fs;
    radar_rx.t0_s = t0;
    radar_rx.samples.assign(rx.samples.begin() + static_cast<std::ptrdiff_t>(kWin), rx.samples.end());
    parts.push_back({&radar_rx, cfg.radar_tx_gain_db});
  }
  auto mixed = waveforms::mix(parts);
  mixed.t0_s = t0;
  return mixed;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string fmt_ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

ExperimentReport run_experiment(const scenario::Scenario& scn, const Timeline& timeline,
                                const detect::Detector& detector, const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  scn.validate();
  timeline.validate();
  auto vote_cfg = cfg.vote;
  vote_cfg.sample_rate_hz = scn.sample_rate_hz;
  vote_cfg.window_len = kWin;
  vote_cfg.validate();
  if (vote_cfg.batch_size > detector.max_batch()) {
    throw ConfigError("batch_size " + std::to_string(vote_cfg.batch_size) + " exceeds detector limit " +
                      std::to_string(detector.max_batch()));
  }

  const double fs = scn.sample_rate_hz;
  const std::size_t vote_samples = vote_cfg.vote_size * kWin;
  const auto total = static_cast<std::uint64_t>(std::floor(timeline.duration_s * fs + 1e-6));
  const std::size_t n_votes = static_cast<std::size_t>(total / vote_samples);
  if (n_votes == 0) throw ConfigError("timeline shorter than one vote period");

  auto report = std::make_shared<ExperimentReport>();
  auto& r = *report;
  r.summary.seed = seed;
  r.summary.detector_id = detector.id();
  r.summary.timing = to_string(cfg.timing);
  r.summary.duration_s = static_cast<double>(n_votes * vote_samples) / fs;
  r.spectrogram.nfft = cfg.spectrogram_nfft;
  r.spectrogram.hop = vote_samples;

  ControllerState ctl;
  std::vector<UeSession> sessions;
  for (const auto* ue : scn.ues()) sessions.push_back({ue->id, UeState::connected, 0.0});
  r.bs_trace.push_back({0.0, BsMode::transmitting});
  for (const auto& u : ue_throughput(ctl.bs, sessions, 0.0, cfg.aggregate_mbps)) {
    r.throughput_trace.push_back({0.0, u.ue_id, u.mbps});
  }

  std::vector<std::uint64_t> onsets;
  for (const auto& b : timeline.radar_bursts) onsets.push_back(static_cast<std::uint64_t>(std::ceil(b.start_s * fs)));
  std::vector<bool> detected(onsets.size(), false), cleared(onsets.size(), false);

  decision::VoteAccumulator acc(vote_cfg);
  std::size_t correct_windows = 0, total_windows = 0, correct_votes = 0;

  try {
    for (std::size_t k = 0; k < n_votes; ++k) {
      const std::uint64_t first = static_cast<std::uint64_t>(k) * vote_samples;
      const auto sensed = sense_chunk(scn, timeline, cfg, seed, k, first, vote_samples,
                                      ctl.bs.mode == BsMode::transmitting);
      const auto windows = framing::window_stream(sensed);
      const auto truth = framing::label_windows(windows, timeline.radar_bursts);

      std::optional<decision::VoteDecision> dec;
      std::size_t truth_radar = 0;
      for (std::size_t i = 0; i < windows.size(); i += vote_cfg.batch_size) {
        const auto started = std::chrono::steady_clock::now();
        const std::span<const framing::IqWindow> batch(windows.data() + i, vote_cfg.batch_size);
        const auto verdicts = detect::classify_batch(detector, batch);
        const double ms = cfg.timing == TimingMode::wall_clock ? elapsed_ms(started) : 0.0;
        for (std::size_t j = 0; j < verdicts.size(); ++j) {
          correct_windows += verdicts[j].label == truth[i + j].label ? 1 : 0;
          truth_radar += truth[i + j].label;
        }
        total_windows += verdicts.size();
        if (auto d = acc.accumulate(verdicts, ms)) dec = d;
      }
      if (!dec) throw Error("internal: vote period produced no decision");
      const auto& d = *dec;
      r.decisions.push_back(d);
      correct_votes += d.radar_present == (truth_radar * 2 >= vote_cfg.vote_size) ? 1 : 0;
      const double t = d.timestamp_s();

      for (std::size_t b = 0; b < onsets.size(); ++b) {
        if (!detected[b] && d.radar_present && onsets[b] < d.last_end_sample) {
          detected[b] = true;
          const double lat = decision::latency(d, onsets[b], fs);
          r.summary.detection_latencies_ms.push_back(lat);
          r.events.push_back({t, "radar_detected", "burst=" + std::to_string(b) + ";latency_ms=" + fmt_ms(lat)});
        }
        if (detected[b] && !cleared[b] && !d.radar_present &&
            d.first_start_sample >= static_cast<std::uint64_t>(std::ceil(timeline.radar_bursts[b].end_s * fs))) {
          cleared[b] = true;
          r.events.push_back({t, "radar_cleared", "burst=" + std::to_string(b)});
        }
      }

      const auto step = step_controller(ctl, d, cfg.controller);
      ctl = step.state;
      for (auto c : step.commands) {
        r.events.push_back({t, to_string(c), "radar_count=" + std::to_string(d.radar_count)});
        r.bs_trace.push_back({t, ctl.bs.mode});
        if (c == Command::turn_on) {
          start_reconnects(sessions, t, cfg.controller);
          ++r.summary.n_turn_ons;
        } else {
          ++r.summary.n_shutdowns;
        }
      }
      for (auto& s : sessions) {
        if (s.state == UeState::reconnecting && s.reconnect_done_s <= t) {
          s.state = UeState::connected;
          r.events.push_back({t, "reconnected", "ue=" + s.ue_id});
        }
      }
      for (const auto& u : ue_throughput(ctl.bs, sessions, t, cfg.aggregate_mbps)) {
        r.throughput_trace.push_back({t, u.ue_id, u.mbps});
      }

      if (cfg.spectrogram_nfft > 0) {
        IqStream head = sensed;
        head.samples.resize(std::min(head.samples.size(), cfg.spectrogram_nfft));
        auto frame = spectrogram(head, cfg.spectrogram_nfft, cfg.spectrogram_nfft);
        r.spectrogram.frames.push_back(std::move(frame.frames.front()));
      }
    }
  } catch (const ExperimentError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentError(std::string("experiment aborted: ") + e.what(), report);
  }

  auto& s = r.summary;
  s.n_decisions = r.decisions.size();
  s.n_radar_decisions = static_cast<std::size_t>(
      std::count_if(r.decisions.begin(), r.decisions.end(), [](const auto& d) { return d.radar_present; }));
  for (std::size_t i = 0; i < r.bs_trace.size(); ++i) {
    if (r.bs_trace[i].second != BsMode::vacated) continue;
    const double end = i + 1 < r.bs_trace.size() ? r.bs_trace[i + 1].first : s.duration_s;
    s.vacated_duration_s += std::min(end, s.duration_s) - r.bs_trace[i].first;
  }
  if (!s.detection_latencies_ms.empty()) {
    s.mean_latency_ms = std::accumulate(s.detection_latencies_ms.begin(), s.detection_latencies_ms.end(), 0.0) /
                        static_cast<double>(s.detection_latencies_ms.size());
  }
  s.window_accuracy = static_cast<double>(correct_windows) / static_cast<double>(total_windows);
  s.vote_accuracy = static_cast<double>(correct_votes) / static_cast<double>(n_votes);
  return r;
}

double calibrate_sensing_threshold(const scenario::Scenario& scn, const ExperimentConfig& cfg,
                                   std::size_t n_windows, double target_pfa, std::uint64_t seed) {
  const Timeline quiet{static_cast<double>(n_windows * kWin) / scn.sample_rate_hz, {}};
  const auto sensed = sense_chunk(scn, quiet, cfg, seed ^ 0x63616c6962ULL, 0, 0, n_windows * kWin, true);
  const auto windows = framing::window_stream(sensed);
  return detect::calibrate_energy_threshold(windows, target_pfa);
}

LatencyStats latency_study(const scenario::Scenario& scn, const DetectorFactory& make_detector,
                           const ExperimentConfig& cfg, std::size_t runs, std::uint64_t seed) {
  const double vote_s = static_cast<double>(cfg.vote.vote_size * kWin) / scn.sample_rate_hz;
  LatencyStats st;
  auto rng = make_rng(seed, {0x6c6174ULL});
  std::uniform_real_distribution<double> jitter(0.0, vote_s);
  for (std::size_t i = 0; i < runs; ++i) {
    const double onset = 5.0 * vote_s + jitter(rng);
    const Timeline tl{onset + 5.0 * vote_s, {{onset, onset + 5.0 * vote_s}}};
    const auto det = make_detector(tl);
    const auto rep = run_experiment(scn, tl, *det, cfg, derive_seed(seed, {i}));
    if (rep.summary.detection_latencies_ms.empty()) {
      ++st.missed;
    } else {
      st.latencies_ms.push_back(rep.summary.detection_latencies_ms.front());
    }
  }
  if (!st.latencies_ms.empty()) {
    const double n = static_cast<double>(st.latencies_ms.size());
    st.mean_ms = std::accumulate(st.latencies_ms.begin(), st.latencies_ms.end(), 0.0) / n;
    double var = 0.0;
    for (double v : st.latencies_ms) var += (v - st.mean_ms) * (v - st.mean_ms);
    st.stddev_ms = st.latencies_ms.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  }
  return st;
}

}  // namespace coexist::control
