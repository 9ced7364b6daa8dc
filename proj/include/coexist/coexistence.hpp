#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coexist/decision.hpp"
#include "coexist/detector.hpp"
#include "coexist/errors.hpp"
#include "coexist/scenario.hpp"
#include "coexist/waveforms.hpp"

namespace coexist::control {

enum class BsMode { transmitting, vacated };
const char* to_string(BsMode m);
BsMode bs_mode_from_string(const std::string& s);

struct BsState {
  BsMode mode = BsMode::transmitting;
  double since_s = 0.0;

  bool operator==(const BsState&) const = default;
};

struct ControllerConfig {
  /// Consecutive radar-free decisions needed to resume.
  std::size_t hold_count = 1;
  double reconnect_delay_s = 2.0;
};

struct ControllerState {
  BsState bs;
  std::size_t clean_streak = 0;
  double last_decision_ms = -1.0;
};

enum class Command { shutdown, turn_on };
const char* to_string(Command c);

struct StepResult {
  ControllerState state;
  std::vector<Command> commands;
};

/// Vacates on a radar decision; resumes after hold_count consecutive clean
/// decisions. Throws SequencingError on out-of-order decisions.
StepResult step_controller(const ControllerState& state, const decision::VoteDecision& d,
                           const ControllerConfig& cfg);

enum class UeState { connected, reconnecting };

struct UeSession {
  std::string ue_id;
  UeState state = UeState::connected;
  double reconnect_done_s = 0.0;
};

/// Puts every session into reconnecting until t_s + delay.
void start_reconnects(std::vector<UeSession>& sessions, double t_s, const ControllerConfig& cfg);

struct UeRate {
  std::string ue_id;
  double mbps;
};

/// Vacated: all zero. Transmitting: aggregate split equally among UEs that
/// are connected at t_s (reconnecting ones get 0 until reconnect_done_s).
std::vector<UeRate> ue_throughput(const BsState& bs, const std::vector<UeSession>& sessions, double t_s,
                                  double aggregate_mbps);

struct SpectrogramFrame {
  double t_s = 0.0;
  std::vector<double> magnitude_db;  // bins from -fs/2 to +fs/2

  bool operator==(const SpectrogramFrame&) const = default;
};

struct SpectrogramFrames {
  std::size_t nfft = 1024;
  std::size_t hop = 512;
  std::vector<SpectrogramFrame> frames;

  bool operator==(const SpectrogramFrames&) const = default;
};

inline constexpr double kSpectrogramFloor = 1e-12;

/// Periodic-Hann STFT magnitude in dB, 20 log10(|X| + 1e-12), fftshifted.
/// Frame i starts at sample i*hop; its time is t0 + i*hop/fs.
SpectrogramFrames spectrogram(const IqStream& x, std::size_t nfft = 1024, std::size_t hop = 512);

std::vector<double> hann_window(std::size_t n);

struct Timeline {
  double duration_s = 120.0;
  std::vector<TimeSpan> radar_bursts{{50.0, 90.0}};

  void validate() const;
};

enum class TimingMode {
  none,        // compute_time_ms = 0; reports are bit-reproducible
  wall_clock,  // measured detector + vote time
};

TimingMode timing_mode_from_string(const std::string& s);
const char* to_string(TimingMode m);

struct ExperimentConfig {
  decision::VoteConfig vote;
  ControllerConfig controller;
  double aggregate_mbps = 12.0;
  /// BS transmit level on the unit-RMS OFDM waveform.
  double cellular_tx_gain_db = 0.0;
  /// Leakage of the BS's own downlink into its sensing port.
  double self_coupling_db = -20.0;
  /// Radar transmit level on the unit-peak chirp, before path loss.
  double radar_tx_gain_db = 90.0;
  waveforms::RadarWaveformConfig radar;
  waveforms::CellularWaveformConfig cellular;
  TimingMode timing = TimingMode::none;
  std::size_t spectrogram_nfft = 256;
};

struct ThroughputSample {
  double t_s = 0.0;
  std::string ue_id;
  double mbps = 0.0;

  bool operator==(const ThroughputSample&) const = default;
};

struct Event {
  double t_s = 0.0;
  std::string kind;  // shutdown, turn_on, radar_detected, radar_cleared, reconnected
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct ExperimentSummary {
  std::uint64_t seed = 0;
  std::string detector_id;
  std::string timing;
  double duration_s = 0.0;
  std::size_t n_decisions = 0;
  std::size_t n_radar_decisions = 0;
  std::size_t n_shutdowns = 0;
  std::size_t n_turn_ons = 0;
  double vacated_duration_s = 0.0;
  std::vector<double> detection_latencies_ms;
  std::optional<double> mean_latency_ms;
  std::optional<double> window_accuracy;
  std::optional<double> vote_accuracy;

  bool operator==(const ExperimentSummary&) const = default;
};

struct ExperimentReport {
  std::vector<std::pair<double, BsMode>> bs_trace;
  std::vector<ThroughputSample> throughput_trace;
  std::vector<decision::VoteDecision> decisions;
  std::vector<Event> events;
  SpectrogramFrames spectrogram;
  ExperimentSummary summary;

  bool operator==(const ExperimentReport&) const = default;
};

/// Thrown when a run aborts; carries everything recorded up to the failure.
class ExperimentError : public Error {
 public:
  ExperimentError(const std::string& what, std::shared_ptr<ExperimentReport> partial)
      : Error(what), partial_(std::move(partial)) {}
  const ExperimentReport& partial() const { return *partial_; }

 private:
  std::shared_ptr<ExperimentReport> partial_;
};

/// Simulates the timeline in vote-sized steps: sensed IQ at the BS (own
/// downlink through self-coupling while transmitting, radar through the
/// moving-ship channel during bursts, noise always) -> detector -> votes ->
/// controller.
ExperimentReport run_experiment(const scenario::Scenario& scn, const Timeline& timeline,
                                const detect::Detector& detector, const ExperimentConfig& cfg,
                                std::uint64_t seed);

/// Energy threshold calibrated on radar-free sensed windows with the BS
/// transmitting (noise plus self-coupled downlink).
double calibrate_sensing_threshold(const scenario::Scenario& scn, const ExperimentConfig& cfg,
                                   std::size_t n_windows, double target_pfa, std::uint64_t seed);

struct LatencyStats {
  std::vector<double> latencies_ms;
  std::size_t missed = 0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
};

using DetectorFactory = std::function<std::unique_ptr<detect::Detector>(const Timeline&)>;

/// Repeats a short experiment `runs` times with the radar onset drawn
/// uniformly inside one vote period and reports the detection latency.
LatencyStats latency_study(const scenario::Scenario& scn, const DetectorFactory& make_detector,
                           const ExperimentConfig& cfg, std::size_t runs, std::uint64_t seed);

/// Writes bs_trace.csv, throughput.csv, decisions.csv, events.csv,
/// spectrogram.csv and summary.json into `dir` (created if missing).
std::vector<std::string> export_report(const ExperimentReport& report, const std::string& dir);
ExperimentReport read_report(const std::string& dir);

}  // namespace coexist::control
