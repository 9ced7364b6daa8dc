#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coexist/detector.hpp"

namespace coexist::decision {

enum class TieRule { radar_wins };

struct VoteConfig {
  std::size_t vote_size = 100;
  std::size_t batch_size = 10;
  TieRule tie_rule = TieRule::radar_wins;
  double sample_rate_hz = 1.024e6;
  std::size_t window_len = 1024;

  void validate() const;
};

struct VoteDecision {
  bool radar_present = false;
  std::size_t radar_count = 0;
  std::uint64_t first_start_sample = 0;
  std::uint64_t last_end_sample = 0;
  double signal_time_ms = 0.0;   // acquisition span of the vote
  double compute_time_ms = 0.0;  // detector + vote processing
  double latency_ms = 0.0;       // signal_time_ms + compute_time_ms
  /// Signal time at which the decision is available: end of the span plus
  /// compute time.
  double timestamp_ms = 0.0;

  double timestamp_s() const noexcept { return timestamp_ms / 1000.0; }

  bool operator==(const VoteDecision&) const = default;
};

/// Majority over exactly vote_size verdicts; ties declare radar.
VoteDecision majority(std::span<const detect::DetectorVerdict> verdicts, const VoteConfig& cfg,
                      double compute_time_ms = 0.0);

/// Tumbling vote over a verdict stream fed in fixed-size batches. Single
/// owner; not thread safe.
class VoteAccumulator {
 public:
  explicit VoteAccumulator(VoteConfig cfg);

  /// Buffers one batch; returns a decision after every vote_size verdicts.
  std::optional<VoteDecision> accumulate(std::span<const detect::DetectorVerdict> batch,
                                         double compute_time_ms = 0.0);

  std::size_t pending() const noexcept { return buffer_.size(); }
  const VoteConfig& config() const noexcept { return cfg_; }

 private:
  VoteConfig cfg_;
  std::vector<detect::DetectorVerdict> buffer_;
  double compute_ms_ = 0.0;
};

/// (last_end_sample - onset) / fs * 1000 + compute_time_ms.
double latency(const VoteDecision& d, std::uint64_t radar_onset_sample, double sample_rate_hz);

/// Decision log CSV: timestamp_ms,radar_count,radar_present,latency_ms,
/// first_start_sample,last_end_sample,signal_time_ms,compute_time_ms.
std::string decision_log_header();
std::string decision_log_line(const VoteDecision& d);
void write_decision_log(const std::string& path, std::span<const VoteDecision> decisions);
std::vector<VoteDecision> read_decision_log(const std::string& path);

}  // namespace coexist::decision
