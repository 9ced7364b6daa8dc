#include "coexist/decision.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "coexist/errors.hpp"
#include "coexist/text_format.hpp"

namespace coexist::decision {

void VoteConfig::validate() const {
  if (vote_size < 1) throw ConfigError("vote_size must be >= 1");
  if (batch_size < 1 || vote_size % batch_size != 0) {
    throw ConfigError("batch_size (" + std::to_string(batch_size) + ") must divide vote_size (" +
                      std::to_string(vote_size) + ")");
  }
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be positive");
  if (window_len < 1) throw ConfigError("window_len must be >= 1");
}

VoteDecision majority(std::span<const detect::DetectorVerdict> verdicts, const VoteConfig& cfg,
                      double compute_time_ms) {
  cfg.validate();
  if (verdicts.size() != cfg.vote_size) {
    throw UsageError("majority: got " + std::to_string(verdicts.size()) + " verdicts, vote_size is " +
                     std::to_string(cfg.vote_size));
  }
  VoteDecision d;
  std::uint64_t first = verdicts.front().window_start_sample;
  std::uint64_t last = first;
  for (const auto& v : verdicts) {
    d.radar_count += v.label;
    first = std::min(first, v.window_start_sample);
    last = std::max(last, v.window_start_sample);
  }
  d.radar_present = d.radar_count * 2 >= cfg.vote_size;
  d.first_start_sample = first;
  d.last_end_sample = last + cfg.window_len;
  d.signal_time_ms = static_cast<double>(d.last_end_sample - d.first_start_sample) / cfg.sample_rate_hz * 1000.0;
  d.compute_time_ms = compute_time_ms;
  d.latency_ms = d.signal_time_ms + compute_time_ms;
  d.timestamp_ms = static_cast<double>(d.last_end_sample) / cfg.sample_rate_hz * 1000.0 + compute_time_ms;
  return d;
}

VoteAccumulator::VoteAccumulator(VoteConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  buffer_.reserve(cfg_.vote_size);
}

std::optional<VoteDecision> VoteAccumulator::accumulate(std::span<const detect::DetectorVerdict> batch,
                                                        double compute_time_ms) {
  if (batch.size() != cfg_.batch_size) {
    throw UsageError("accumulate: batch of " + std::to_string(batch.size()) + ", configured batch_size is " +
                     std::to_string(cfg_.batch_size));
  }
  buffer_.insert(buffer_.end(), batch.begin(), batch.end());
  compute_ms_ += compute_time_ms;
  if (buffer_.size() < cfg_.vote_size) return std::nullopt;
  auto d = majority(buffer_, cfg_, compute_ms_);
  buffer_.clear();
  compute_ms_ = 0.0;
  return d;
}

double latency(const VoteDecision& d, std::uint64_t radar_onset_sample, double sample_rate_hz) {
  if (!d.radar_present) throw UsageError("latency: decision does not declare radar");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("latency: sample_rate_hz must be positive");
  if (radar_onset_sample >= d.last_end_sample) {
    throw AccountingError("latency: radar onset (sample " + std::to_string(radar_onset_sample) +
                          ") is after the vote span ending at sample " + std::to_string(d.last_end_sample));
  }
  return static_cast<double>(d.last_end_sample - radar_onset_sample) / sample_rate_hz * 1000.0 + d.compute_time_ms;
}

std::string decision_log_header() {
  return "timestamp_ms,radar_count,radar_present,latency_ms,first_start_sample,last_end_sample,signal_time_ms,"
         "compute_time_ms";
}

std::string decision_log_line(const VoteDecision& d) {
  using text::fmt;
  return fmt(d.timestamp_ms) + "," + fmt(std::uint64_t{d.radar_count}) + "," + (d.radar_present ? "1" : "0") + "," +
         fmt(d.latency_ms) + "," + fmt(d.first_start_sample) + "," + fmt(d.last_end_sample) + "," +
         fmt(d.signal_time_ms) + "," + fmt(d.compute_time_ms);
}

void write_decision_log(const std::string& path, std::span<const VoteDecision> decisions) {
  std::string out = decision_log_header() + "\n";
  for (const auto& d : decisions) out += decision_log_line(d) + "\n";
  detail::write_file(path, out);
}

std::vector<VoteDecision> read_decision_log(const std::string& path) {
  const std::string data = detail::read_file(path);
  const auto rows = text::lines(data);
  if (rows.empty() || rows.front() != decision_log_header()) {
    throw FormatError("decision log " + path + ": missing or wrong header", 0);
  }
  std::vector<VoteDecision> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = text::split(rows[i]);
    const std::string where = "decision log " + path + " line " + std::to_string(i + 1);
    if (f.size() != 8) throw ConfigError(where + ": expected 8 fields");
    VoteDecision d;
    d.timestamp_ms = text::parse_double(f[0], where);
    d.radar_count = text::parse_u64(f[1], where);
    d.radar_present = text::parse_u64(f[2], where) != 0;
    d.latency_ms = text::parse_double(f[3], where);
    d.first_start_sample = text::parse_u64(f[4], where);
    d.last_end_sample = text::parse_u64(f[5], where);
    d.signal_time_ms = text::parse_double(f[6], where);
    d.compute_time_ms = text::parse_double(f[7], where);
    out.push_back(d);
  }
  return out;
}

}  // namespace coexist::decision
