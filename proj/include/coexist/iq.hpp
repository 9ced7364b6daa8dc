#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace coexist {

using Sample = std::complex<float>;

/// Complex baseband samples stamped with a sample rate and start time.
struct IqStream {
  double sample_rate_hz = 1.024e6;
  std::vector<Sample> samples;
  double t0_s = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }

  /// Throws ConfigError if the rate is not positive or a sample is NaN/Inf.
  void validate() const;

  bool operator==(const IqStream&) const = default;
};

/// Half-open time interval [start_s, end_s).
struct TimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const noexcept { return end_s - start_s; }
  bool operator==(const TimeSpan&) const = default;
};

/// Mean of |x|^2 over the stream, accumulated in double.
double mean_power(const IqStream& x);

/// Sum of |x|^2 over the stream, accumulated in double.
double energy(const IqStream& x);

}  // namespace coexist
