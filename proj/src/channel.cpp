#include <cmath>
#include <numbers>
#include <string>

#include "coexist/errors.hpp"
#include "coexist/scenario.hpp"

namespace coexist::scenario {

void ChannelTaps::validate() const {
  if (delays_samples.empty()) throw ConfigError("channel taps: at least one tap required");
  if (delays_samples.size() != gains.size()) {
    throw ConfigError("channel taps: delays and gains differ in length");
  }
  for (std::size_t i = 0; i < delays_samples.size(); ++i) {
    if (delays_samples[i] < 0) throw ConfigError("channel taps: negative delay");
    if (i > 0 && delays_samples[i] <= delays_samples[i - 1]) {
      throw ConfigError("channel taps: delays must be strictly increasing");
    }
  }
}

double fspl_1m_db(double carrier_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * carrier_hz / kSpeedOfLight);
}

double pathloss_db(double d_m, double carrier_hz, double exponent) {
  return fspl_1m_db(carrier_hz) + 10.0 * exponent * std::log10(d_m);
}

ChannelTaps compute_taps(const Scenario& scn, const Node& tx, const Node& rx, double t_s,
                         double carrier_hz) {
  if (t_s < 0.0) throw UsageError("compute_taps: t_s must be >= 0");
  const double d = (position_at(tx, t_s) - position_at(rx, t_s)).norm();
  if (!(d > 0.0)) {
    throw GeometryError("compute_taps: nodes '" + tx.id + "' and '" + rx.id +
                        "' coincide at t = " + std::to_string(t_s) + " s");
  }
  const double pl = pathloss_db(d, carrier_hz, scn.pathloss_exponent);
  const double mag = std::pow(10.0, -pl / 20.0);
  const double phase = -2.0 * std::numbers::pi * carrier_hz * d / kSpeedOfLight;
  ChannelTaps h;
  h.delays_samples.push_back(std::llround(d / kSpeedOfLight * scn.sample_rate_hz));
  h.gains.push_back(std::polar(mag, phase));
  return h;
}

namespace {

void apply_range(const IqStream& x, const ChannelTaps& h, std::size_t begin, std::size_t end,
                 IqStream& y) {
  for (std::size_t k = begin; k < end; ++k) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < h.gains.size(); ++i) {
      const auto d = static_cast<std::size_t>(h.delays_samples[i]);
      if (d > k) continue;
      const auto& s = x.samples[k - d];
      acc += h.gains[i] * std::complex<double>(s.real(), s.imag());
    }
    y.samples[k] = Sample(static_cast<float>(acc.real()), static_cast<float>(acc.imag()));
  }
}

}  // namespace

IqStream apply_channel(const IqStream& x, const ChannelTaps& h) {
  h.validate();
  IqStream y;
  y.sample_rate_hz = x.sample_rate_hz;
  y.t0_s = x.t0_s;
  y.samples.resize(x.size());
  apply_range(x, h, 0, x.size(), y);
  return y;
}

IqStream apply_channel_blockwise(const IqStream& x, std::span<const ChannelTaps> taps,
                                 std::size_t block_len) {
  if (block_len == 0) throw UsageError("apply_channel_blockwise: block_len must be >= 1");
  const std::size_t n_blocks = (x.size() + block_len - 1) / block_len;
  if (taps.size() < n_blocks) {
    throw UsageError("apply_channel_blockwise: need " + std::to_string(n_blocks) + " tap sets, got " +
                     std::to_string(taps.size()));
  }
  IqStream y;
  y.sample_rate_hz = x.sample_rate_hz;
  y.t0_s = x.t0_s;
  y.samples.resize(x.size());
  for (std::size_t b = 0; b < n_blocks; ++b) {
    taps[b].validate();
    apply_range(x, taps[b], b * block_len, std::min(x.size(), (b + 1) * block_len), y);
  }
  return y;
}

}  // namespace coexist::scenario
