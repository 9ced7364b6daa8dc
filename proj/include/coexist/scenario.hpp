#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coexist/iq.hpp"

namespace coexist::scenario {

/// Local east/north/up coordinates in meters.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const;
  bool operator==(const Vec3&) const = default;
};

enum class NodeKind { bs, ue, radar };

const char* to_string(NodeKind k);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::ue;
  Vec3 position0;
  Vec3 velocity;

  bool operator==(const Node&) const = default;
};

/// 20 knots.
inline constexpr double kDefaultShipSpeedMps = 10.289;
inline constexpr double kSpeedOfLight = 299792458.0;

struct Scenario {
  std::string name = "waikiki_beach";
  std::vector<Node> nodes;
  double carrier_hz_cellular = 980e6;
  double carrier_hz_radar = 980e6;
  double sample_rate_hz = 1.024e6;
  double noise_power = 1e-9;
  double pathloss_exponent = 2.0;
  double ship_speed_mps = kDefaultShipSpeedMps;

  /// Throws ValidationError naming the first offending field.
  void validate() const;

  const Node& bs() const;
  const Node& radar() const;
  std::vector<const Node*> ues() const;
  const Node& node(const std::string& id) const;

  /// Hex digest of the canonical serialization (stable across runs).
  std::string hash() const;

  bool operator==(const Scenario&) const = default;
};

/// Built-in Waikiki-Beach-style geometry: BS at (0, 0, 3), six UEs on a
/// 100 m ring at z = 1, ship radar starting at (500, 1000, 3) heading south
/// at 20 knots.
Scenario default_scenario();

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& yaml_text, const std::string& source = "<string>");
std::string to_yaml(const Scenario& scn);

Vec3 position_at(const Node& node, double t_s);

struct ChannelTaps {
  std::vector<std::int64_t> delays_samples;
  std::vector<std::complex<double>> gains;

  void validate() const;
  bool operator==(const ChannelTaps&) const = default;
};

/// Free-space path loss at 1 m, 20 log10(4 pi f / c), in dB.
double fspl_1m_db(double carrier_hz);

/// Log-distance path loss in dB at distance `d_m`.
double pathloss_db(double d_m, double carrier_hz, double exponent);

/// Single line-of-sight tap between `tx` and `rx` at time `t_s`.
ChannelTaps compute_taps(const Scenario& scn, const Node& tx, const Node& rx, double t_s,
                         double carrier_hz);

/// y[k] = sum_i gains[i] x[k - delays[i]]; output length equals input length.
IqStream apply_channel(const IqStream& x, const ChannelTaps& h);

/// Time-varying variant: block b (samples [b*block_len, (b+1)*block_len))
/// is produced with taps[b]. Inputs before the block are taken from the
/// whole stream, so delayed energy carries across block boundaries.
IqStream apply_channel_blockwise(const IqStream& x, std::span<const ChannelTaps> taps,
                                 std::size_t block_len);

}  // namespace coexist::scenario
