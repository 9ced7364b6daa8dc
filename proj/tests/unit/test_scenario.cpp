#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "coexist/errors.hpp"
#include "coexist/scenario.hpp"
#include "oracles.hpp"

using namespace coexist;
using namespace coexist::scenario;

namespace {

const std::string kShipped = std::string(COEXIST_DATA_DIR) + "/scenarios/waikiki.yaml";

std::string minimal_yaml(const std::string& nodes) {
  return "name: t\nnoise_power: 1.0e-9\nnodes:\n" + nodes;
}

const std::string kBs = "  - {id: bs, kind: bs, position: [0, 0, 3]}\n";
const std::string kUe = "  - {id: u, kind: ue, position: [10, 0, 1]}\n";
const std::string kShip = "  - {id: s, kind: radar, position: [0, 500, 3], velocity: [0, -10.289, 0]}\n";

}  // namespace

TEST_CASE("shipped scenario: node counts and antenna heights") {
  const auto scn = load_scenario(kShipped);
  CHECK(scn.bs().position0.z == 3.0);
  CHECK(scn.radar().position0.z == 3.0);
  const auto ues = scn.ues();
  CHECK(ues.size() == 6);
  for (const auto* u : ues) {
    CHECK(u->position0.z == 1.0);
    CHECK(u->velocity == Vec3{});
  }
  // 20 knots in m/s, heading south.
  CHECK(scn.radar().velocity.y == doctest::Approx(-20.0 * 1852.0 / 3600.0).epsilon(1e-4));
  CHECK(scn == default_scenario());
}

TEST_CASE("scenario YAML round trip and stable hash") {
  const auto scn = default_scenario();
  const auto again = parse_scenario(to_yaml(scn));
  CHECK(again == scn);
  CHECK(again.hash() == scn.hash());
  CHECK(scn.hash().size() == 64);
  auto moved = scn;
  moved.nodes[1].position0.x += 1.0;
  CHECK(moved.hash() != scn.hash());
}

TEST_CASE("scenario validation errors") {
  SUBCASE("duplicate id names the id") {
    const auto y = minimal_yaml(kBs + kUe + "  - {id: u, kind: ue, position: [20, 0, 1]}\n" + kShip);
    try {
      parse_scenario(y);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("'u'") != std::string::npos);
    }
  }
  SUBCASE("zero UEs") { CHECK_THROWS_AS(parse_scenario(minimal_yaml(kBs + kShip)), ValidationError); }
  SUBCASE("two base stations") {
    CHECK_THROWS_AS(parse_scenario(minimal_yaml(kBs + "  - {id: bs2, kind: bs, position: [1, 1, 3]}\n" + kUe + kShip)),
                    ValidationError);
  }
  SUBCASE("no radar") { CHECK_THROWS_AS(parse_scenario(minimal_yaml(kBs + kUe)), ValidationError); }
  SUBCASE("underground node") {
    CHECK_THROWS_AS(parse_scenario(minimal_yaml(kBs + "  - {id: u, kind: ue, position: [10, 0, 0]}\n" + kShip)),
                    ValidationError);
  }
  SUBCASE("moving UE") {
    CHECK_THROWS_AS(
        parse_scenario(minimal_yaml(kBs + "  - {id: u, kind: ue, position: [10, 0, 1], velocity: [1, 0, 0]}\n" + kShip)),
        ValidationError);
  }
  SUBCASE("unknown kind") {
    CHECK_THROWS_AS(parse_scenario(minimal_yaml(kBs + kUe + kShip + "  - {id: x, kind: tower, position: [1, 1, 1]}\n")),
                    ConfigError);
  }
  SUBCASE("malformed YAML") { CHECK_THROWS_AS(parse_scenario("nodes: [unclosed"), ConfigError); }
  SUBCASE("missing file names the path") {
    try {
      load_scenario("/nonexistent/dir/scn.yaml");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/dir/scn.yaml") != std::string::npos);
    }
  }
}

TEST_CASE("position_at") {
  const auto scn = default_scenario();
  for (const auto& n : scn.nodes) CHECK(position_at(n, 0.0) == n.position0);
  CHECK(position_at(*scn.ues().front(), 37.0) == scn.ues().front()->position0);
  Node ship{"s", NodeKind::radar, {0, 0, 3}, {0, -10, 0}};
  const auto p = position_at(ship, 10.0);
  CHECK(p.x == 0.0);
  CHECK(p.y == doctest::Approx(-100.0));
  CHECK(p.z == 3.0);
}

TEST_CASE("path loss closed form") {
  const double c = 299792458.0;
  const double f = 980e6;
  const double fspl = 20.0 * std::log10(4.0 * std::numbers::pi * 1.0 * f / c);
  CHECK(pathloss_db(1.0, f, 2.0) == doctest::Approx(fspl).epsilon(1e-12));
  CHECK(std::abs(pathloss_db(1.0, f, 2.0) - 32.27) <= 0.01);
  CHECK(pathloss_db(200.0, f, 2.0) - pathloss_db(100.0, f, 2.0) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(pathloss_db(50.0, f, 3.0) == doctest::Approx(fspl + 30.0 * std::log10(50.0)));
}

TEST_CASE("compute_taps: magnitude, delay and phase") {
  auto scn = default_scenario();
  const Node a{"a", NodeKind::bs, {0, 0, 3}, {}};
  const Node b{"b", NodeKind::ue, {300, 0, 3}, {}};
  const auto h = compute_taps(scn, a, b, 0.0, 980e6);
  REQUIRE(h.delays_samples.size() == 1);
  CHECK(h.delays_samples[0] == std::llround(300.0 / 299792458.0 * 1.024e6));
  CHECK(h.delays_samples[0] == 1);
  CHECK(20.0 * std::log10(std::abs(h.gains[0])) == doctest::Approx(-pathloss_db(300.0, 980e6, 2.0)));
  const double ph = -2.0 * std::numbers::pi * 980e6 * 300.0 / 299792458.0;
  CHECK(std::arg(h.gains[0]) == doctest::Approx(std::remainder(ph, 2.0 * std::numbers::pi)).epsilon(1e-9));

  const auto h2 = compute_taps(scn, a, Node{"c", NodeKind::ue, {600, 0, 3}, {}}, 0.0, 980e6);
  CHECK(20.0 * std::log10(std::abs(h.gains[0]) / std::abs(h2.gains[0])) == doctest::Approx(6.0206).epsilon(1e-4));

  CHECK_THROWS_AS(compute_taps(scn, a, a, 0.0, 980e6), GeometryError);
  CHECK_THROWS_AS(compute_taps(scn, a, b, -1.0, 980e6), UsageError);
}

TEST_CASE("apply_channel: identity, pure delay and convolution oracle") {
  IqStream x;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 64; ++i) x.samples.emplace_back(static_cast<float>(n01(rng)), static_cast<float>(n01(rng)));

  CHECK(apply_channel(x, ChannelTaps{{0}, {1.0}}) == x);

  const auto d5 = apply_channel(x, ChannelTaps{{5}, {1.0}});
  for (int i = 0; i < 5; ++i) CHECK(d5.samples[i] == Sample{});
  for (std::size_t i = 5; i < 64; ++i) CHECK(d5.samples[i] == x.samples[i - 5]);

  const ChannelTaps two{{0, 3}, {{0.7, -0.2}, {-0.1, 0.4}}};
  const auto y = apply_channel(x, two);
  std::vector<oracle::cd> xd(x.samples.begin(), x.samples.end());
  const auto ref = oracle::convolve_taps(xd, two.delays_samples, two.gains);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(std::complex<double>(y.samples[i]) - ref[i]) <= 1e-6);

  CHECK_THROWS_AS(apply_channel(x, ChannelTaps{{-1}, {1.0}}), ConfigError);
}

TEST_CASE("apply_channel_blockwise: per-block taps with carried history") {
  IqStream x;
  for (int i = 0; i < 40; ++i) x.samples.emplace_back(static_cast<float>(i + 1), 0.0f);
  const std::vector<ChannelTaps> taps{ChannelTaps{{2}, {1.0}}, ChannelTaps{{3}, {2.0}}};
  const auto y = apply_channel_blockwise(x, taps, 20);
  std::vector<oracle::cd> xd(x.samples.begin(), x.samples.end());
  const auto r0 = oracle::convolve_taps(xd, {2}, {1.0});
  const auto r1 = oracle::convolve_taps(xd, {3}, {2.0});
  for (std::size_t k = 0; k < 40; ++k) {
    const auto ref = k < 20 ? r0[k] : r1[k];
    CHECK(std::complex<double>(y.samples[k]) == ref);
  }
}
