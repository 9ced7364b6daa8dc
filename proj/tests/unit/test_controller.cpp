#include <doctest.h>

#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"

using namespace coexist;
using namespace coexist::control;

namespace {

decision::VoteDecision at(double t_ms, bool radar) {
  decision::VoteDecision d;
  d.timestamp_ms = t_ms;
  d.radar_present = radar;
  d.radar_count = radar ? 100 : 0;
  return d;
}

std::vector<UeSession> six() {
  std::vector<UeSession> s;
  for (int i = 1; i <= 6; ++i) s.push_back({"ue" + std::to_string(i)});
  return s;
}

}  // namespace

TEST_CASE("controller transitions") {
  const ControllerConfig cfg;
  ControllerState s;
  auto r = step_controller(s, at(100, false), cfg);
  CHECK(r.state.bs.mode == BsMode::transmitting);
  CHECK(r.commands.empty());

  r = step_controller(r.state, at(200, true), cfg);
  CHECK(r.state.bs.mode == BsMode::vacated);
  CHECK(r.state.bs.since_s == doctest::Approx(0.2));
  CHECK(r.commands == std::vector<Command>{Command::shutdown});

  r = step_controller(r.state, at(300, true), cfg);
  CHECK(r.state.bs.mode == BsMode::vacated);
  CHECK(r.commands.empty());

  r = step_controller(r.state, at(400, false), cfg);
  CHECK(r.state.bs.mode == BsMode::transmitting);
  CHECK(r.commands == std::vector<Command>{Command::turn_on});

  CHECK_THROWS_AS(step_controller(r.state, at(350, false), cfg), SequencingError);
}

TEST_CASE("controller hold count") {
  ControllerConfig cfg;
  cfg.hold_count = 3;
  auto r = step_controller({}, at(100, true), cfg);
  r = step_controller(r.state, at(200, false), cfg);
  r = step_controller(r.state, at(300, false), cfg);
  CHECK(r.state.bs.mode == BsMode::vacated);
  r = step_controller(r.state, at(400, true), cfg);  // streak resets
  r = step_controller(r.state, at(500, false), cfg);
  r = step_controller(r.state, at(600, false), cfg);
  CHECK(r.state.bs.mode == BsMode::vacated);
  r = step_controller(r.state, at(700, false), cfg);
  CHECK(r.state.bs.mode == BsMode::transmitting);
}

TEST_CASE("UE throughput split") {
  auto s = six();
  const BsState on{BsMode::transmitting, 0.0};
  const BsState off{BsMode::vacated, 0.0};
  for (const auto& r : ue_throughput(off, s, 1.0, 12.0)) CHECK(r.mbps == 0.0);
  for (const auto& r : ue_throughput(on, s, 1.0, 12.0)) CHECK(r.mbps == 2.0);

  ControllerConfig cfg;
  std::vector<UeSession> half(s.begin(), s.begin() + 3);
  start_reconnects(half, 10.0, cfg);
  std::vector<UeSession> mixed = half;
  mixed.insert(mixed.end(), s.begin() + 3, s.end());
  const auto rates = ue_throughput(on, mixed, 11.0, 12.0);
  REQUIRE(rates.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(rates[i].mbps == (i < 3 ? 0.0 : 4.0));
  for (const auto& r : ue_throughput(on, mixed, 12.0, 12.0)) CHECK(r.mbps == 2.0);
  CHECK(ue_throughput(on, {}, 1.0, 12.0).empty());
}
