#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"

namespace coexist::control {

const char* to_string(BsMode m) { return m == BsMode::transmitting ? "transmitting" : "vacated"; }

BsMode bs_mode_from_string(const std::string& s) {
  if (s == "transmitting") return BsMode::transmitting;
  if (s == "vacated") return BsMode::vacated;
  throw ConfigError("unknown BS mode '" + s + "'");
}

const char* to_string(Command c) { return c == Command::shutdown ? "shutdown" : "turn_on"; }

StepResult step_controller(const ControllerState& state, const decision::VoteDecision& d,
                           const ControllerConfig& cfg) {
  if (d.timestamp_ms < state.last_decision_ms) {
    throw SequencingError("controller: decision at " + std::to_string(d.timestamp_ms) +
                          " ms arrived after one at " + std::to_string(state.last_decision_ms) + " ms");
  }
  if (cfg.hold_count < 1) throw ConfigError("controller: hold_count must be >= 1");
  StepResult r{state, {}};
  r.state.last_decision_ms = d.timestamp_ms;
  const double t = d.timestamp_s();

  if (state.bs.mode == BsMode::transmitting) {
    if (d.radar_present) {
      r.state.bs = {BsMode::vacated, t};
      r.state.clean_streak = 0;
      r.commands.push_back(Command::shutdown);
    }
    return r;
  }

  if (d.radar_present) {
    r.state.clean_streak = 0;
    return r;
  }
  if (++r.state.clean_streak >= cfg.hold_count) {
    r.state.bs = {BsMode::transmitting, t};
    r.state.clean_streak = 0;
    r.commands.push_back(Command::turn_on);
  }
  return r;
}

void start_reconnects(std::vector<UeSession>& sessions, double t_s, const ControllerConfig& cfg) {
  for (auto& s : sessions) {
    s.state = UeState::reconnecting;
    s.reconnect_done_s = t_s + cfg.reconnect_delay_s;
  }
}

std::vector<UeRate> ue_throughput(const BsState& bs, const std::vector<UeSession>& sessions, double t_s,
                                  double aggregate_mbps) {
  const auto up = [&](const UeSession& s) {
    return s.state == UeState::connected || s.reconnect_done_s <= t_s;
  };
  std::size_t n_up = 0;
  for (const auto& s : sessions) n_up += up(s) ? 1 : 0;

  std::vector<UeRate> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) {
    const bool serving = bs.mode == BsMode::transmitting && up(s);
    out.push_back({s.ue_id, serving ? aggregate_mbps / static_cast<double>(n_up) : 0.0});
  }
  return out;
}

}  // namespace coexist::control
