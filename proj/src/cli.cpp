#include "coexist/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <functional>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "coexist/coexistence.hpp"
#include "coexist/decision.hpp"
#include "coexist/detector.hpp"
#include "coexist/errors.hpp"
#include "coexist/framing.hpp"
#include "coexist/iq_file.hpp"
#include "coexist/logging.hpp"
#include "coexist/rng.hpp"
#include "coexist/scenario.hpp"
#include "coexist/text_format.hpp"
#include "coexist/waveforms.hpp"

namespace coexist::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string scenario_path;
  std::uint64_t seed = 1;
};

struct DetectorArgs {
  std::string kind = "energy";
  std::string weights;
  bool allow_custom_arch = false;
  std::string norm = "unit_rms";
  std::optional<double> threshold;
  std::string threshold_file;
};

struct VoteArgs {
  std::size_t vote_size = 100;
  std::size_t batch_size = 10;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario_path, "Scenario YAML file (built-in Waikiki scenario if omitted)");
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

void add_detector(CLI::App* cmd, DetectorArgs& d) {
  cmd->add_option("--detector", d.kind, "Detector kind")
      ->check(CLI::IsMember({"energy", "cnn"}))
      ->capture_default_str();
  cmd->add_option("--weights", d.weights, "CNN weights (.cnw), required with --detector cnn");
  cmd->add_flag("--allow-custom-arch", d.allow_custom_arch, "Skip the architecture hash check");
  cmd->add_option("--norm", d.norm, "CNN input normalization")
      ->check(CLI::IsMember({"unit_rms", "max_abs", "none"}))
      ->capture_default_str();
  cmd->add_option("--threshold", d.threshold, "Energy threshold (overrides --threshold-file)");
  cmd->add_option("--threshold-file", d.threshold_file, "Threshold JSON written by `calibrate`");
}

void add_vote(CLI::App* cmd, VoteArgs& v) {
  cmd->add_option("--vote-size", v.vote_size, "Windows per vote")->capture_default_str();
  cmd->add_option("--batch-size", v.batch_size, "Windows per detector call")->capture_default_str();
}

scenario::Scenario load_scn(const Common& c) {
  return c.scenario_path.empty() ? scenario::default_scenario() : scenario::load_scenario(c.scenario_path);
}

decision::VoteConfig vote_config(const VoteArgs& v) {
  decision::VoteConfig cfg;
  cfg.vote_size = v.vote_size;
  cfg.batch_size = v.batch_size;
  cfg.validate();
  return cfg;
}

struct ThresholdFile {
  double threshold = 0.0;
  double target_pfa = 0.0;
  std::size_t n_windows = 0;
  std::uint64_t seed = 0;
  std::string source;
};

void write_threshold_file(const std::string& path, const ThresholdFile& t) {
  const json j = {{"threshold", t.threshold},
                  {"target_pfa", t.target_pfa},
                  {"n_windows", t.n_windows},
                  {"seed", t.seed},
                  {"source", t.source}};
  detail::write_file(path, j.dump(2) + "\n");
}

ThresholdFile read_threshold_file(const std::string& path) {
  ThresholdFile t;
  try {
    const auto j = json::parse(detail::read_file(path));
    t.threshold = j.at("threshold").get<double>();
    t.target_pfa = j.value("target_pfa", 0.0);
    t.n_windows = j.value("n_windows", std::size_t{0});
    t.seed = j.value("seed", std::uint64_t{0});
    t.source = j.value("source", std::string{});
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what(), 0);
  }
  if (!(t.threshold > 0.0) || !std::isfinite(t.threshold)) {
    throw ConfigError(path + ": threshold must be positive and finite");
  }
  return t;
}

std::optional<double> explicit_threshold(const DetectorArgs& d) {
  if (d.threshold) {
    if (!(*d.threshold > 0.0)) throw ValidationError("threshold", "must be positive");
    return d.threshold;
  }
  if (!d.threshold_file.empty()) return read_threshold_file(d.threshold_file).threshold;
  return std::nullopt;
}

/// Checks paths and detector arguments before any work starts.
void validate_detector_args(const DetectorArgs& d) {
  if (d.kind == "cnn") {
    if (d.weights.empty()) throw UsageError("--detector cnn requires --weights");
    if (!fs::exists(d.weights)) throw IoError("weights file not found: " + d.weights);
  } else if (!d.weights.empty()) {
    throw UsageError("--weights only applies to --detector cnn");
  }
  if (!d.threshold_file.empty() && !fs::exists(d.threshold_file)) {
    throw IoError("threshold file not found: " + d.threshold_file);
  }
}

std::unique_ptr<detect::Detector> make_detector(const DetectorArgs& d, std::size_t batch,
                                                const std::function<double()>& auto_threshold) {
  if (d.kind == "cnn") {
    auto model = std::make_shared<const nn::CnnModel>(nn::load_weights(d.weights, d.allow_custom_arch));
    return std::make_unique<detect::CnnDetector>(model, framing::norm_policy_from_string(d.norm), batch);
  }
  auto thr = explicit_threshold(d);
  if (!thr) {
    if (!auto_threshold) throw UsageError("energy detector needs --threshold or --threshold-file");
    thr = auto_threshold();
  }
  return std::make_unique<detect::EnergyDetector>(*thr, batch);
}

std::vector<TimeSpan> parse_bursts(const std::vector<std::string>& specs) {
  std::vector<TimeSpan> out;
  for (const auto& s : specs) {
    const auto parts = text::split(s, ':');
    if (parts.size() != 2) throw ValidationError("bursts", "expected START:END, got '" + s + "'");
    out.push_back({text::parse_double(parts[0], "--burst"), text::parse_double(parts[1], "--burst")});
  }
  return out;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// ---- gen-dataset

struct GenDatasetArgs {
  Common common;
  std::string out = "dataset.dsb";
  std::vector<double> radar_gains{0.0, 5.0, 10.0, 15.0, 20.0};
  std::vector<double> cellular_gains{0.0, 10.0, 20.0};
  std::size_t per_cell = 200;
};

int cmd_gen_dataset(const GenDatasetArgs& a) {
  const auto scn = load_scn(a.common);
  const auto ds = framing::build_training_mix(scn, a.radar_gains, a.cellular_gains, a.per_cell, a.common.seed);
  framing::write_dataset(ds, a.out);
  std::printf("wrote %s: %zu windows, label0=%zu label1=%zu\n", a.out.c_str(), ds.windows.size(), ds.count(0),
              ds.count(1));
  for (const auto& c : ds.meta.cells) {
    std::printf("  cell radar=%s cellular=%s: %llu windows, %llu radar\n",
                c.has_radar ? (text::fmt(c.radar_gain_db) + "dB").c_str() : "off",
                c.has_cellular ? (text::fmt(c.cellular_gain_db) + "dB").c_str() : "off",
                static_cast<unsigned long long>(c.n_windows), static_cast<unsigned long long>(c.n_radar));
  }
  return kExitOk;
}

// ---- calibrate

struct CalibrateArgs {
  Common common;
  std::string input;
  std::string out = "threshold.json";
  double pfa = 0.01;
  std::size_t windows = 10000;
};

int cmd_calibrate(const CalibrateArgs& a) {
  ThresholdFile t;
  t.target_pfa = a.pfa;
  t.seed = a.common.seed;
  if (!a.input.empty()) {
    const auto x = read_iqb(a.input);
    const auto w = framing::window_stream(x);
    t.threshold = detect::calibrate_energy_threshold(w, a.pfa);
    t.n_windows = w.size();
    t.source = a.input;
  } else {
    const auto scn = load_scn(a.common);
    t.threshold = control::calibrate_sensing_threshold(scn, control::ExperimentConfig{}, a.windows, a.pfa, a.common.seed);
    t.n_windows = a.windows;
    t.source = "sensing";
  }
  write_threshold_file(a.out, t);
  std::printf("threshold %s (pfa %s over %zu windows) -> %s\n", text::fmt(t.threshold).c_str(),
              text::fmt(a.pfa).c_str(), t.n_windows, a.out.c_str());
  return kExitOk;
}

// ---- detect

struct DetectArgs {
  Common common;
  DetectorArgs detector;
  VoteArgs vote;
  std::string input;
  std::string out = "decisions.csv";
};

int cmd_detect(const DetectArgs& a) {
  validate_detector_args(a.detector);
  if (!fs::exists(a.input)) throw IoError("input file not found: " + a.input);
  const auto cfg = vote_config(a.vote);
  const auto det = make_detector(a.detector, cfg.batch_size, nullptr);
  const auto x = read_iqb(a.input);
  if (x.sample_rate_hz != cfg.sample_rate_hz) {
    throw ConfigError(a.input + ": sample rate " + text::fmt(x.sample_rate_hz) + " Hz, detector expects " +
                      text::fmt(cfg.sample_rate_hz));
  }
  const auto windows = framing::window_stream(x);
  decision::VoteAccumulator acc(cfg);
  std::vector<decision::VoteDecision> decisions;
  // Only whole votes are decided; the tail is reported and skipped.
  const std::size_t used = windows.size() / cfg.vote_size * cfg.vote_size;
  if (used < windows.size()) logger()->info("{} trailing windows do not fill a vote", windows.size() - used);
  std::span<const framing::IqWindow> all(windows.data(), used);
  for (std::size_t i = 0; i < all.size(); i += cfg.batch_size) {
    const auto batch = all.subspan(i, cfg.batch_size);
    if (auto d = acc.accumulate(detect::classify_batch(*det, batch), 0.0)) decisions.push_back(*d);
  }
  decision::write_decision_log(a.out, decisions);
  std::size_t radar = 0;
  for (const auto& d : decisions) radar += d.radar_present ? 1 : 0;
  std::printf("%zu windows, %zu decisions, %zu radar -> %s\n", windows.size(), decisions.size(), radar,
              a.out.c_str());
  return kExitOk;
}

// ---- gen-iq

struct GenIqArgs {
  Common common;
  std::string out = "capture.iqb";
  double duration_s = 1.0;
  std::optional<double> noise_power;
  std::optional<double> radar_db;
  std::optional<double> cellular_db;
  std::vector<std::string> bursts;
};

int cmd_gen_iq(const GenIqArgs& a) {
  const auto scn = load_scn(a.common);
  const double fs = 1.024e6;
  const auto n = static_cast<std::size_t>(std::llround(a.duration_s * fs));
  if (n == 0) throw ValidationError("duration", "must cover at least one sample");
  const double noise = a.noise_power.value_or(scn.noise_power);
  if (noise < 0.0) throw ValidationError("noise-power", "must be >= 0");
  const auto awgn = waveforms::gen_awgn(noise, n, derive_seed(a.common.seed, {1}), fs);
  std::vector<waveforms::MixPart> parts{{&awgn, 0.0}};
  IqStream radar, cell;
  if (a.radar_db) {
    waveforms::RadarWaveformConfig rc;
    rc.burst_spans = parse_bursts(a.bursts);
    radar = waveforms::gen_radar_segment(rc, 0.0, n, fs, derive_seed(a.common.seed, {2}));
    parts.push_back({&radar, *a.radar_db});
  }
  if (a.cellular_db) {
    cell = waveforms::gen_cellular_samples(waveforms::CellularWaveformConfig{}, n, fs, derive_seed(a.common.seed, {3}));
    parts.push_back({&cell, *a.cellular_db});
  }
  const auto x = waveforms::mix(parts);
  json meta = {{"seed", a.common.seed}, {"noise_power", noise}, {"duration_s", a.duration_s}};
  meta["radar_db"] = a.radar_db ? json(*a.radar_db) : json();
  meta["cellular_db"] = a.cellular_db ? json(*a.cellular_db) : json();
  meta["bursts"] = a.bursts;
  write_iqb(a.out, x, &meta);
  std::printf("wrote %s: %zu samples\n", a.out.c_str(), x.samples.size());
  return kExitOk;
}

// ---- run

struct RunArgs {
  Common common;
  DetectorArgs detector;
  VoteArgs vote;
  std::string out = "runs";
  std::string run_dir;
  double duration_s = 120.0;
  std::vector<std::string> bursts{"50:90"};
  std::size_t hold_count = 1;
  double reconnect_delay_s = 2.0;
  std::string timing = "none";
  double deadline_ms = 60000.0;
  double calibration_pfa = 0.01;
  std::size_t latency_runs = 0;
};

int cmd_run(const RunArgs& a) {
  validate_detector_args(a.detector);
  if (!(a.deadline_ms > 0.0)) throw ValidationError("deadline-ms", "must be positive");
  const auto scn = load_scn(a.common);

  control::ExperimentConfig cfg;
  cfg.vote = vote_config(a.vote);
  cfg.controller.hold_count = a.hold_count;
  cfg.controller.reconnect_delay_s = a.reconnect_delay_s;
  cfg.timing = control::timing_mode_from_string(a.timing);

  control::Timeline tl;
  tl.duration_s = a.duration_s;
  tl.radar_bursts = parse_bursts(a.bursts);
  tl.validate();

  std::optional<double> calibrated;
  const auto auto_threshold = [&] {
    if (!calibrated) {
      calibrated = control::calibrate_sensing_threshold(scn, cfg, 10000, a.calibration_pfa,
                                                         derive_seed(a.common.seed, {0xca1}));
    }
    return *calibrated;
  };
  const auto det = make_detector(a.detector, cfg.vote.batch_size, auto_threshold);

  const std::string dir =
      a.run_dir.empty() ? (fs::path(a.out) / (utc_stamp() + "_seed" + std::to_string(a.common.seed))).string()
                        : a.run_dir;

  control::ExperimentReport report;
  int rc = kExitOk;
  try {
    report = control::run_experiment(scn, tl, *det, cfg, a.common.seed);
  } catch (const control::ExperimentError& e) {
    control::export_report(e.partial(), dir);
    throw;
  }
  control::export_report(report, dir);

  if (a.latency_runs > 0) {
    const control::DetectorFactory factory = [&](const control::Timeline&) {
      return make_detector(a.detector, cfg.vote.batch_size, auto_threshold);
    };
    const auto st = control::latency_study(scn, factory, cfg, a.latency_runs, a.common.seed);
    const json j = {{"runs", a.latency_runs},
                    {"missed", st.missed},
                    {"mean_ms", st.mean_ms},
                    {"stddev_ms", st.stddev_ms},
                    {"latencies_ms", st.latencies_ms}};
    detail::write_file((fs::path(dir) / "latency_study.json").string(), j.dump(2) + "\n");
  }

  const auto& s = report.summary;
  std::printf("%s: %zu decisions (%zu radar), %zu shutdowns, mean latency %s ms, vacated %s s\n", dir.c_str(),
              s.n_decisions, s.n_radar_decisions, s.n_shutdowns,
              s.mean_latency_ms ? text::fmt(*s.mean_latency_ms).c_str() : "n/a",
              text::fmt(s.vacated_duration_s).c_str());

  if (s.mean_latency_ms && *s.mean_latency_ms > a.deadline_ms) {
    logger()->error("mean detection latency {} ms exceeds deadline {} ms", *s.mean_latency_ms, a.deadline_ms);
    rc = kExitDeadline;
  } else if (s.detection_latencies_ms.size() < tl.radar_bursts.size()) {
    logger()->error("{} of {} radar bursts never detected", tl.radar_bursts.size() - s.detection_latencies_ms.size(),
                    tl.radar_bursts.size());
    rc = kExitDeadline;
  }
  return rc;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e)) {
    return kExitIo;
  }
  return 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  configure_logging_from_env();

  CLI::App app{"Radar/cellular coexistence: waveform synthesis, radar detection and BS control"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");

  GenDatasetArgs gd;
  auto* c_gd = app.add_subcommand("gen-dataset", "Build a labeled training mix (.dsb + .dsb.json)");
  add_common(c_gd, gd.common);
  c_gd->add_option("--out", gd.out, "Output .dsb path")->capture_default_str();
  c_gd->add_option("--radar-gains", gd.radar_gains, "Radar gains in dB over noise")->capture_default_str();
  c_gd->add_option("--cellular-gains", gd.cellular_gains, "Cellular gains in dB over noise")->capture_default_str();
  c_gd->add_option("--per-cell", gd.per_cell, "Windows per gain cell")->capture_default_str();

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run the coexistence experiment and write a report directory");
  add_common(c_run, run.common);
  add_detector(c_run, run.detector);
  add_vote(c_run, run.vote);
  c_run->add_option("--out", run.out, "Parent directory for <timestamp>_seed<N> run directories")
      ->capture_default_str();
  c_run->add_option("--run-dir", run.run_dir, "Exact report directory (overrides --out naming)");
  c_run->add_option("--duration", run.duration_s, "Experiment length in seconds")->capture_default_str();
  c_run->add_option("--burst", run.bursts, "Radar burst START:END in seconds (repeatable)")->capture_default_str();
  c_run->add_option("--hold-count", run.hold_count, "Clean decisions before turn-on")->capture_default_str();
  c_run->add_option("--reconnect-delay", run.reconnect_delay_s, "UE reconnect delay in seconds")
      ->capture_default_str();
  c_run->add_option("--timing", run.timing, "Compute-time accounting")
      ->check(CLI::IsMember({"none", "wall"}))
      ->capture_default_str();
  c_run->add_option("--deadline-ms", run.deadline_ms, "Detection deadline; exit 4 when mean latency exceeds it")
      ->capture_default_str();
  c_run->add_option("--calibration-pfa", run.calibration_pfa, "Target false-alarm rate for auto calibration")
      ->capture_default_str();
  c_run->add_option("--latency-runs", run.latency_runs, "Extra short runs for latency_study.json")
      ->capture_default_str();

  DetectArgs dt;
  auto* c_dt = app.add_subcommand("detect", "Run detector and votes over a recorded .iqb file");
  add_common(c_dt, dt.common);
  add_detector(c_dt, dt.detector);
  add_vote(c_dt, dt.vote);
  c_dt->add_option("--input", dt.input, "Input .iqb")->required();
  c_dt->add_option("--out", dt.out, "Decision log CSV")->capture_default_str();

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Calibrate the energy threshold and write it as JSON");
  add_common(c_cal, cal.common);
  c_cal->add_option("--input", cal.input, "Radar-free .iqb (synthesized sensing windows if omitted)");
  c_cal->add_option("--out", cal.out, "Threshold JSON")->capture_default_str();
  c_cal->add_option("--pfa", cal.pfa, "Target false-alarm probability")->capture_default_str();
  c_cal->add_option("--windows", cal.windows, "Synthesized window count")->capture_default_str();

  GenIqArgs gi;
  auto* c_gi = app.add_subcommand("gen-iq", "Synthesize an .iqb capture (noise plus optional radar/cellular)");
  add_common(c_gi, gi.common);
  c_gi->add_option("--out", gi.out, "Output .iqb")->capture_default_str();
  c_gi->add_option("--duration", gi.duration_s, "Length in seconds")->capture_default_str();
  c_gi->add_option("--noise-power", gi.noise_power, "AWGN power (scenario noise if omitted)");
  c_gi->add_option("--radar-db", gi.radar_db, "Add the radar chirp at this gain in dB");
  c_gi->add_option("--cellular-db", gi.cellular_db, "Add the OFDM downlink at this gain in dB");
  c_gi->add_option("--burst", gi.bursts, "Radar burst START:END in seconds (repeatable; always on if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_gd->parsed()) return cmd_gen_dataset(gd);
    if (c_run->parsed()) return cmd_run(run);
    if (c_dt->parsed()) return cmd_detect(dt);
    if (c_cal->parsed()) return cmd_calibrate(cal);
    if (c_gi->parsed()) return cmd_gen_iq(gi);
  } catch (const std::exception& e) {
    const int rc = exit_code_for(e);
    std::fprintf(stderr, "error: %s\n", e.what());
    return rc;
  }
  return kExitUsage;
}

}  // namespace coexist::cli
