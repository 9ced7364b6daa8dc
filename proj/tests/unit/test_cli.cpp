#include <doctest.h>

#include <filesystem>
#include <nlohmann/json.hpp>

#include "coexist/cli.hpp"
#include "coexist/cnn.hpp"
#include "coexist/decision.hpp"
#include "coexist/detector.hpp"
#include "coexist/iq_file.hpp"
#include "coexist/framing.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace coexist;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "coexist");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return coexist::cli::run_cli(static_cast<int>(args.size()), argv.data());
}

std::size_t radar_decisions(const std::string& path) {
  std::size_t n = 0;
  for (const auto& d : decision::read_decision_log(path)) n += d.radar_present;
  return n;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run({}) == 2);
  CHECK(run({"run", "--no-such-flag"}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"run", "--detector", "cnn"}) == 2);
  CHECK(run({"run", "--detector", "svm"}) == 2);
  CHECK(run({"detect"}) == 2);  // --input is required
  CHECK(run({"run", "--help"}) == 0);
  CHECK(run({"gen-dataset", "--scenario", "/no/such/scenario.yaml"}) == 2);
}

TEST_CASE("cli: gen-dataset is reproducible") {
  test_util::TempDir dir;
  const auto a = dir.file("a.dsb"), b = dir.file("b.dsb");
  const std::vector<std::string> common{"--per-cell", "10", "--radar-gains", "0", "10", "--cellular-gains", "0",
                                        "--seed", "3"};
  auto args = std::vector<std::string>{"gen-dataset", "--out", a};
  args.insert(args.end(), common.begin(), common.end());
  REQUIRE(run(args) == 0);
  args[2] = b;
  REQUIRE(run(args) == 0);
  CHECK(fs::exists(a + ".json"));
  CHECK(framing::dataset_checksum(a) == framing::dataset_checksum(b));
  const auto ds = framing::read_dataset(a);
  CHECK(ds.windows.size() == 40);
  CHECK(ds.meta.seed == 3);
}

TEST_CASE("cli: calibrate, gen-iq and detect") {
  test_util::TempDir dir;
  const auto noise = dir.file("noise.iqb");
  const auto noise_cal = dir.file("noise_cal.iqb");
  const auto thr = dir.file("thr.json");
  REQUIRE(run({"gen-iq", "--out", noise_cal, "--duration", "1.024", "--seed", "1"}) == 0);
  REQUIRE(run({"calibrate", "--input", noise_cal, "--pfa", "0.01", "--out", thr}) == 0);
  const auto j = nlohmann::json::parse(test_util::slurp(thr));
  CHECK(j.at("threshold").get<double>() > 0.0);
  CHECK(j.at("n_windows").get<int>() == 1024);

  // Noise only, fresh seed: 10 votes of 100 windows at pfa 0.01. A vote
  // needs >= 50 alarms, so P(any radar vote) is ~1e-70; allow at most one.
  REQUIRE(run({"gen-iq", "--out", noise, "--duration", "1.0", "--seed", "2"}) == 0);
  const auto out = dir.file("d.csv");
  REQUIRE(run({"detect", "--input", noise, "--threshold-file", thr, "--out", out}) == 0);
  CHECK(decision::read_decision_log(out).size() == 10);
  CHECK(radar_decisions(out) <= 1);
  CHECK(1.0 - oracle::binomial_cdf(49, 100, 0.015) < 1e-30);

  // Radar at 0 dB peak over 1e-9 noise is ~90 dB up: every vote is radar.
  const auto radar = dir.file("radar.iqb");
  REQUIRE(run({"gen-iq", "--out", radar, "--duration", "1.0", "--radar-db", "0"}) == 0);
  REQUIRE(run({"detect", "--input", radar, "--threshold-file", thr, "--out", out}) == 0);
  CHECK(radar_decisions(out) == 10);

  // Truncated capture.
  const auto bytes = test_util::slurp(radar);
  test_util::spit(dir.file("trunc.iqb"), bytes.substr(0, bytes.size() / 3));
  CHECK(run({"detect", "--input", dir.file("trunc.iqb"), "--threshold-file", thr}) == 3);
  CHECK(run({"detect", "--input", dir.file("absent.iqb"), "--threshold-file", thr}) == 3);
  CHECK(run({"detect", "--input", radar}) == 2);  // energy needs a threshold

  // Calibration contract.
  CHECK(run({"calibrate", "--windows", "999", "--out", dir.file("x.json")}) == 2);
  CHECK(run({"calibrate", "--input", noise_cal, "--pfa", "0.7", "--out", dir.file("x.json")}) == 2);
  REQUIRE(run({"calibrate", "--input", noise_cal, "--pfa", "0.5", "--out", dir.file("med.json")}) == 0);
  std::vector<double> e;
  for (const auto& w : framing::window_stream(read_iqb(noise_cal))) e.push_back(detect::window_energy(w));
  std::sort(e.begin(), e.end());
  const auto med = nlohmann::json::parse(test_util::slurp(dir.file("med.json"))).at("threshold").get<double>();
  CHECK(med == doctest::Approx((e[499] + e[500]) / 2).epsilon(1e-12));

  // Threshold file round trip: the written value is exactly what detect uses.
  CHECK(j.at("threshold").get<double>() ==
        nlohmann::json::parse(nlohmann::json(j).dump()).at("threshold").get<double>());
}

TEST_CASE("cli: run writes a report and honours the deadline") {
  test_util::TempDir dir;
  const std::vector<std::string> quick{"--duration", "6", "--burst", "2:4", "--seed", "4"};
  auto args = std::vector<std::string>{"run", "--out", dir.file("runs")};
  args.insert(args.end(), quick.begin(), quick.end());
  REQUIRE(run(args) == 0);
  std::vector<fs::path> runs(fs::directory_iterator(dir.file("runs")), fs::directory_iterator{});
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].filename().string().ends_with("_seed4"));
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& f : fs::directory_iterator(runs[0])) ++n;
  CHECK(n == 6);

  args = {"run", "--run-dir", dir.file("tight"), "--deadline-ms", "50"};
  args.insert(args.end(), quick.begin(), quick.end());
  CHECK(run(args) == 4);
  CHECK(fs::exists(dir.file("tight/summary.json")));

  args = {"run", "--run-dir", dir.file("loose"), "--deadline-ms", "60000", "--latency-runs", "2"};
  args.insert(args.end(), quick.begin(), quick.end());
  CHECK(run(args) == 0);
  CHECK(fs::exists(dir.file("loose/latency_study.json")));

  // Same seed, same bytes.
  args = {"run", "--run-dir", dir.file("r1")};
  args.insert(args.end(), quick.begin(), quick.end());
  REQUIRE(run(args) == 0);
  args[2] = dir.file("r2");
  REQUIRE(run(args) == 0);
  for (const char* f : {"bs_trace.csv", "throughput.csv", "decisions.csv", "events.csv", "spectrogram.csv",
                        "summary.json"})
    CHECK(test_util::slurp(dir.file(std::string("r1/") + f)) == test_util::slurp(dir.file(std::string("r2/") + f)));

  // CNN detector with weights; a corrupted weights file is a format error.
  const auto w = dir.file("w.cnw");
  nn::save_weights(nn::make_canonical_model(nn::InitKind::zeros), w);
  args = {"run", "--run-dir", dir.file("cnn"), "--detector", "cnn", "--weights", w, "--duration", "1", "--burst",
          "0.2:0.5"};
  CHECK(run(args) == 0);
  test_util::spit(w, test_util::slurp(w).substr(0, 100));
  CHECK(run(args) == 3);
}

TEST_CASE("cli: config file with flag precedence") {
  test_util::TempDir dir;
  test_util::spit(dir.file("c.toml"), "[gen-dataset]\nper-cell = 7\nseed = 11\nradar-gains = [5.0]\ncellular-gains = [0.0]\n");
  REQUIRE(run({"--config", dir.file("c.toml"), "gen-dataset", "--out", dir.file("a.dsb")}) == 0);
  auto ds = framing::read_dataset(dir.file("a.dsb"));
  CHECK(ds.meta.per_cell == 7);
  CHECK(ds.meta.seed == 11);
  REQUIRE(run({"--config", dir.file("c.toml"), "gen-dataset", "--out", dir.file("b.dsb"), "--seed", "12"}) == 0);
  ds = framing::read_dataset(dir.file("b.dsb"));
  CHECK(ds.meta.per_cell == 7);
  CHECK(ds.meta.seed == 12);
  CHECK(run({"--config", dir.file("missing.toml"), "gen-dataset"}) == 2);
}
