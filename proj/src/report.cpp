#include <filesystem>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"
#include "coexist/text_format.hpp"

namespace coexist::control {
namespace {

namespace fs = std::filesystem;
using text::fmt;

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json summary_json(const ExperimentSummary& s) {
  return {{"seed", s.seed},
          {"detector", s.detector_id},
          {"timing", s.timing},
          {"duration_s", s.duration_s},
          {"n_decisions", s.n_decisions},
          {"n_radar_decisions", s.n_radar_decisions},
          {"n_shutdowns", s.n_shutdowns},
          {"n_turn_ons", s.n_turn_ons},
          {"vacated_duration_s", s.vacated_duration_s},
          {"detection_latencies_ms", s.detection_latencies_ms},
          {"mean_latency_ms", opt(s.mean_latency_ms)},
          {"window_accuracy", opt(s.window_accuracy)},
          {"vote_accuracy", opt(s.vote_accuracy)}};
}

ExperimentSummary summary_from_json(const nlohmann::json& j) {
  ExperimentSummary s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.detector_id = j.at("detector").get<std::string>();
  s.timing = j.at("timing").get<std::string>();
  s.duration_s = j.at("duration_s").get<double>();
  s.n_decisions = j.at("n_decisions").get<std::size_t>();
  s.n_radar_decisions = j.at("n_radar_decisions").get<std::size_t>();
  s.n_shutdowns = j.at("n_shutdowns").get<std::size_t>();
  s.n_turn_ons = j.at("n_turn_ons").get<std::size_t>();
  s.vacated_duration_s = j.at("vacated_duration_s").get<double>();
  s.detection_latencies_ms = j.at("detection_latencies_ms").get<std::vector<double>>();
  s.mean_latency_ms = opt_from(j, "mean_latency_ms");
  s.window_accuracy = opt_from(j, "window_accuracy");
  s.vote_accuracy = opt_from(j, "vote_accuracy");
  return s;
}

struct Csv {
  std::vector<std::string_view> header;
  std::vector<std::vector<std::string_view>> rows;
};

Csv parse_csv(const std::string& data, const std::string& path, std::string_view expect_header_prefix) {
  const auto ls = text::lines(data);
  if (ls.empty() || !ls.front().starts_with(expect_header_prefix)) {
    throw FormatError(path + ": missing or wrong header", 0);
  }
  Csv c;
  c.header = text::split(ls.front());
  for (std::size_t i = 1; i < ls.size(); ++i) {
    c.rows.push_back(text::split(ls[i]));
    if (c.rows.back().size() != c.header.size()) {
      throw ConfigError(path + " line " + std::to_string(i + 1) + ": expected " + std::to_string(c.header.size()) +
                        " fields");
    }
  }
  return c;
}

}  // namespace

std::vector<std::string> export_report(const ExperimentReport& r, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir + ": " + ec.message());
  std::vector<std::string> written;
  const auto put = [&](const std::string& name, const std::string& body) {
    const auto path = (fs::path(dir) / name).string();
    detail::write_file(path, body);
    written.push_back(path);
  };

  std::string s = "t_s,mode\n";
  for (const auto& [t, m] : r.bs_trace) s += fmt(t) + "," + to_string(m) + "\n";
  put("bs_trace.csv", s);

  s = "t_s,ue_id,mbps\n";
  for (const auto& x : r.throughput_trace) s += fmt(x.t_s) + "," + x.ue_id + "," + fmt(x.mbps) + "\n";
  put("throughput.csv", s);

  s = decision::decision_log_header() + "\n";
  for (const auto& d : r.decisions) s += decision::decision_log_line(d) + "\n";
  put("decisions.csv", s);

  s = "t_s,kind,detail\n";
  for (const auto& e : r.events) s += fmt(e.t_s) + "," + e.kind + "," + e.detail + "\n";
  put("events.csv", s);

  s = "t_s";
  for (std::size_t m = 0; m < r.spectrogram.nfft; ++m) s += ",bin" + std::to_string(m);
  s += "\n";
  for (const auto& f : r.spectrogram.frames) {
    s += fmt(f.t_s);
    for (double v : f.magnitude_db) s += "," + fmt(v);
    s += "\n";
  }
  put("spectrogram.csv", s);

  auto j = summary_json(r.summary);
  j["spectrogram_nfft"] = r.spectrogram.nfft;
  j["spectrogram_hop"] = r.spectrogram.hop;
  put("summary.json", j.dump(2) + "\n");
  return written;
}

ExperimentReport read_report(const std::string& dir) {
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  ExperimentReport r;

  {
    const auto p = path("bs_trace.csv");
    const auto data = detail::read_file(p);
    for (const auto& row : parse_csv(data, p, "t_s,mode").rows) {
      r.bs_trace.push_back({text::parse_double(row[0], p), bs_mode_from_string(std::string(row[1]))});
    }
  }
  {
    const auto p = path("throughput.csv");
    const auto data = detail::read_file(p);
    for (const auto& row : parse_csv(data, p, "t_s,ue_id,mbps").rows) {
      r.throughput_trace.push_back({text::parse_double(row[0], p), std::string(row[1]), text::parse_double(row[2], p)});
    }
  }
  r.decisions = decision::read_decision_log(path("decisions.csv"));
  {
    const auto p = path("events.csv");
    const auto data = detail::read_file(p);
    for (const auto& row : parse_csv(data, p, "t_s,kind,detail").rows) {
      r.events.push_back({text::parse_double(row[0], p), std::string(row[1]), std::string(row[2])});
    }
  }
  const auto summary_path = path("summary.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(summary_path));
    r.summary = summary_from_json(j);
    r.spectrogram.nfft = j.at("spectrogram_nfft").get<std::size_t>();
    r.spectrogram.hop = j.at("spectrogram_hop").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(summary_path + ": " + e.what(), 0);
  }
  {
    const auto p = path("spectrogram.csv");
    const auto data = detail::read_file(p);
    const auto csv = parse_csv(data, p, "t_s");
    if (csv.header.size() != r.spectrogram.nfft + 1) throw FormatError(p + ": column count disagrees with nfft", 0);
    for (const auto& row : csv.rows) {
      SpectrogramFrame f;
      f.t_s = text::parse_double(row[0], p);
      for (std::size_t m = 1; m < row.size(); ++m) f.magnitude_db.push_back(text::parse_double(row[m], p));
      r.spectrogram.frames.push_back(std::move(f));
    }
  }
  return r;
}

}  // namespace coexist::control
