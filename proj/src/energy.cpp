#include <algorithm>
#include <cmath>

#include "coexist/detector.hpp"
#include "coexist/errors.hpp"

namespace coexist::detect {

double window_energy(const framing::IqWindow& w) {
  double acc = 0.0;
  for (float v : w.data) acc += static_cast<double>(v) * v;
  return acc / static_cast<double>(framing::kWindowLen);
}

DetectorVerdict energy_detect(const framing::IqWindow& w, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("energy_detect: threshold must be positive");
  const double e = window_energy(w);
  DetectorVerdict v;
  v.window_start_sample = w.start_sample;
  v.label = e >= threshold ? 1 : 0;
  v.score = std::min(1.0, e / (2.0 * threshold));
  v.detector_id = "energy";
  return v;
}

double calibrate_energy_threshold(std::span<const framing::IqWindow> noise_windows, double target_pfa) {
  if (noise_windows.size() < kMinCalibrationWindows) {
    throw CalibrationError("calibration needs at least " + std::to_string(kMinCalibrationWindows) +
                           " noise windows, got " + std::to_string(noise_windows.size()));
  }
  if (!(target_pfa > 0.0 && target_pfa <= 0.5)) {
    throw CalibrationError("target_pfa must be in (0, 0.5], got " + std::to_string(target_pfa));
  }
  std::vector<double> e;
  e.reserve(noise_windows.size());
  for (const auto& w : noise_windows) e.push_back(window_energy(w));
  std::sort(e.begin(), e.end());
  const double pos = (1.0 - target_pfa) * static_cast<double>(e.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, e.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double threshold = e[lo] + frac * (e[hi] - e[lo]);
  if (!(threshold > 0.0)) throw CalibrationError("calibrated threshold is not positive (all-zero noise?)");
  return threshold;
}

EnergyDetector::EnergyDetector(double threshold, std::size_t batch) : threshold_(threshold), batch_(batch) {
  if (!(threshold > 0.0)) throw ConfigError("energy detector: threshold must be positive");
  if (batch == 0) throw ConfigError("energy detector: batch size must be >= 1");
}

std::vector<DetectorVerdict> EnergyDetector::classify(std::span<const framing::IqWindow> windows) const {
  std::vector<DetectorVerdict> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(energy_detect(w, threshold_));
  return out;
}

}  // namespace coexist::detect
