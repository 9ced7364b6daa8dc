#include "coexist/detector.hpp"

#include <algorithm>

#include "coexist/errors.hpp"

namespace coexist::detect {

std::vector<DetectorVerdict> classify_batch(const Detector& detector,
                                            std::span<const framing::IqWindow> windows) {
  if (windows.empty() || windows.size() > detector.max_batch()) {
    throw UsageError("classify_batch: batch of " + std::to_string(windows.size()) + " windows, expected 1.." +
                     std::to_string(detector.max_batch()));
  }
  return detector.classify(windows);
}

nn::Tensor windows_to_tensor(std::span<const framing::IqWindow> windows, framing::NormPolicy policy) {
  nn::Tensor t({windows.size(), framing::kWindowLen, framing::kChannels});
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto w = framing::normalize(windows[b], policy);
    std::copy(w.data.begin(), w.data.end(), t.data.begin() + static_cast<std::ptrdiff_t>(b * framing::kWindowValues));
  }
  return t;
}

CnnDetector::CnnDetector(std::shared_ptr<const nn::CnnModel> model, framing::NormPolicy policy, std::size_t batch)
    : model_(std::move(model)), policy_(policy), batch_(batch) {
  if (!model_) throw ConfigError("cnn detector: model is null");
  if (batch == 0) throw ConfigError("cnn detector: batch size must be >= 1");
  model_->shape_chain();
}

std::vector<DetectorVerdict> CnnDetector::classify(std::span<const framing::IqWindow> windows) const {
  const auto probs = nn::cnn_forward(*model_, windows_to_tensor(windows, policy_));
  std::vector<DetectorVerdict> out;
  out.reserve(windows.size());
  for (std::size_t b = 0; b < windows.size(); ++b) {
    DetectorVerdict v;
    v.window_start_sample = windows[b].start_sample;
    v.score = std::clamp(static_cast<double>(probs.data[b * 2 + 1]), 0.0, 1.0);
    v.label = v.score >= 0.5 ? 1 : 0;
    v.detector_id = "cnn";
    out.push_back(std::move(v));
  }
  return out;
}

IdealDetector::IdealDetector(std::vector<TimeSpan> bursts, std::size_t batch)
    : bursts_(std::move(bursts)), batch_(batch) {}

std::vector<DetectorVerdict> IdealDetector::classify(std::span<const framing::IqWindow> windows) const {
  std::vector<DetectorVerdict> out;
  for (const auto& lw : framing::label_windows(windows, bursts_)) {
    out.push_back({lw.window.start_sample, lw.label, static_cast<double>(lw.label), "ideal"});
  }
  return out;
}

}  // namespace coexist::detect
