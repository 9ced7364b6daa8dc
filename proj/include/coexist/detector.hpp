#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "coexist/cnn.hpp"
#include "coexist/framing.hpp"

namespace coexist::detect {

struct DetectorVerdict {
  std::uint64_t window_start_sample = 0;
  std::uint8_t label = 0;
  double score = 0.0;  // P(radar) in [0, 1]
  std::string detector_id;

  bool operator==(const DetectorVerdict&) const = default;
};

/// Per-window radar classifier. Implementations are stateless after
/// construction and safe to share across threads.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string id() const = 0;
  /// Largest batch accepted by classify_batch.
  virtual std::size_t max_batch() const { return 10; }
  /// One verdict per window, in input order.
  virtual std::vector<DetectorVerdict> classify(std::span<const framing::IqWindow> windows) const = 0;
};

/// Enforces 1 <= len <= detector.max_batch(), then classifies.
std::vector<DetectorVerdict> classify_batch(const Detector& detector,
                                            std::span<const framing::IqWindow> windows);

/// Mean power E = sum(I^2 + Q^2) / 1024 of the raw window.
double window_energy(const framing::IqWindow& w);

/// label = E >= threshold, score = min(1, E / (2 threshold)).
DetectorVerdict energy_detect(const framing::IqWindow& w, double threshold);

/// Empirical (1 - target_pfa) quantile of the window energies (linear
/// interpolation between order statistics). Needs >= 1000 windows and
/// 0 < target_pfa <= 0.5.
double calibrate_energy_threshold(std::span<const framing::IqWindow> noise_windows, double target_pfa);

inline constexpr std::size_t kMinCalibrationWindows = 1000;

class EnergyDetector final : public Detector {
 public:
  explicit EnergyDetector(double threshold, std::size_t batch = 10);
  std::string id() const override { return "energy"; }
  std::size_t max_batch() const override { return batch_; }
  std::vector<DetectorVerdict> classify(std::span<const framing::IqWindow> windows) const override;
  double threshold() const { return threshold_; }

 private:
  double threshold_;
  std::size_t batch_;
};

class CnnDetector final : public Detector {
 public:
  CnnDetector(std::shared_ptr<const nn::CnnModel> model,
              framing::NormPolicy policy = framing::NormPolicy::unit_rms, std::size_t batch = 10);
  std::string id() const override { return "cnn"; }
  std::size_t max_batch() const override { return batch_; }
  std::vector<DetectorVerdict> classify(std::span<const framing::IqWindow> windows) const override;

 private:
  std::shared_ptr<const nn::CnnModel> model_;
  framing::NormPolicy policy_;
  std::size_t batch_;
};

/// Ground-truth labeller from known burst spans. For tests and for
/// separating detector errors from control-loop behavior.
class IdealDetector final : public Detector {
 public:
  explicit IdealDetector(std::vector<TimeSpan> bursts, std::size_t batch = 10);
  std::string id() const override { return "ideal"; }
  std::size_t max_batch() const override { return batch_; }
  std::vector<DetectorVerdict> classify(std::span<const framing::IqWindow> windows) const override;

 private:
  std::vector<TimeSpan> bursts_;
  std::size_t batch_;
};

/// Packs windows into a [b, 1024, 2] tensor after normalization.
nn::Tensor windows_to_tensor(std::span<const framing::IqWindow> windows, framing::NormPolicy policy);

}  // namespace coexist::detect
