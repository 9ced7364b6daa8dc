#include <cmath>
#include <numbers>

#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"
#include "coexist/fft.hpp"

namespace coexist::control {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

SpectrogramFrames spectrogram(const IqStream& x, std::size_t nfft, std::size_t hop) {
  if (nfft == 0 || hop == 0) throw UsageError("spectrogram: nfft and hop must be >= 1");
  if (x.size() < nfft) {
    throw UsageError("spectrogram: stream has " + std::to_string(x.size()) + " samples, need at least nfft = " +
                     std::to_string(nfft));
  }
  const auto win = hann_window(nfft);
  SpectrogramFrames out;
  out.nfft = nfft;
  out.hop = hop;
  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t start = 0; start + nfft <= x.size(); start += hop) {
    for (std::size_t i = 0; i < nfft; ++i) {
      const auto& s = x.samples[start + i];
      buf[i] = win[i] * std::complex<double>(s.real(), s.imag());
    }
    const auto spec = dsp::fft(buf);
    SpectrogramFrame f;
    f.t_s = x.t0_s + static_cast<double>(start) / x.sample_rate_hz;
    f.magnitude_db.resize(nfft);
    // Output bin m holds frequency (m - nfft/2) * fs / nfft.
    for (std::size_t m = 0; m < nfft; ++m) {
      const std::size_t k = (m + nfft - nfft / 2) % nfft;
      f.magnitude_db[m] = 20.0 * std::log10(std::abs(spec[k]) + kSpectrogramFloor);
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

}  // namespace coexist::control
