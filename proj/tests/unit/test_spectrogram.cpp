#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coexist/coexistence.hpp"
#include "coexist/errors.hpp"
#include "coexist/waveforms.hpp"
#include "oracles.hpp"

using namespace coexist;
using namespace coexist::control;

namespace {

IqStream tone(double f_hz, std::size_t n, double fs = 1.024e6) {
  IqStream x;
  x.sample_rate_hz = fs;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs;
    x.samples.emplace_back(static_cast<float>(std::cos(ph)), static_cast<float>(std::sin(ph)));
  }
  return x;
}

// Parseval check of every frame against time-domain windowed energy.
double worst_parseval(const IqStream& x, std::size_t nfft, std::size_t hop) {
  const auto s = spectrogram(x, nfft, hop);
  double worst = 0.0;
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    double freq = 0.0, time = 0.0;
    for (double db : s.frames[f].magnitude_db) {
      const double mag = std::pow(10.0, db / 20.0) - kSpectrogramFloor;
      freq += mag * mag;
    }
    freq /= static_cast<double>(nfft);
    for (std::size_t i = 0; i < nfft; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / nfft);
      time += w * w * std::norm(std::complex<double>(x.samples[f * hop + i]));
    }
    worst = std::max(worst, std::abs(freq - time) / time);
  }
  return worst;
}

}  // namespace

TEST_CASE("spectrogram: frame count and times") {
  auto x = tone(1000.0, 4096);
  x.t0_s = 2.0;
  const auto s = spectrogram(x, 1024, 512);
  CHECK(s.frames.size() == (4096 - 1024) / 512 + 1);
  CHECK(s.frames[3].t_s == 2.0 + 3 * 512 / 1.024e6);
  CHECK_THROWS_AS(spectrogram(tone(0, 100), 1024, 512), UsageError);
}

TEST_CASE("spectrogram: tone bin localization") {
  for (std::size_t nfft : {64u, 256u, 1024u}) {
    const double fs = 1.024e6;
    const auto s = spectrogram(tone(fs / 8, 4 * nfft), nfft, nfft / 2);
    for (const auto& f : s.frames) {
      const auto m = std::max_element(f.magnitude_db.begin(), f.magnitude_db.end()) - f.magnitude_db.begin();
      CHECK(static_cast<std::size_t>(m) == nfft / 2 + nfft / 8);
    }
    const auto neg = spectrogram(tone(-fs / 4, 2 * nfft), nfft, nfft);
    const auto& f = neg.frames[0].magnitude_db;
    CHECK(static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin()) == nfft / 2 - nfft / 4);
  }
}

TEST_CASE("spectrogram: zero input sits at the floor") {
  IqStream z;
  z.samples.assign(2048, {});
  for (const auto& f : spectrogram(z, 256, 256).frames)
    for (double v : f.magnitude_db) CHECK(v == 20.0 * std::log10(kSpectrogramFloor));
}

TEST_CASE("spectrogram: Parseval on random and tone inputs") {
  CHECK(worst_parseval(waveforms::gen_awgn(1.0, 8192, 3), 1024, 512) <= 1e-6);
  CHECK(worst_parseval(waveforms::gen_awgn(1e-9, 4096, 4), 256, 100) <= 1e-6);
  CHECK(worst_parseval(tone(12345.0, 4096), 1024, 512) <= 1e-6);
}

TEST_CASE("spectrogram agrees with a naive DFT") {
  const auto x = waveforms::gen_awgn(1.0, 128, 5);
  const auto s = spectrogram(x, 128, 128);
  std::vector<oracle::cd> w(128);
  for (std::size_t i = 0; i < 128; ++i)
    w[i] = (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 128)) * oracle::cd(x.samples[i]);
  const auto X = oracle::dft(w);
  for (std::size_t m = 0; m < 128; ++m) {
    const std::size_t k = (m + 64) % 128;
    CHECK(s.frames[0].magnitude_db[m] == doctest::Approx(20.0 * std::log10(std::abs(X[k]) + 1e-12)).epsilon(1e-9));
  }
}
