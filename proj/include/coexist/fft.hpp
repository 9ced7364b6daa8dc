#pragma once

#include <complex>
#include <span>
#include <vector>

namespace coexist::dsp {

/// Unnormalized forward DFT, X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

/// Unnormalized inverse DFT, x[n] = sum_k X[k] e^{+j 2 pi k n / N}.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

}  // namespace coexist::dsp
