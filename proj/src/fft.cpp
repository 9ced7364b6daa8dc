#include "coexist/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace coexist::dsp {
namespace {

// Only fftw_execute_dft is thread safe; planning and destruction must be
// serialized.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> x, int sign) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> out(x.size());
  if (n == 0) return out;

  auto* in_buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * x.size()));
  auto* out_buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * x.size()));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, in_buf, out_buf, sign, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), reinterpret_cast<std::complex<double>*>(in_buf));
  fftw_execute(plan);
  std::copy_n(reinterpret_cast<std::complex<double>*>(out_buf), x.size(), out.begin());
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in_buf);
  fftw_free(out_buf);
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  return transform(x, FFTW_BACKWARD);
}

}  // namespace coexist::dsp
