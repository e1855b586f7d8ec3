#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lpw/singlet_oracle.hpp"

namespace lpw::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

const Fft2d& Fft2d::for_size(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fft2d>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[n];
  if (!slot) slot.reset(new Fft2d(n));
  return *slot;
}

Fft2d::Fft2d(std::size_t n) : n_(n) {
  std::vector<Complex> a(n * n), b(n * n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(ni, ni, in, out, FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft_2d(ni, ni, in, out, FFTW_BACKWARD, flags);
}

Fft2d::~Fft2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft2d::forward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Fft2d::inverse(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

double wavenumber(std::size_t j, std::size_t n, double length) {
  const auto signed_j = j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
  return kTwoPi * signed_j / length;
}

}  // namespace lpw::detail
