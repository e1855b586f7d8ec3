#pragma once

#include <cstddef>

#include "lpw/field.hpp"

namespace lpw::detail {

/// Unnormalized 2-D complex FFT of an N×N row-major plane.
///
/// Plans are created once per size with FFTW_ESTIMATE | FFTW_UNALIGNED, so
/// the same input always takes the same code path regardless of buffer
/// alignment; that keeps repeated evolutions bit-identical.
class Fft2d {
 public:
  static const Fft2d& for_size(std::size_t n);

  void forward(const Complex* in, Complex* out) const;
  void inverse(const Complex* in, Complex* out) const;

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d();

 private:
  explicit Fft2d(std::size_t n);

  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Angular wavenumber of FFT bin j on a grid of n points and length L.
double wavenumber(std::size_t j, std::size_t n, double length);

}  // namespace lpw::detail
