#include "lpw/field.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace lpw {

GridSpec::GridSpec(std::size_t points_per_axis, double domain_length)
    : points_(points_per_axis), length_(domain_length) {
  if (points_ < 32 || (points_ & (points_ - 1)) != 0) {
    throw std::invalid_argument("points_per_axis must be a power of two >= 32, got " +
                                std::to_string(points_));
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw std::invalid_argument("domain_length must be positive and finite");
  }
}

double GridSpec::wrap(double x) const {
  double w = std::fmod(x, length_);
  if (w < 0.0) w += length_;
  if (w >= length_) w = 0.0;
  return w;
}

double periodic_delta(double from, double to, double circumference) {
  double d = std::fmod(to - from, circumference);
  if (d < -0.5 * circumference) d += circumference;
  if (d >= 0.5 * circumference) d -= circumference;
  return d;
}

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0)) throw std::invalid_argument("hbar and mass must be positive");
}

SpinorField::SpinorField(GridSpec grid)
    : grid_(grid), amps_(kComponents * grid.points() * grid.points(), Complex{0.0, 0.0}) {}

std::span<Complex> SpinorField::component(int c) {
  return std::span<Complex>(amps_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
}

std::span<const Complex> SpinorField::component(int c) const {
  return std::span<const Complex>(amps_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                                 plane_size());
}

double SpinorField::density(std::size_t i1, std::size_t i2) const {
  double rho = 0.0;
  for (int c = 0; c < kComponents; ++c) rho += std::norm(amps_[offset(c, i1, i2)]);
  return rho;
}

double SpinorField::norm() const {
  double sum = 0.0;
  for (const auto& a : amps_) sum += std::norm(a);
  const double dx = grid_.spacing();
  return std::sqrt(sum * dx * dx);
}

void SpinorField::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::runtime_error("cannot normalize a zero or non-finite field");
  const double inv = 1.0 / n;
  for (auto& a : amps_) a *= inv;
}

void SpinorField::scale(Complex factor) {
  for (auto& a : amps_) a *= factor;
}

bool SpinorField::all_finite() const {
  for (const auto& a : amps_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  }
  return true;
}

bool operator==(const SpinorField& lhs, const SpinorField& rhs) {
  if (!(lhs.grid_ == rhs.grid_)) return false;
  return std::memcmp(lhs.amps_.data(), rhs.amps_.data(), lhs.amps_.size() * sizeof(Complex)) == 0;
}

double l2_distance(const SpinorField& lhs, const SpinorField& rhs) {
  if (!(lhs.grid() == rhs.grid())) throw std::invalid_argument("l2_distance: grid mismatch");
  auto a = lhs.data();
  auto b = rhs.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
  const double dx = lhs.grid().spacing();
  return std::sqrt(sum * dx * dx);
}

}  // namespace lpw
