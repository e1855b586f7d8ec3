#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lpw {

using Complex = std::complex<double>;

/// Uniform periodic grid on [0, L) shared by both particle coordinates.
class GridSpec {
 public:
  /// Throws std::invalid_argument unless points is a power of two ≥ 32 and length > 0.
  GridSpec(std::size_t points_per_axis, double domain_length);

  std::size_t points() const { return points_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(points_); }
  double midpoint() const { return 0.5 * length_; }
  double coordinate(std::size_t i) const { return static_cast<double>(i) * spacing(); }

  /// Maps any real position into [0, L).
  double wrap(double x) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t points_;
  double length_;
};

/// Shortest signed arc from `from` to `to` on a ring of circumference L, in [−L/2, L/2).
double periodic_delta(double from, double to, double circumference);

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;
  friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

/// Positions of the two particles, each in [0, L).
struct ParticleConfig {
  double x1 = 0.0;
  double x2 = 0.0;
  friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;
};

enum Spin : int { Up = 0, Down = 1 };

/// Two-particle wave function with four spin components on a periodic
/// 2-D configuration grid.
///
/// Storage is four contiguous row-major N×N blocks, one per spin component
/// c = 2·s1 + s2; row index i1 runs over x1, column index i2 over x2.
class SpinorField {
 public:
  static constexpr int kComponents = 4;

  explicit SpinorField(GridSpec grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t points() const { return grid_.points(); }
  std::size_t plane_size() const { return grid_.points() * grid_.points(); }

  Complex& at(int s1, int s2, std::size_t i1, std::size_t i2) {
    return amps_[offset(2 * s1 + s2, i1, i2)];
  }
  const Complex& at(int s1, int s2, std::size_t i1, std::size_t i2) const {
    return amps_[offset(2 * s1 + s2, i1, i2)];
  }

  std::span<Complex> component(int c);
  std::span<const Complex> component(int c) const;
  std::span<Complex> data() { return amps_; }
  std::span<const Complex> data() const { return amps_; }

  /// Spin-summed density Σ_s |ψ_s|² at a grid node.
  double density(std::size_t i1, std::size_t i2) const;

  /// L² norm with the grid measure dx².
  double norm() const;
  void normalize();
  void scale(Complex factor);
  bool all_finite() const;

  /// Bit-for-bit equality of grid and amplitudes.
  friend bool operator==(const SpinorField& lhs, const SpinorField& rhs);

 private:
  std::size_t offset(int c, std::size_t i1, std::size_t i2) const {
    return (static_cast<std::size_t>(c) * grid_.points() + i1) * grid_.points() + i2;
  }

  GridSpec grid_;
  std::vector<Complex> amps_;
};

/// L² distance ‖lhs − rhs‖ with the grid measure. Grids must match.
double l2_distance(const SpinorField& lhs, const SpinorField& rhs);

}  // namespace lpw
