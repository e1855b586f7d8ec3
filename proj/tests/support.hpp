#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lpw/field.hpp"
#include "lpw/pilot_wave.hpp"

namespace lpw::testing {

inline double chi_square_p(double statistic, std::size_t dof) {
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

/// Goodness of fit of observed counts against expected counts. Bins with
/// expected < 5 are pooled into one extra bin (dropped if still below 5).
struct FitResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p = 1.0;
};

inline FitResult goodness_of_fit(const std::vector<double>& observed, const std::vector<double>& expected) {
  FitResult r;
  double pooled_o = 0.0, pooled_e = 0.0;
  std::size_t bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 5.0) {
      pooled_o += observed[i];
      pooled_e += expected[i];
      continue;
    }
    r.statistic += std::pow(observed[i] - expected[i], 2) / expected[i];
    ++bins;
  }
  if (pooled_e >= 5.0) {
    r.statistic += std::pow(pooled_o - pooled_e, 2) / pooled_e;
    ++bins;
  }
  r.dof = bins - 1;
  r.p = chi_square_p(r.statistic, r.dof);
  return r;
}

/// Expected counts in a square window split into bins x bins, for a sampler
/// that is uniform inside node-centered grid cells weighted by node density.
inline std::vector<double> binned_expectation(const SpinorField& field, double lo, double hi, std::size_t bins,
                                              double samples) {
  const GridSpec& g = field.grid();
  const std::size_t n = g.points();
  const double dx = g.spacing();
  const double w = (hi - lo) / static_cast<double>(bins);
  // fraction of node cell i (covering [x_i - dx/2, x_i + dx/2)) inside bin b; periodic images ignored
  auto overlap = [&](std::size_t i, std::size_t b) {
    const double c0 = g.coordinate(i) - 0.5 * dx, c1 = c0 + dx;
    const double b0 = lo + static_cast<double>(b) * w, b1 = b0 + w;
    return std::max(0.0, std::min(c1, b1) - std::max(c0, b0)) / dx;
  };
  std::vector<double> total(bins * bins, 0.0);
  double mass = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    for (std::size_t i2 = 0; i2 < n; ++i2) mass += field.density(i1, i2);
  }
  std::vector<std::vector<double>> frac(n, std::vector<double>(bins));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < bins; ++b) frac[i][b] = overlap(i, b);
  }
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const double m = field.density(i1, i2) / mass;
      if (m < 1e-300) continue;
      for (std::size_t b1 = 0; b1 < bins; ++b1) {
        if (frac[i1][b1] == 0.0) continue;
        for (std::size_t b2 = 0; b2 < bins; ++b2) total[b1 * bins + b2] += m * frac[i1][b1] * frac[i2][b2];
      }
    }
  }
  for (auto& t : total) t *= samples;
  // everything outside the window goes into a trailing bin
  total.push_back(samples - std::accumulate(total.begin(), total.end(), 0.0));
  return total;
}

inline std::vector<double> binned_counts(const std::vector<ParticleConfig>& configs, double lo, double hi,
                                         std::size_t bins) {
  std::vector<double> counts(bins * bins + 1, 0.0);
  const double w = (hi - lo) / static_cast<double>(bins);
  for (const auto& c : configs) {
    const double f1 = (c.x1 - lo) / w, f2 = (c.x2 - lo) / w;
    if (f1 < 0 || f2 < 0 || f1 >= static_cast<double>(bins) || f2 >= static_cast<double>(bins)) {
      counts.back() += 1;
    } else {
      counts[static_cast<std::size_t>(f1) * bins + static_cast<std::size_t>(f2)] += 1;
    }
  }
  return counts;
}

/// Product state χ1 ⊗ χ2 times Gaussians of position spread sigma at (c1, c2).
inline SpinorField product_state(const GridSpec& grid, std::array<Complex, 2> chi1, std::array<Complex, 2> chi2,
                                 double sigma, double c1, double c2) {
  SpinorField f(grid);
  const std::size_t n = grid.points();
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    const double d1 = periodic_delta(c1, grid.coordinate(i1), grid.length());
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const double d2 = periodic_delta(c2, grid.coordinate(i2), grid.length());
      const double env = std::exp(-(d1 * d1 + d2 * d2) / (4.0 * sigma * sigma));
      for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) f.at(s1, s2, i1, i2) = env * chi1[s1] * chi2[s2];
      }
    }
  }
  f.normalize();
  return f;
}

/// Marginal mean and variance of particle `particle` (1 or 2), periodic deltas around `center`.
inline std::pair<double, double> marginal_moments(const SpinorField& f, int particle, double center) {
  const GridSpec& g = f.grid();
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i1 = 0; i1 < g.points(); ++i1) {
    for (std::size_t i2 = 0; i2 < g.points(); ++i2) {
      const double d = periodic_delta(center, g.coordinate(particle == 1 ? i1 : i2), g.length());
      const double rho = f.density(i1, i2);
      m0 += rho;
      m1 += rho * d;
      m2 += rho * d * d;
    }
  }
  const double mean = m1 / m0;
  return {center + mean, m2 / m0 - mean * mean};
}

/// Mean momentum Im∫ψ*∂ψ / ∫|ψ|² of particle `particle`, fourth-order central differences.
inline double mean_momentum(const SpinorField& f, int particle) {
  const GridSpec& g = f.grid();
  const std::size_t n = g.points();
  const double dx = g.spacing();
  double num = 0, den = 0;
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
          auto at = [&](std::ptrdiff_t off) {
            const std::size_t j = (((particle == 1 ? i1 : i2) + n) + static_cast<std::size_t>(off + 2 * static_cast<std::ptrdiff_t>(n))) % n;
            return particle == 1 ? f.at(s1, s2, j, i2) : f.at(s1, s2, i1, j);
          };
          const Complex d = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * dx);
          const Complex psi = f.at(s1, s2, i1, i2);
          num += std::imag(std::conj(psi) * d);
          den += std::norm(psi);
        }
      }
    }
  }
  return num / den;
}

}  // namespace lpw::testing
