#pragma once

#include <vector>

#include "lpw/lattice.hpp"

namespace lpw {

/// Diffusive coupling between neighboring cells.
///
/// The wave-function field diffuses with coefficient κ/ħ and the
/// configuration field with κ. The explicit step is stable for κ·dt/Δ² ≤ 1/4.
struct RelaxationParams {
  double kappa = 0.0;
  double dt = 0.0;
  bool internal_dynamics = true;
  bool renormalize_cells = true;

  /// Throws std::invalid_argument on κ < 0, dt ≤ 0 or a violated stability bound.
  void validate(const RingSpec& ring) const;
  double diffusion_number(const RingSpec& ring) const;
};

struct GradientNorms {
  double g_phi = 0.0;
  double g_z = 0.0;
};

struct GradientSample {
  double t = 0.0;
  double g_phi = 0.0;
  double g_z = 0.0;
};

class GradientDiagnostics {
 public:
  /// Times must increase strictly; values must be nonnegative.
  void record(double t, GradientNorms norms);
  const std::vector<GradientSample>& samples() const { return samples_; }

 private:
  std::vector<GradientSample> samples_;
};

/// One Strang step: half a step of per-cell internal dynamics, a full
/// explicit diffusion step across cells (periodic Laplacian on Φ per internal
/// grid point and on Z via shortest-arc differences), then the other half
/// step. Cells are renormalized after diffusion when requested. With κ = 0
/// the diffusion step is the identity and is skipped.
///
/// Throws NumericalError when a cell norm leaves [0.5, 2] before renormalization.
LatticeState relax_step(LatticeState lattice, const RelaxationParams& params,
                        const MeasurementDynamics& dynamics);

/// The same step for an ensemble whose field is homogeneous, where the field
/// Laplacian vanishes identically; only Z diffuses, per run.
void relax_step(SharedFieldEnsemble& ensemble, const RelaxationParams& params,
                const MeasurementDynamics& dynamics);

/// G_phi = Σ_edges ‖Φ_{x+1} − Φ_x‖², G_z = Σ_edges (Δz₁² + Δz₂²), periodic differences.
GradientNorms gradient_norms(const LatticeState& lattice);
GradientNorms gradient_norms(const SharedFieldEnsemble& ensemble, std::size_t run);

enum class GradientSeries { Phi, Z };

/// Decay rate −d(log G)/dt by least squares over samples with t in [t_begin, t_end].
/// Needs at least 10 samples, all positive.
double decay_rate_fit(const GradientDiagnostics& diagnostics, double t_begin, double t_end,
                      GradientSeries series);

}  // namespace lpw
