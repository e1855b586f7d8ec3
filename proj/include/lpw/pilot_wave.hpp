#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpw/field.hpp"
#include "lpw/rng.hpp"
#include "lpw/singlet_oracle.hpp"

namespace lpw {

/// Raised when the evolving field stops being finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a velocity is requested where the density vanishes.
class NodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CouplingWindow {
  double on = 0.0;
  double off = 0.0;
};

/// Stern–Gerlach style measurement protocol: a top-hat coupling of strength
/// g on each wing during its window, then free flight until readout.
class MeasurementSchedule {
 public:
  /// Validates the windows and requires the two outgoing branches of every
  /// wing to be at least five packet widths apart at readout.
  static MeasurementSchedule create(double coupling_strength, CouplingWindow wing1,
                                    CouplingWindow wing2, double readout_time,
                                    double packet_width, const PhysicalConstants& constants);

  /// Wing 1 coupled on [0, 0.5], wing 2 on [0.5, 1], readout at t = 11,
  /// g = 3.2 and σ0 = 2 (units with ħ = m = 1).
  static MeasurementSchedule standard(const PhysicalConstants& constants = {});

  double coupling_strength() const { return coupling_; }
  CouplingWindow window(int wing) const { return wing == 1 ? wing1_ : wing2_; }
  double readout_time() const { return readout_time_; }
  double packet_width() const { return packet_width_; }

  /// ∫ g_wing(t) dt over [t0, t1].
  double impulse(int wing, double t0, double t1) const;

  /// Free-spreading position spread sqrt(σ0² + (ħt / 2mσ0)²).
  double packet_width_at(double t, const PhysicalConstants& constants) const;

  /// Distance between the centers of a wing's two branches at readout.
  double branch_separation(int wing, const PhysicalConstants& constants) const;

 private:
  MeasurementSchedule() = default;

  double coupling_ = 0.0;
  CouplingWindow wing1_;
  CouplingWindow wing2_;
  double readout_time_ = 0.0;
  double packet_width_ = 0.0;
};

/// Everything the Hamiltonian needs besides the field itself.
struct MeasurementDynamics {
  PhysicalConstants constants;
  SettingPair settings;
  MeasurementSchedule schedule = MeasurementSchedule::standard();
};

/// Singlet spin state times a normalized periodic Gaussian of position
/// spread σ0 in each coordinate, centered on the domain midpoint.
/// Requires 4·dx ≤ σ0 ≤ L/16.
SpinorField prepare_singlet_state(const GridSpec& grid, double sigma0);

/// Largest dt whose highest-wavenumber kinetic phase stays below π.
double stability_limit(const GridSpec& grid, const PhysicalConstants& constants);

/// Advances the field from t to t + dt under
///   H = −(ħ²/2m)(∂²₁ + ∂²₂) − g₁(t)(x₁ − L/2)(a·σ¹) − g₂(t)(x₂ − L/2)(b·σ²)
/// with a symmetric split: coupling over [t, t+dt/2], exact kinetic
/// propagation in Fourier space, coupling over [t+dt/2, t+dt]. The coupling
/// factors integrate g exactly, so window edges need not align with steps.
void evolve_step(SpinorField& field, const MeasurementDynamics& dynamics, double t, double dt);
SpinorField evolve_step(const SpinorField& field, const MeasurementDynamics& dynamics, double t,
                        double dt);

struct Velocity {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// Field values and spectral gradients at every node, laid out for
/// bilinear interpolation at arbitrary configurations.
class GuidingField {
 public:
  GuidingField(const SpinorField& field, const PhysicalConstants& constants);

  /// v_k = (ħ/m)·Im[Σ_s ψ*_s ∂_k ψ_s] / Σ_s |ψ_s|² at the interpolated point.
  /// Throws NodeError where the interpolated density is below the floor.
  Velocity at(const ParticleConfig& config) const;

  static constexpr double kDensityFloor = 1e-250;

 private:
  struct Node {
    Complex psi[4];
    Complex d1[4];
    Complex d2[4];
  };

  GridSpec grid_;
  double hbar_over_mass_;
  std::vector<Node> nodes_;
};

Velocity guiding_velocity(const SpinorField& field, const ParticleConfig& config,
                          const PhysicalConstants& constants);

/// Draws configurations from the spin-summed density: a categorical draw
/// over grid cells (centered on nodes) weighted by cell mass, then a uniform
/// jitter inside the chosen cell.
class BornSampler {
 public:
  explicit BornSampler(const SpinorField& field);
  ParticleConfig sample(RngStream& rng) const;

 private:
  GridSpec grid_;
  std::vector<double> cumulative_;
};

ParticleConfig born_sample(const SpinorField& field, RngStream& rng);

/// A field together with the configurations it guides.
///
/// Each step evolves the field by two half steps and moves every
/// configuration with classical RK4, re-evaluating the guiding field at
/// t, t + dt/2 and t + dt. The guiding field at the end of a step is reused
/// as the start of the next one.
class PilotWaveSystem {
 public:
  PilotWaveSystem(SpinorField field, std::vector<ParticleConfig> configs, double t = 0.0);

  void step(const MeasurementDynamics& dynamics, double dt);

  const SpinorField& field() const { return field_; }
  /// Mutable access drops the cached guiding field.
  SpinorField& field() {
    guide_.reset();
    return field_;
  }
  std::span<const ParticleConfig> configs() const { return configs_; }
  std::span<ParticleConfig> configs() { return configs_; }
  double time() const { return t_; }
  /// Moves the clock without evolving anything (used when internal dynamics are switched off).
  void set_time(double t) { t_ = t; }

  /// Configurations whose integration hit a density node are frozen and
  /// reported here instead of aborting the whole system.
  const std::vector<bool>& stalled() const { return stalled_; }

 private:
  SpinorField field_;
  std::vector<ParticleConfig> configs_;
  std::vector<bool> stalled_;
  double t_;
  std::optional<GuidingField> guide_;
};

struct TrajectoryPoint {
  double t = 0.0;
  ParticleConfig config;
};
using TrajectoryTrace = std::vector<TrajectoryPoint>;

struct MeasurementOutcome {
  OutcomePair outcome;
  bool flagged = false;
};

struct MeasurementRun {
  std::vector<MeasurementOutcome> outcomes;
  std::size_t flagged = 0;
  /// Subset of flagged runs whose trajectory hit a density node.
  std::size_t stalled = 0;
  std::vector<TrajectoryTrace> traces;
  std::vector<ParticleConfig> final_configs;
};

/// Readout rule: +1 when the particle sits in the upper half of the ring.
int readout_sign(double x, const GridSpec& grid);

/// True when x lies within `band` of the midpoint.
bool in_guard_band(double x, const GridSpec& grid, double band);

/// Evolves field0 once from t = 0 to the readout time while co-integrating
/// every configuration, then reads A and B from the final positions. Runs
/// ending within one packet width of the midpoint are flagged.
MeasurementRun run_measurement(const SpinorField& field0, const MeasurementDynamics& dynamics,
                               std::span<const ParticleConfig> configs, double dt,
                               bool record_traces = false);

struct CorrelatorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean of A·B with stderr = population standard deviation / √N.
CorrelatorEstimate estimate_correlator(std::span<const OutcomePair> outcomes);

}  // namespace lpw
