#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lpw/field.hpp"
#include "lpw/pilot_wave.hpp"
#include "lpw/rng.hpp"

namespace lpw {

/// Ring of M physical cells of width Δ. Cell x covers (xΔ, (x+1)Δ] and is
/// centered at (x + 1/2)Δ; the point 0 belongs to cell 0. Boundary points
/// therefore always go to the lower-index neighbor.
class RingSpec {
 public:
  RingSpec(std::size_t cell_count, double spacing);

  std::size_t cells() const { return cells_; }
  double spacing() const { return spacing_; }
  double circumference() const { return spacing_ * static_cast<double>(cells_); }
  double cell_center(std::size_t x) const { return (static_cast<double>(x) + 0.5) * spacing_; }
  std::size_t cell_of(double position) const;
  std::size_t ring_distance(std::size_t a, std::size_t b) const;

  friend bool operator==(const RingSpec&, const RingSpec&) = default;

 private:
  std::size_t cells_;
  double spacing_;
};

/// One cell's complete internal two-particle pilot-wave system.
struct CellState {
  SpinorField phi;
  ParticleConfig z;

  friend bool operator==(const CellState&, const CellState&) = default;
};

struct LatticeState {
  RingSpec ring;
  std::vector<CellState> cells;
  double t = 0.0;

  const GridSpec& grid() const { return cells.front().phi.grid(); }

  /// Checks the shared internal grid, the ring/grid identification and the
  /// per-cell normalization; throws std::invalid_argument on violation.
  void validate() const;
};

/// Which internal particles (1 and/or 2) put mass into each physical cell.
struct MassDensity {
  std::vector<std::vector<int>> occupancy;
  std::array<double, 2> masses{1.0, 1.0};

  friend bool operator==(const MassDensity&, const MassDensity&) = default;
};

struct HomogeneityReport {
  double grad_phi_max = 0.0;
  double grad_z_max = 0.0;
  std::size_t pairs = 0;
  bool pass = false;
};

/// Every cell a copy of the template.
LatticeState init_homogeneous(const CellState& cell, const RingSpec& ring);

/// Independent random cells: each phi is a normalized superposition of three
/// Gaussian product packets with random centers, widths, phases and spinors;
/// each z is drawn from that cell's |phi|².
LatticeState init_generic(const RingSpec& ring, const GridSpec& grid, RngStream& rng);

enum class EvolutionMode { Faithful, Fast };

/// Receives the time and every cell's configuration after each step.
using LatticeObserver = std::function<void(double t, std::span<const ParticleConfig> cell_configs)>;

/// Advances every cell by `steps` steps of size dt with no cross-cell
/// coupling. Faithful evolves each cell on its own; Fast evolves cell 0 and
/// copies it, and requires check_homogeneity(ε = 1e-12) to pass.
LatticeState evolve_lattice(LatticeState lattice, const MeasurementDynamics& dynamics, double dt,
                            EvolutionMode mode, std::size_t steps = 1,
                            const LatticeObserver& observer = {});

/// Cell x holds particle i iff cell x's own internal coordinate W_x^i lies in cell x.
MassDensity mass_density(const LatticeState& lattice);
MassDensity mass_density(const RingSpec& ring, std::span<const ParticleConfig> cell_configs,
                         std::array<double, 2> masses = {1.0, 1.0});

/// Discrete neighbor differences over all M edges of the ring (the wrap edge included).
HomogeneityReport check_homogeneity(const LatticeState& lattice, double epsilon);

struct DensitySample {
  double t = 0.0;
  MassDensity density;
};

/// Largest ring distance, over all times and both particles, between the
/// cell the reference trajectory occupies and any cell the lattice populates
/// with that particle. A particle missing from the lattice counts as ⌊M/2⌋.
std::size_t compare_to_reference(std::span<const DensitySample> lattice_trace,
                                 const TrajectoryTrace& reference_trace, const RingSpec& ring);

/// FNV-1a digest of a cell's raw content (field amplitudes, then z).
class CellDigest {
 public:
  void add_field(const SpinorField& phi);
  void add_config(const ParticleConfig& z);
  std::uint64_t value() const { return hash_; }

 private:
  void add_bytes(const void* data, std::size_t size);
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

std::uint64_t cell_digest(const CellState& cell);

/// A batch of lattice universes that share one homogeneous wave-function
/// field; only the per-cell configurations differ between runs and cells.
///
/// Because the field is identical in every cell of every run, one field
/// evolution serves all of them. Stepping a one-run ensemble is bit-identical
/// to faithful evolve_lattice on the materialized lattice.
class SharedFieldEnsemble {
 public:
  /// cell_configs holds runs × M configurations, run-major.
  SharedFieldEnsemble(RingSpec ring, SpinorField phi, std::vector<ParticleConfig> cell_configs,
                      double t = 0.0);

  /// One homogeneous universe per template configuration.
  static SharedFieldEnsemble homogeneous(RingSpec ring, SpinorField phi,
                                         std::span<const ParticleConfig> run_templates);

  const RingSpec& ring() const { return ring_; }
  std::size_t runs() const { return runs_; }
  double time() const { return system_.time(); }
  const SpinorField& field() const { return system_.field(); }
  SpinorField& field() { return system_.field(); }

  std::span<const ParticleConfig> cells(std::size_t run) const;
  std::span<ParticleConfig> cells(std::size_t run);
  bool stalled(std::size_t run) const;

  void step(const MeasurementDynamics& dynamics, double dt);
  void set_time(double t) { system_.set_time(t); }

  LatticeState materialize(std::size_t run) const;

 private:
  RingSpec ring_;
  std::size_t runs_;
  PilotWaveSystem system_;
};

}  // namespace lpw
