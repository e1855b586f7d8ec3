#pragma once

#include <array>
#include <numbers>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lpw/lattice.hpp"
#include "lpw/pilot_wave.hpp"
#include "lpw/singlet_oracle.hpp"

namespace lpw {

// ---- setting-selection policies ------------------------------------------

/// Fair coin per wing, drawn from a counter-based stream keyed by (seed, run).
struct IndependentUniform {
  std::uint64_t seed = 0;
};

/// Run r reads decimal digits offset+2r (wing 1) and offset+2r+1 (wing 2) of
/// π after the decimal point. With odd_selects_unprimed, an odd digit picks
/// the unprimed direction and an even digit the primed one.
struct PiDigits {
  std::size_t offset = 0;
  bool odd_selects_unprimed = true;
};

/// Cycles through a fixed list of quad corners.
struct FixedList {
  std::vector<PairIndex> pairs;
};

/// Settings computed from the content of designated apparatus cells of the
/// run's own lattice: wing 1 from bit 0 of the wing-1 cell digest, wing 2
/// from bit 1 of the wing-2 cell digest.
struct LatticeDerived {
  std::size_t wing1_cell = 1;
  std::size_t wing2_cell = 6;
};

using SettingPolicy = std::variant<IndependentUniform, PiDigits, FixedList, LatticeDerived>;

std::string describe(const SettingPolicy& policy);

/// Throws std::invalid_argument for LatticeDerived without a context lattice,
/// an empty FixedList, or apparatus cells outside the ring.
PairIndex choose_settings(const SettingPolicy& policy, std::size_t run_index,
                          const LatticeState* context = nullptr);

/// The LatticeDerived rule applied to precomputed cell digests.
PairIndex settings_from_digests(std::uint64_t wing1_digest, std::uint64_t wing2_digest);

/// First `count` decimal digits of π after the decimal point ("14159...").
std::string pi_digits(std::size_t count);

// ---- ensembles -----------------------------------------------------------

enum class ModelKind { QuantumOracle, PilotWave, Lpw, Lhv };

std::string to_string(ModelKind kind);

struct EngineParams {
  GridSpec grid{256, 64.0};
  PhysicalConstants constants;
  MeasurementSchedule schedule = MeasurementSchedule::standard();
  double dt = 0.02;
  std::size_t lattice_cells = 8;
};

struct ModelSpec {
  ModelKind kind = ModelKind::QuantumOracle;
  EngineParams engine;
  std::optional<StrategyMixture> mixture;
};

/// One experimental run. `lambda` is the configuration sampled when the pair
/// was created (for lhv runs x1 carries the strategy number and x2 is 0).
struct EnsembleRecord {
  std::size_t run_id = 0;
  PairIndex pair;
  double alpha = 0.0;
  double beta = 0.0;
  OutcomePair outcome;
  ParticleConfig lambda;
  std::uint64_t seed = 0;
  bool flagged = false;
};

struct RunLedger {
  ModelKind model = ModelKind::QuantumOracle;
  ChshQuad quad;
  std::string policy;
  std::uint64_t master_seed = 0;
  double domain_length = 0.0;
  std::vector<EnsembleRecord> records;
};

/// Runs n_runs pairs through the model. Pilot-wave and lattice runs that
/// share a setting pair share one field evolution; every run keeps its own
/// Born-sampled configuration. Model/policy mismatches throw before any run.
RunLedger run_bell_ensemble(const ModelSpec& model, const ChshQuad& quad, const SettingPolicy& policy,
                            std::size_t n_runs, std::uint64_t master_seed);

/// Sign read from the lattice mass density: +1 (−1) when every cell populated
/// by `particle` lies above (below) the midpoint, nullopt when no cell is
/// populated or the populated cells straddle it.
std::optional<int> lattice_readout(const MassDensity& density, const RingSpec& ring, int particle);

// ---- statistics ----------------------------------------------------------

struct PairEstimate {
  PairIndex pair;
  CorrelatorEstimate estimate;
};

enum class Verdict { BelowBound, ViolatesBound };

struct ChshReport {
  std::array<PairEstimate, 4> pairs;
  double s = 0.0;
  double s_std_error = 0.0;
  double local_bound = 2.0;
  double quantum_value = 2.0 * std::numbers::sqrt2;
  std::size_t flagged = 0;
  /// ViolatesBound when S − 3·stderr exceeds the local bound.
  Verdict verdict = Verdict::BelowBound;
};

/// Needs ≥ 30 unflagged runs per quad corner.
ChshReport chsh_report(const RunLedger& ledger);

struct SiTestReport {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t n_bins = 0;
  std::size_t rows = 0;
  std::size_t columns = 0;
  std::string binning;
};

/// Chi-square independence test between binned λ positions and setting pairs.
/// Adjacent sparse bins are merged until every expected count is ≥ 5.
SiTestReport si_test(const RunLedger& ledger, std::size_t n_bins);

}  // namespace lpw
