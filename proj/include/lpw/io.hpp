#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpw/bell_harness.hpp"
#include "lpw/lattice.hpp"
#include "lpw/pilot_wave.hpp"
#include "lpw/relaxation.hpp"

namespace lpw::io {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// CSV ---------------------------------------------------------------------

/// run_id,pair_a_index,pair_b_index,alpha,beta,A,B,lambda_x1,lambda_x2,seed,flagged
/// Records are written in run_id order.
void write_ledger_csv(std::ostream& out, const RunLedger& ledger);

/// run_id,t,x1,x2
void write_traces_csv(std::ostream& out, const std::vector<TrajectoryTrace>& traces);

/// run_id,A,B,flagged
void write_outcomes_csv(std::ostream& out, const std::vector<MeasurementOutcome>& outcomes);

/// t,cell_index,particle_index (one row per populated (cell, particle))
void write_density_trace_csv(std::ostream& out, const std::vector<DensitySample>& trace);

/// t,G_phi,G_z
void write_diagnostics_csv(std::ostream& out, const GradientDiagnostics& diagnostics);

// JSON --------------------------------------------------------------------

nlohmann::json to_json(const ChshQuad& quad);
nlohmann::json to_json(const ChshReport& report);
nlohmann::json to_json(const SiTestReport& report);

// Binary snapshots ----------------------------------------------------------
//
// Field snapshot, all integers and floats little-endian:
//   char[8]  magic "LPWFIELD"
//   uint32   format version (1)
//   uint32   points per axis N
//   float64  domain length L
//   float64  time t
//   body     4·N·N complex amplitudes as (re, im) float64 pairs, row-major
//            in (component c = 2·s1 + s2, i1, i2)
//
// Lattice snapshot:
//   char[8]  magic "LPWRING\0"
//   uint32   format version (1)
//   uint32   cell count M
//   float64  cell spacing Δ
//   float64  time t
//   per cell: one field snapshot (as above, t = lattice time), then z.x1, z.x2 as float64

struct FieldSnapshot {
  SpinorField field;
  double t = 0.0;
};

void write_field_snapshot(std::ostream& out, const SpinorField& field, double t);
FieldSnapshot read_field_snapshot(std::istream& in);

void write_lattice_snapshot(std::ostream& out, const LatticeState& lattice);
LatticeState read_lattice_snapshot(std::istream& in);

}  // namespace lpw::io
