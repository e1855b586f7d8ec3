#include "lpw/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace lpw::io {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf.data(), end);
}

void write_ledger_csv(std::ostream& out, const RunLedger& ledger) {
  std::vector<const EnsembleRecord*> sorted;
  sorted.reserve(ledger.records.size());
  for (const auto& r : ledger.records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->run_id < b->run_id; });
  out << "run_id,pair_a_index,pair_b_index,alpha,beta,A,B,lambda_x1,lambda_x2,seed,flagged\n";
  for (const auto* r : sorted) {
    out << r->run_id << ',' << r->pair.a_index << ',' << r->pair.b_index << ',' << format_double(r->alpha) << ','
        << format_double(r->beta) << ',' << r->outcome.wing1 << ',' << r->outcome.wing2 << ','
        << format_double(r->lambda.x1) << ',' << format_double(r->lambda.x2) << ',' << r->seed << ','
        << (r->flagged ? 1 : 0) << '\n';
  }
}

void write_traces_csv(std::ostream& out, const std::vector<TrajectoryTrace>& traces) {
  out << "run_id,t,x1,x2\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& p : traces[i]) {
      out << i << ',' << format_double(p.t) << ',' << format_double(p.config.x1) << ','
          << format_double(p.config.x2) << '\n';
    }
  }
}

void write_outcomes_csv(std::ostream& out, const std::vector<MeasurementOutcome>& outcomes) {
  out << "run_id,A,B,flagged\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    out << i << ',' << outcomes[i].outcome.wing1 << ',' << outcomes[i].outcome.wing2 << ','
        << (outcomes[i].flagged ? 1 : 0) << '\n';
  }
}

void write_density_trace_csv(std::ostream& out, const std::vector<DensitySample>& trace) {
  out << "t,cell_index,particle_index\n";
  for (const auto& s : trace) {
    for (std::size_t x = 0; x < s.density.occupancy.size(); ++x) {
      for (int p : s.density.occupancy[x]) out << format_double(s.t) << ',' << x << ',' << p << '\n';
    }
  }
}

void write_diagnostics_csv(std::ostream& out, const GradientDiagnostics& diagnostics) {
  out << "t,G_phi,G_z\n";
  for (const auto& s : diagnostics.samples()) {
    out << format_double(s.t) << ',' << format_double(s.g_phi) << ',' << format_double(s.g_z) << '\n';
  }
}

nlohmann::json to_json(const ChshQuad& quad) {
  return {{"a", quad.a.radians()},
          {"a_prime", quad.a_prime.radians()},
          {"b", quad.b.radians()},
          {"b_prime", quad.b_prime.radians()}};
}

nlohmann::json to_json(const ChshReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"a_index", p.pair.a_index},
                     {"b_index", p.pair.b_index},
                     {"E_hat", p.estimate.value},
                     {"stderr", p.estimate.std_error},
                     {"count", p.estimate.count}});
  }
  return {{"pairs", pairs},
          {"S", report.s},
          {"S_stderr", report.s_std_error},
          {"local_bound", report.local_bound},
          {"quantum_value", report.quantum_value},
          {"flagged", report.flagged},
          {"verdict", report.verdict == Verdict::ViolatesBound ? "violates-bound" : "below-bound"}};
}

nlohmann::json to_json(const SiTestReport& report) {
  return {{"statistic", report.statistic}, {"dof", report.dof},   {"p_value", report.p_value},
          {"n_bins", report.n_bins},       {"rows", report.rows}, {"columns", report.columns},
          {"binning", report.binning}};
}

// ---- binary ----------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated snapshot");
  return v;
}

void expect_magic(std::istream& in, const char (&magic)[9]) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) throw std::runtime_error("bad snapshot magic");
}

}  // namespace

void write_field_snapshot(std::ostream& out, const SpinorField& field, double t) {
  out.write("LPWFIELD", 8);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.points()));
  put<double>(out, field.grid().length());
  put<double>(out, t);
  const auto data = field.data();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
}

FieldSnapshot read_field_snapshot(std::istream& in) {
  expect_magic(in, "LPWFIELD");
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported field snapshot version");
  const auto n = get<std::uint32_t>(in);
  const auto length = get<double>(in);
  const auto t = get<double>(in);
  FieldSnapshot snap{SpinorField(GridSpec(n, length)), t};
  auto data = snap.field.data();
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  if (!in) throw std::runtime_error("truncated field snapshot");
  return snap;
}

void write_lattice_snapshot(std::ostream& out, const LatticeState& lattice) {
  out.write("LPWRING\0", 8);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lattice.ring.cells()));
  put<double>(out, lattice.ring.spacing());
  put<double>(out, lattice.t);
  for (const auto& cell : lattice.cells) {
    write_field_snapshot(out, cell.phi, lattice.t);
    put<double>(out, cell.z.x1);
    put<double>(out, cell.z.x2);
  }
}

LatticeState read_lattice_snapshot(std::istream& in) {
  expect_magic(in, "LPWRING\0");
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported lattice snapshot version");
  const auto m = get<std::uint32_t>(in);
  const auto spacing = get<double>(in);
  const auto t = get<double>(in);
  LatticeState lattice{RingSpec(m, spacing), {}, t};
  lattice.cells.reserve(m);
  for (std::uint32_t x = 0; x < m; ++x) {
    auto snap = read_field_snapshot(in);
    const auto x1 = get<double>(in);
    const auto x2 = get<double>(in);
    lattice.cells.push_back({std::move(snap.field), {x1, x2}});
  }
  return lattice;
}

}  // namespace lpw::io
