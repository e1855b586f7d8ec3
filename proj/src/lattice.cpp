#include "lpw/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpw {

RingSpec::RingSpec(std::size_t cell_count, double spacing) : cells_(cell_count), spacing_(spacing) {
  if (cells_ < 2) throw std::invalid_argument("ring needs at least 2 cells");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw std::invalid_argument("ring spacing must be positive");
}

std::size_t RingSpec::cell_of(double position) const {
  const double c = circumference();
  double w = std::fmod(position, c);
  if (w < 0.0) w += c;
  if (w >= c) w = 0.0;
  if (w == 0.0) return 0;
  const auto idx = static_cast<std::size_t>(std::ceil(w / spacing_)) - 1;
  return std::min(idx, cells_ - 1);
}

std::size_t RingSpec::ring_distance(std::size_t a, std::size_t b) const {
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, cells_ - d);
}

void LatticeState::validate() const {
  if (cells.size() != ring.cells()) throw std::invalid_argument("lattice cell count does not match ring");
  const GridSpec& g = grid();
  if (std::abs(ring.circumference() - g.length()) > 1e-12 * g.length()) {
    throw std::invalid_argument("ring circumference must equal the internal domain length");
  }
  for (std::size_t x = 0; x < cells.size(); ++x) {
    if (!(cells[x].phi.grid() == g)) throw std::invalid_argument("cells must share one internal grid");
    if (std::abs(cells[x].phi.norm() - 1.0) > 1e-10) {
      throw std::invalid_argument("cell " + std::to_string(x) + " is not normalized");
    }
  }
}

LatticeState init_homogeneous(const CellState& cell, const RingSpec& ring) {
  const GridSpec& g = cell.phi.grid();
  CellState copy{cell.phi, {g.wrap(cell.z.x1), g.wrap(cell.z.x2)}};
  LatticeState lattice{ring, std::vector<CellState>(ring.cells(), copy), 0.0};
  lattice.validate();
  return lattice;
}

LatticeState init_generic(const RingSpec& ring, const GridSpec& grid, RngStream& rng) {
  constexpr int kTerms = 3;
  const std::size_t n = grid.points();
  const double length = grid.length();
  const double width_lo = std::max(4.0 * grid.spacing(), length / 32.0);
  const double width_hi = length / 16.0;

  std::vector<CellState> cells;
  cells.reserve(ring.cells());
  for (std::size_t x = 0; x < ring.cells(); ++x) {
    SpinorField phi(grid);
    for (int term = 0; term < kTerms; ++term) {
      const double c1 = length * (0.25 + 0.5 * rng.uniform());
      const double c2 = length * (0.25 + 0.5 * rng.uniform());
      const double w1 = width_lo + (width_hi - width_lo) * rng.uniform();
      const double w2 = width_lo + (width_hi - width_lo) * rng.uniform();
      const Complex coeff = std::polar(0.5 + 0.5 * rng.uniform(), kTwoPi * rng.uniform());
      std::array<Complex, 4> spinor;
      for (auto& s : spinor) s = Complex{rng.normal(), rng.normal()};
      std::vector<double> g1(n), g2(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double d1 = periodic_delta(c1, grid.coordinate(i), length);
        const double d2 = periodic_delta(c2, grid.coordinate(i), length);
        g1[i] = std::exp(-d1 * d1 / (4.0 * w1 * w1));
        g2[i] = std::exp(-d2 * d2 / (4.0 * w2 * w2));
      }
      for (int c = 0; c < SpinorField::kComponents; ++c) {
        auto plane = phi.component(c);
        const Complex a = coeff * spinor[c];
        for (std::size_t i1 = 0; i1 < n; ++i1) {
          for (std::size_t i2 = 0; i2 < n; ++i2) plane[i1 * n + i2] += a * g1[i1] * g2[i2];
        }
      }
    }
    phi.normalize();
    const ParticleConfig z = BornSampler(phi).sample(rng);
    cells.push_back({std::move(phi), z});
  }
  LatticeState lattice{ring, std::move(cells), 0.0};
  lattice.validate();
  return lattice;
}

LatticeState evolve_lattice(LatticeState lattice, const MeasurementDynamics& dynamics, double dt,
                            EvolutionMode mode, std::size_t steps, const LatticeObserver& observer) {
  const std::size_t m = lattice.cells.size();
  std::vector<ParticleConfig> view(m);

  if (mode == EvolutionMode::Fast) {
    const auto report = check_homogeneity(lattice, 1e-12);
    if (!report.pass) {
      std::ostringstream msg;
      msg << "fast evolution requires a homogeneous lattice (grad_phi_max = " << report.grad_phi_max
          << ", grad_z_max = " << report.grad_z_max << ")";
      throw std::invalid_argument(msg.str());
    }
    PilotWaveSystem system(std::move(lattice.cells.front().phi), {lattice.cells.front().z}, lattice.t);
    for (std::size_t s = 0; s < steps; ++s) {
      system.step(dynamics, dt);
      if (observer) {
        std::fill(view.begin(), view.end(), system.configs()[0]);
        observer(system.time(), view);
      }
    }
    CellState evolved{system.field(), system.configs()[0]};
    lattice.t = system.time();
    for (auto& cell : lattice.cells) cell = evolved;
    return lattice;
  }

  std::vector<PilotWaveSystem> systems;
  systems.reserve(m);
  for (auto& cell : lattice.cells) systems.emplace_back(std::move(cell.phi), std::vector{cell.z}, lattice.t);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t x = 0; x < m; ++x) {
      systems[x].step(dynamics, dt);
      view[x] = systems[x].configs()[0];
    }
    if (observer) observer(systems.front().time(), view);
  }
  for (std::size_t x = 0; x < m; ++x) {
    lattice.cells[x] = {std::move(systems[x].field()), systems[x].configs()[0]};
  }
  lattice.t = systems.front().time();
  return lattice;
}

MassDensity mass_density(const RingSpec& ring, std::span<const ParticleConfig> cell_configs,
                         std::array<double, 2> masses) {
  if (cell_configs.size() != ring.cells()) throw std::invalid_argument("one configuration per cell expected");
  MassDensity rho{std::vector<std::vector<int>>(ring.cells()), masses};
  for (std::size_t x = 0; x < ring.cells(); ++x) {
    if (ring.cell_of(cell_configs[x].x1) == x) rho.occupancy[x].push_back(1);
    if (ring.cell_of(cell_configs[x].x2) == x) rho.occupancy[x].push_back(2);
  }
  return rho;
}

MassDensity mass_density(const LatticeState& lattice) {
  std::vector<ParticleConfig> z;
  z.reserve(lattice.cells.size());
  for (const auto& c : lattice.cells) z.push_back(c.z);
  return mass_density(lattice.ring, z);
}

HomogeneityReport check_homogeneity(const LatticeState& lattice, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  HomogeneityReport report;
  const std::size_t m = lattice.cells.size();
  const double length = lattice.grid().length();
  for (std::size_t x = 0; x < m; ++x) {
    const CellState& a = lattice.cells[x];
    const CellState& b = lattice.cells[(x + 1) % m];
    report.grad_phi_max = std::max(report.grad_phi_max, l2_distance(b.phi, a.phi));
    report.grad_z_max = std::max({report.grad_z_max, std::abs(periodic_delta(a.z.x1, b.z.x1, length)),
                                  std::abs(periodic_delta(a.z.x2, b.z.x2, length))});
    ++report.pairs;
  }
  report.pass = report.grad_phi_max <= epsilon && report.grad_z_max <= epsilon;
  return report;
}

std::size_t compare_to_reference(std::span<const DensitySample> lattice_trace,
                                 const TrajectoryTrace& reference_trace, const RingSpec& ring) {
  if (lattice_trace.size() != reference_trace.size()) {
    throw std::invalid_argument("lattice and reference traces have different lengths");
  }
  std::size_t worst = 0;
  for (std::size_t k = 0; k < lattice_trace.size(); ++k) {
    const double tl = lattice_trace[k].t;
    const double tr = reference_trace[k].t;
    if (std::abs(tl - tr) > 1e-12 * std::max(1.0, std::abs(tr))) {
      std::ostringstream msg;
      msg << "timestamp mismatch at sample " << k << ": lattice t = " << tl << ", reference t = " << tr;
      throw std::invalid_argument(msg.str());
    }
    const auto& occ = lattice_trace[k].density.occupancy;
    if (occ.size() != ring.cells()) throw std::invalid_argument("density does not match ring");
    for (int particle : {1, 2}) {
      const ParticleConfig& ref = reference_trace[k].config;
      const std::size_t target = ring.cell_of(particle == 1 ? ref.x1 : ref.x2);
      bool present = false;
      for (std::size_t x = 0; x < occ.size(); ++x) {
        if (std::find(occ[x].begin(), occ[x].end(), particle) != occ[x].end()) {
          present = true;
          worst = std::max(worst, ring.ring_distance(x, target));
        }
      }
      if (!present) worst = std::max(worst, ring.cells() / 2);
    }
  }
  return worst;
}

void CellDigest::add_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash_ ^= p[i];
    hash_ *= 0x100000001b3ull;
  }
}

void CellDigest::add_field(const SpinorField& phi) {
  const auto data = phi.data();
  add_bytes(data.data(), data.size_bytes());
}

void CellDigest::add_config(const ParticleConfig& z) {
  add_bytes(&z.x1, sizeof z.x1);
  add_bytes(&z.x2, sizeof z.x2);
}

std::uint64_t cell_digest(const CellState& cell) {
  CellDigest d;
  d.add_field(cell.phi);
  d.add_config(cell.z);
  return d.value();
}

SharedFieldEnsemble::SharedFieldEnsemble(RingSpec ring, SpinorField phi,
                                         std::vector<ParticleConfig> cell_configs, double t)
    : ring_(ring), runs_(cell_configs.size() / ring.cells()), system_(std::move(phi), std::move(cell_configs), t) {
  if (system_.configs().size() % ring_.cells() != 0 || runs_ == 0) {
    throw std::invalid_argument("ensemble needs a positive multiple of M configurations");
  }
  if (std::abs(ring_.circumference() - system_.field().grid().length()) > 1e-12 * ring_.circumference()) {
    throw std::invalid_argument("ring circumference must equal the internal domain length");
  }
}

SharedFieldEnsemble SharedFieldEnsemble::homogeneous(RingSpec ring, SpinorField phi,
                                                     std::span<const ParticleConfig> run_templates) {
  std::vector<ParticleConfig> z;
  z.reserve(run_templates.size() * ring.cells());
  for (const auto& tmpl : run_templates) z.insert(z.end(), ring.cells(), tmpl);
  return SharedFieldEnsemble(ring, std::move(phi), std::move(z));
}

std::span<const ParticleConfig> SharedFieldEnsemble::cells(std::size_t run) const {
  return system_.configs().subspan(run * ring_.cells(), ring_.cells());
}

std::span<ParticleConfig> SharedFieldEnsemble::cells(std::size_t run) {
  return system_.configs().subspan(run * ring_.cells(), ring_.cells());
}

bool SharedFieldEnsemble::stalled(std::size_t run) const {
  const auto& flags = system_.stalled();
  return std::any_of(flags.begin() + static_cast<std::ptrdiff_t>(run * ring_.cells()),
                     flags.begin() + static_cast<std::ptrdiff_t>((run + 1) * ring_.cells()),
                     [](bool b) { return b; });
}

void SharedFieldEnsemble::step(const MeasurementDynamics& dynamics, double dt) { system_.step(dynamics, dt); }

LatticeState SharedFieldEnsemble::materialize(std::size_t run) const {
  std::vector<CellState> cells_out;
  cells_out.reserve(ring_.cells());
  for (const auto& z : cells(run)) cells_out.push_back({system_.field(), z});
  return {ring_, std::move(cells_out), system_.time()};
}

}  // namespace lpw
