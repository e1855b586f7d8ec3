#include "lpw/relaxation.hpp"

#include <cmath>
#include <sstream>

namespace lpw {

namespace {

void check_norm(double norm, std::size_t cell) {
  if (!(norm >= 0.5 && norm <= 2.0)) {
    std::ostringstream msg;
    msg << "relaxation unstable: cell " << cell << " norm " << norm << " left [0.5, 2] after diffusion";
    throw NumericalError(msg.str());
  }
}

ParticleConfig diffuse_config(const ParticleConfig& left, const ParticleConfig& self,
                              const ParticleConfig& right, double r, const GridSpec& grid) {
  const double l = grid.length();
  const double lap1 = periodic_delta(self.x1, right.x1, l) - periodic_delta(left.x1, self.x1, l);
  const double lap2 = periodic_delta(self.x2, right.x2, l) - periodic_delta(left.x2, self.x2, l);
  return {grid.wrap(self.x1 + r * lap1), grid.wrap(self.x2 + r * lap2)};
}

}  // namespace

double RelaxationParams::diffusion_number(const RingSpec& ring) const {
  return kappa * dt / (ring.spacing() * ring.spacing());
}

void RelaxationParams::validate(const RingSpec& ring) const {
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("relaxation dt must be positive");
  const double r = diffusion_number(ring);
  if (r > 0.25) {
    std::ostringstream msg;
    msg << "kappa*dt/spacing^2 = " << r << " exceeds the explicit stability bound 1/4";
    throw std::invalid_argument(msg.str());
  }
}

void GradientDiagnostics::record(double t, GradientNorms norms) {
  if (!samples_.empty() && !(t > samples_.back().t)) {
    throw std::invalid_argument("diagnostic times must increase strictly");
  }
  if (!(norms.g_phi >= 0.0) || !(norms.g_z >= 0.0)) throw std::invalid_argument("gradient norms must be nonnegative");
  samples_.push_back({t, norms.g_phi, norms.g_z});
}

LatticeState relax_step(LatticeState lattice, const RelaxationParams& params,
                        const MeasurementDynamics& dynamics) {
  params.validate(lattice.ring);
  const double t0 = lattice.t;
  const double half = 0.5 * params.dt;
  if (params.internal_dynamics) lattice = evolve_lattice(std::move(lattice), dynamics, half, EvolutionMode::Faithful);

  if (params.kappa != 0.0) {
    const std::size_t m = lattice.cells.size();
    const GridSpec grid = lattice.grid();
    const double r_z = params.diffusion_number(lattice.ring);
    const double r_phi = r_z / dynamics.constants.hbar;
    const std::vector<CellState> before = lattice.cells;
    for (std::size_t x = 0; x < m; ++x) {
      const CellState& left = before[(x + m - 1) % m];
      const CellState& self = before[x];
      const CellState& right = before[(x + 1) % m];
      auto out = lattice.cells[x].phi.data();
      auto l = left.phi.data();
      auto c = self.phi.data();
      auto rr = right.phi.data();
      for (std::size_t i = 0; i < out.size(); ++i) {
        const Complex lap = (rr[i] - c[i]) - (c[i] - l[i]);
        if (lap != Complex{}) out[i] = c[i] + r_phi * lap;
      }
      check_norm(lattice.cells[x].phi.norm(), x);
      if (params.renormalize_cells) lattice.cells[x].phi.normalize();
      lattice.cells[x].z = diffuse_config(left.z, self.z, right.z, r_z, grid);
    }
  }

  if (params.internal_dynamics) {
    lattice = evolve_lattice(std::move(lattice), dynamics, half, EvolutionMode::Faithful);
  } else {
    lattice.t = t0 + params.dt;
  }
  return lattice;
}

void relax_step(SharedFieldEnsemble& ensemble, const RelaxationParams& params,
                const MeasurementDynamics& dynamics) {
  params.validate(ensemble.ring());
  const double t0 = ensemble.time();
  const double half = 0.5 * params.dt;
  if (params.internal_dynamics) ensemble.step(dynamics, half);

  if (params.kappa != 0.0) {
    check_norm(ensemble.field().norm(), 0);
    if (params.renormalize_cells) ensemble.field().normalize();
    const GridSpec grid = ensemble.field().grid();
    const double r_z = params.diffusion_number(ensemble.ring());
    const std::size_t m = ensemble.ring().cells();
    for (std::size_t run = 0; run < ensemble.runs(); ++run) {
      auto cells = ensemble.cells(run);
      const std::vector<ParticleConfig> before(cells.begin(), cells.end());
      for (std::size_t x = 0; x < m; ++x) {
        cells[x] = diffuse_config(before[(x + m - 1) % m], before[x], before[(x + 1) % m], r_z, grid);
      }
    }
  }

  if (params.internal_dynamics) {
    ensemble.step(dynamics, half);
  } else {
    ensemble.set_time(t0 + params.dt);
  }
}

GradientNorms gradient_norms(const LatticeState& lattice) {
  GradientNorms g;
  const std::size_t m = lattice.cells.size();
  const double l = lattice.grid().length();
  for (std::size_t x = 0; x < m; ++x) {
    const CellState& a = lattice.cells[x];
    const CellState& b = lattice.cells[(x + 1) % m];
    const double d = l2_distance(b.phi, a.phi);
    g.g_phi += d * d;
    const double d1 = periodic_delta(a.z.x1, b.z.x1, l);
    const double d2 = periodic_delta(a.z.x2, b.z.x2, l);
    g.g_z += d1 * d1 + d2 * d2;
  }
  return g;
}

GradientNorms gradient_norms(const SharedFieldEnsemble& ensemble, std::size_t run) {
  GradientNorms g;
  const auto cells = ensemble.cells(run);
  const std::size_t m = cells.size();
  const double l = ensemble.field().grid().length();
  for (std::size_t x = 0; x < m; ++x) {
    const double d1 = periodic_delta(cells[x].x1, cells[(x + 1) % m].x1, l);
    const double d2 = periodic_delta(cells[x].x2, cells[(x + 1) % m].x2, l);
    g.g_z += d1 * d1 + d2 * d2;
  }
  return g;
}

double decay_rate_fit(const GradientDiagnostics& diagnostics, double t_begin, double t_end,
                      GradientSeries series) {
  std::vector<double> ts, ys;
  for (const auto& s : diagnostics.samples()) {
    if (s.t < t_begin || s.t > t_end) continue;
    const double g = series == GradientSeries::Phi ? s.g_phi : s.g_z;
    if (!(g > 0.0)) {
      std::ostringstream msg;
      msg << "nonpositive gradient norm " << g << " at t = " << s.t << " inside the fit window";
      throw std::invalid_argument(msg.str());
    }
    ts.push_back(s.t);
    ys.push_back(std::log(g));
  }
  if (ts.size() < 10) {
    throw std::invalid_argument("decay fit needs at least 10 samples in the window, got " +
                                std::to_string(ts.size()));
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sty += (ts[i] - mt) * (ys[i] - my);
    stt += (ts[i] - mt) * (ts[i] - mt);
  }
  return -sty / stt;
}

}  // namespace lpw
