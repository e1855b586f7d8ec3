#include "lpw/pilot_wave.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"

namespace lpw {

namespace {

double window_overlap(CouplingWindow w, double t0, double t1) {
  const double lo = std::max(w.on, t0);
  const double hi = std::min(w.off, t1);
  return hi > lo ? hi - lo : 0.0;
}

// exp(iθ n·σ) for n = (sin α, 0, cos α): cos θ·I + i sin θ·(cos α σz + sin α σx)
struct SpinRotation {
  Complex m00, m01, m10, m11;
};

SpinRotation spin_rotation(double theta, const Angle& direction) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double ca = std::cos(direction.radians());
  const double sa = std::sin(direction.radians());
  return {Complex{c, s * ca}, Complex{0.0, s * sa}, Complex{0.0, s * sa}, Complex{c, -s * ca}};
}

void apply_coupling(SpinorField& field, const MeasurementDynamics& dyn, double t0, double t1) {
  const double g1 = dyn.schedule.impulse(1, t0, t1);
  const double g2 = dyn.schedule.impulse(2, t0, t1);
  if (g1 == 0.0 && g2 == 0.0) return;

  const GridSpec& grid = field.grid();
  const std::size_t n = grid.points();
  const double hbar = dyn.constants.hbar;
  std::vector<SpinRotation> u1(n), u2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.coordinate(i) - grid.midpoint();
    u1[i] = spin_rotation(g1 * x / hbar, dyn.settings.alpha);
    u2[i] = spin_rotation(g2 * x / hbar, dyn.settings.beta);
  }

  auto p00 = field.component(0);
  auto p01 = field.component(1);
  auto p10 = field.component(2);
  auto p11 = field.component(3);
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    const SpinRotation& a = u1[i1];
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const SpinRotation& b = u2[i2];
      const std::size_t k = i1 * n + i2;
      // wing 1 acts on the first spin index
      const Complex w00 = a.m00 * p00[k] + a.m01 * p10[k];
      const Complex w10 = a.m10 * p00[k] + a.m11 * p10[k];
      const Complex w01 = a.m00 * p01[k] + a.m01 * p11[k];
      const Complex w11 = a.m10 * p01[k] + a.m11 * p11[k];
      // wing 2 acts on the second
      p00[k] = b.m00 * w00 + b.m01 * w01;
      p01[k] = b.m10 * w00 + b.m11 * w01;
      p10[k] = b.m00 * w10 + b.m01 * w11;
      p11[k] = b.m10 * w10 + b.m11 * w11;
    }
  }
}

void apply_kinetic(SpinorField& field, const PhysicalConstants& constants, double dt) {
  const GridSpec& grid = field.grid();
  const std::size_t n = grid.points();
  const auto& fft = detail::Fft2d::for_size(n);
  const double inv_size = 1.0 / static_cast<double>(n * n);
  std::vector<Complex> phase(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = detail::wavenumber(j, n, grid.length());
    const double arg = -constants.hbar * k * k * dt / (2.0 * constants.mass);
    phase[j] = std::polar(1.0, arg);
  }
  std::vector<Complex> spectrum(n * n);
  for (int c = 0; c < SpinorField::kComponents; ++c) {
    auto plane = field.component(c);
    fft.forward(plane.data(), spectrum.data());
    for (std::size_t j1 = 0; j1 < n; ++j1) {
      const Complex row = phase[j1] * inv_size;
      Complex* s = spectrum.data() + j1 * n;
      for (std::size_t j2 = 0; j2 < n; ++j2) s[j2] *= row * phase[j2];
    }
    fft.inverse(spectrum.data(), plane.data());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

MeasurementSchedule MeasurementSchedule::create(double coupling_strength, CouplingWindow wing1,
                                                CouplingWindow wing2, double readout_time,
                                                double packet_width,
                                                const PhysicalConstants& constants) {
  constants.validate();
  if (!(coupling_strength > 0.0)) throw std::invalid_argument("coupling_strength must be positive");
  if (!(packet_width > 0.0)) throw std::invalid_argument("packet width must be positive");
  for (auto [wing, w] : {std::pair{1, wing1}, std::pair{2, wing2}}) {
    if (!(w.on >= 0.0 && w.on < w.off && w.off <= readout_time)) {
      std::ostringstream msg;
      msg << "wing " << wing << " window [" << w.on << ", " << w.off
          << "] must satisfy 0 <= t_on < t_off <= t_read = " << readout_time;
      throw std::invalid_argument(msg.str());
    }
  }
  MeasurementSchedule s;
  s.coupling_ = coupling_strength;
  s.wing1_ = wing1;
  s.wing2_ = wing2;
  s.readout_time_ = readout_time;
  s.packet_width_ = packet_width;
  const double width = s.packet_width_at(readout_time, constants);
  for (int wing : {1, 2}) {
    const double sep = s.branch_separation(wing, constants);
    if (sep < 5.0 * width) {
      std::ostringstream msg;
      msg << "wing " << wing << " branch separation " << sep << " at readout is below 5 x packet width ("
          << 5.0 * width << "); increase the coupling impulse or the free flight";
      throw std::invalid_argument(msg.str());
    }
  }
  return s;
}

MeasurementSchedule MeasurementSchedule::standard(const PhysicalConstants& constants) {
  return create(3.2, {0.0, 0.5}, {0.5, 1.0}, 11.0, 2.0, constants);
}

double MeasurementSchedule::impulse(int wing, double t0, double t1) const {
  return coupling_ * window_overlap(window(wing), t0, t1);
}

double MeasurementSchedule::packet_width_at(double t, const PhysicalConstants& constants) const {
  const double spread = constants.hbar * t / (2.0 * constants.mass * packet_width_);
  return std::sqrt(packet_width_ * packet_width_ + spread * spread);
}

double MeasurementSchedule::branch_separation(int wing, const PhysicalConstants& constants) const {
  const CouplingWindow w = window(wing);
  const double velocity = coupling_ * (w.off - w.on) / constants.mass;
  return 2.0 * velocity * (readout_time_ - 0.5 * (w.on + w.off));
}

// ---------------------------------------------------------------------------

SpinorField prepare_singlet_state(const GridSpec& grid, double sigma0) {
  const double dx = grid.spacing();
  if (!(sigma0 >= 4.0 * dx) || !(sigma0 <= grid.length() / 16.0)) {
    std::ostringstream msg;
    msg << "packet width " << sigma0 << " must lie in [4 dx, L/16] = [" << 4.0 * dx << ", "
        << grid.length() / 16.0 << "]";
    throw std::invalid_argument(msg.str());
  }
  const std::size_t n = grid.points();
  std::vector<double> g(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = periodic_delta(grid.midpoint(), grid.coordinate(i), grid.length());
    g[i] = std::exp(-d * d / (4.0 * sigma0 * sigma0));
    sum += g[i] * g[i] * dx;
  }
  const double inv = 1.0 / std::sqrt(sum);
  for (auto& v : g) v *= inv;

  SpinorField field(grid);
  const double amp = 1.0 / std::numbers::sqrt2;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      const double p = g[i1] * g[i2] * amp;
      field.at(Up, Down, i1, i2) = p;
      field.at(Down, Up, i1, i2) = -p;
    }
  }
  return field;
}

double stability_limit(const GridSpec& grid, const PhysicalConstants& constants) {
  const double dx = grid.spacing();
  return 2.0 * constants.mass * dx * dx / (std::numbers::pi * constants.hbar);
}

void evolve_step(SpinorField& field, const MeasurementDynamics& dynamics, double t, double dt) {
  if (dt == 0.0) return;
  if (!(dt > 0.0) || dt > stability_limit(field.grid(), dynamics.constants)) {
    std::ostringstream msg;
    msg << "time step " << dt << " outside (0, " << stability_limit(field.grid(), dynamics.constants)
        << "]";
    throw std::invalid_argument(msg.str());
  }
  apply_coupling(field, dynamics, t, t + 0.5 * dt);
  apply_kinetic(field, dynamics.constants, dt);
  apply_coupling(field, dynamics, t + 0.5 * dt, t + dt);
  const double n = field.norm();
  if (!std::isfinite(n)) {
    std::ostringstream msg;
    msg << "non-finite field after step t = " << t << ", dt = " << dt << " (norm " << n << ")";
    throw NumericalError(msg.str());
  }
}

SpinorField evolve_step(const SpinorField& field, const MeasurementDynamics& dynamics, double t,
                        double dt) {
  SpinorField out = field;
  evolve_step(out, dynamics, t, dt);
  return out;
}

// ---------------------------------------------------------------------------

GuidingField::GuidingField(const SpinorField& field, const PhysicalConstants& constants)
    : grid_(field.grid()),
      hbar_over_mass_(constants.hbar / constants.mass),
      nodes_(field.plane_size()) {
  const std::size_t n = grid_.points();
  const auto& fft = detail::Fft2d::for_size(n);
  const double inv_size = 1.0 / static_cast<double>(n * n);
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    // the Nyquist mode has no consistent odd derivative
    k[j] = j == n / 2 ? 0.0 : detail::wavenumber(j, n, grid_.length());
  }
  std::vector<Complex> spectrum(n * n), work(n * n), grad(n * n);
  for (int c = 0; c < SpinorField::kComponents; ++c) {
    auto plane = field.component(c);
    for (std::size_t i = 0; i < plane.size(); ++i) nodes_[i].psi[c] = plane[i];
    fft.forward(plane.data(), spectrum.data());

    for (std::size_t j1 = 0; j1 < n; ++j1) {
      const Complex f{0.0, k[j1] * inv_size};
      for (std::size_t j2 = 0; j2 < n; ++j2) work[j1 * n + j2] = spectrum[j1 * n + j2] * f;
    }
    fft.inverse(work.data(), grad.data());
    for (std::size_t i = 0; i < grad.size(); ++i) nodes_[i].d1[c] = grad[i];

    for (std::size_t j1 = 0; j1 < n; ++j1) {
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        work[j1 * n + j2] = spectrum[j1 * n + j2] * Complex{0.0, k[j2] * inv_size};
      }
    }
    fft.inverse(work.data(), grad.data());
    for (std::size_t i = 0; i < grad.size(); ++i) nodes_[i].d2[c] = grad[i];
  }
}

Velocity GuidingField::at(const ParticleConfig& config) const {
  const std::size_t n = grid_.points();
  const double dx = grid_.spacing();
  const double x1 = grid_.wrap(config.x1);
  const double x2 = grid_.wrap(config.x2);
  const double u1 = x1 / dx;
  const double u2 = x2 / dx;
  const auto i1 = std::min(static_cast<std::size_t>(u1), n - 1);
  const auto i2 = std::min(static_cast<std::size_t>(u2), n - 1);
  const double f1 = u1 - static_cast<double>(i1);
  const double f2 = u2 - static_cast<double>(i2);
  const std::size_t j1 = (i1 + 1) % n;
  const std::size_t j2 = (i2 + 1) % n;

  const Node* corner[4] = {&nodes_[i1 * n + i2], &nodes_[i1 * n + j2], &nodes_[j1 * n + i2],
                           &nodes_[j1 * n + j2]};
  const double w[4] = {(1 - f1) * (1 - f2), (1 - f1) * f2, f1 * (1 - f2), f1 * f2};

  double num1 = 0.0;
  double num2 = 0.0;
  double den = 0.0;
  for (int c = 0; c < SpinorField::kComponents; ++c) {
    Complex psi{}, d1{}, d2{};
    for (int q = 0; q < 4; ++q) {
      psi += w[q] * corner[q]->psi[c];
      d1 += w[q] * corner[q]->d1[c];
      d2 += w[q] * corner[q]->d2[c];
    }
    num1 += (std::conj(psi) * d1).imag();
    num2 += (std::conj(psi) * d2).imag();
    den += std::norm(psi);
  }
  if (!(den > kDensityFloor)) {
    std::ostringstream msg;
    msg << "guiding velocity requested at a node of |psi|^2: (x1, x2) = (" << x1 << ", " << x2
        << "), density " << den;
    throw NodeError(msg.str());
  }
  return {hbar_over_mass_ * num1 / den, hbar_over_mass_ * num2 / den};
}

Velocity guiding_velocity(const SpinorField& field, const ParticleConfig& config,
                          const PhysicalConstants& constants) {
  return GuidingField(field, constants).at(config);
}

// ---------------------------------------------------------------------------

BornSampler::BornSampler(const SpinorField& field) : grid_(field.grid()), cumulative_(field.plane_size()) {
  const std::size_t n = grid_.points();
  double acc = 0.0;
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      acc += field.density(i1, i2);
      cumulative_[i1 * n + i2] = acc;
    }
  }
  if (!(acc > 0.0)) throw std::invalid_argument("cannot sample from a vanishing field");
}

ParticleConfig BornSampler::sample(RngStream& rng) const {
  const double target = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  const auto cell = static_cast<std::size_t>(it - cumulative_.begin());
  const std::size_t n = grid_.points();
  const double dx = grid_.spacing();
  const double jitter1 = rng.uniform() - 0.5;
  const double jitter2 = rng.uniform() - 0.5;
  return {grid_.wrap(grid_.coordinate(cell / n) + jitter1 * dx),
          grid_.wrap(grid_.coordinate(cell % n) + jitter2 * dx)};
}

ParticleConfig born_sample(const SpinorField& field, RngStream& rng) {
  return BornSampler(field).sample(rng);
}

// ---------------------------------------------------------------------------

PilotWaveSystem::PilotWaveSystem(SpinorField field, std::vector<ParticleConfig> configs, double t)
    : field_(std::move(field)), configs_(std::move(configs)), stalled_(configs_.size(), false), t_(t) {
  for (auto& c : configs_) c = {field_.grid().wrap(c.x1), field_.grid().wrap(c.x2)};
}

void PilotWaveSystem::step(const MeasurementDynamics& dynamics, double dt) {
  if (dt == 0.0) return;
  if (!guide_) guide_.emplace(field_, dynamics.constants);
  const double half = 0.5 * dt;
  evolve_step(field_, dynamics, t_, half);
  GuidingField mid(field_, dynamics.constants);
  evolve_step(field_, dynamics, t_ + half, half);
  GuidingField end(field_, dynamics.constants);

  const GridSpec& grid = field_.grid();
  for (std::size_t i = 0; i < configs_.size(); ++i) {
    if (stalled_[i]) continue;
    const ParticleConfig z = configs_[i];
    try {
      const Velocity k1 = guide_->at(z);
      const Velocity k2 = mid.at({z.x1 + half * k1.v1, z.x2 + half * k1.v2});
      const Velocity k3 = mid.at({z.x1 + half * k2.v1, z.x2 + half * k2.v2});
      const Velocity k4 = end.at({z.x1 + dt * k3.v1, z.x2 + dt * k3.v2});
      configs_[i] = {grid.wrap(z.x1 + dt / 6.0 * (k1.v1 + 2.0 * k2.v1 + 2.0 * k3.v1 + k4.v1)),
                     grid.wrap(z.x2 + dt / 6.0 * (k1.v2 + 2.0 * k2.v2 + 2.0 * k3.v2 + k4.v2))};
    } catch (const NodeError&) {
      stalled_[i] = true;
    }
  }
  guide_.emplace(std::move(end));
  t_ += dt;
}

// ---------------------------------------------------------------------------

int readout_sign(double x, const GridSpec& grid) {
  return periodic_delta(grid.midpoint(), x, grid.length()) >= 0.0 ? 1 : -1;
}

bool in_guard_band(double x, const GridSpec& grid, double band) {
  return std::abs(periodic_delta(grid.midpoint(), x, grid.length())) < band;
}

MeasurementRun run_measurement(const SpinorField& field0, const MeasurementDynamics& dynamics,
                               std::span<const ParticleConfig> configs, double dt,
                               bool record_traces) {
  if (configs.empty()) throw std::invalid_argument("run_measurement needs at least one configuration");
  if (!(dt > 0.0)) throw std::invalid_argument("run_measurement needs dt > 0");
  const double t_read = dynamics.schedule.readout_time();
  const GridSpec& grid = field0.grid();

  PilotWaveSystem system(field0, {configs.begin(), configs.end()});
  MeasurementRun run;
  if (record_traces) {
    run.traces.resize(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) run.traces[i].push_back({0.0, system.configs()[i]});
  }

  const auto full_steps = static_cast<std::size_t>(std::floor(t_read / dt + 1e-9));
  const double remainder = t_read - static_cast<double>(full_steps) * dt;
  const std::size_t total = full_steps + (remainder > 1e-12 * t_read ? 1 : 0);
  for (std::size_t s = 0; s < total; ++s) {
    const double h = s < full_steps ? dt : remainder;
    system.step(dynamics, h);
    if (record_traces) {
      for (std::size_t i = 0; i < configs.size(); ++i) {
        run.traces[i].push_back({system.time(), system.configs()[i]});
      }
    }
  }

  const double band = dynamics.schedule.packet_width_at(t_read, dynamics.constants);
  run.outcomes.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ParticleConfig z = system.configs()[i];
    MeasurementOutcome m;
    m.outcome = {readout_sign(z.x1, grid), readout_sign(z.x2, grid)};
    const bool stalled = system.stalled()[i];
    m.flagged = stalled || in_guard_band(z.x1, grid, band) || in_guard_band(z.x2, grid, band);
    if (m.flagged) ++run.flagged;
    if (stalled) ++run.stalled;
    run.outcomes.push_back(m);
  }
  run.final_configs.assign(system.configs().begin(), system.configs().end());
  return run;
}

CorrelatorEstimate estimate_correlator(std::span<const OutcomePair> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("estimate_correlator: empty outcome list");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += o.wing1 * o.wing2;
  const double n = static_cast<double>(outcomes.size());
  const double mean = sum / n;
  double var = 0.0;
  for (const auto& o : outcomes) {
    const double d = o.wing1 * o.wing2 - mean;
    var += d * d;
  }
  var /= n;
  return {mean, std::sqrt(var / n), outcomes.size()};
}

}  // namespace lpw
