#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lpw/relaxation.hpp"

using namespace lpw;

namespace {

const GridSpec kGrid(64, 64.0);
const GridSpec kSinglet(128, 64.0);

MeasurementDynamics dynamics() { return {PhysicalConstants{}, {Angle(0.0), Angle(0.0)}, MeasurementSchedule::standard()}; }

LatticeState generic(std::size_t m, std::uint64_t seed) {
  RngStream rng(seed, 0, StreamPurpose::Initializer);
  return init_generic(RingSpec(m, 64.0 / static_cast<double>(m)), kGrid, rng);
}

LatticeState singlet_lattice(std::size_t m) {
  SpinorField phi = prepare_singlet_state(kSinglet, 2.0);
  RngStream rng(3, 0, StreamPurpose::Initializer);
  const ParticleConfig z = born_sample(phi, rng);
  return init_homogeneous({std::move(phi), z}, RingSpec(m, 64.0 / static_cast<double>(m)));
}

}  // namespace

TEST_SUITE("relaxation") {
  TEST_CASE("parameter validation") {
    const RingSpec ring(8, 8.0);
    CHECK_NOTHROW((RelaxationParams{16.0, 1.0}.validate(ring)));
    CHECK_THROWS_WITH_AS((RelaxationParams{32.0, 1.0}.validate(ring)), doctest::Contains("1/4"), std::invalid_argument);
    CHECK_THROWS_AS((RelaxationParams{-1.0, 1.0}.validate(ring)), std::invalid_argument);
    CHECK_THROWS_AS((RelaxationParams{1.0, 0.0}.validate(ring)), std::invalid_argument);
    CHECK(RelaxationParams{2.0, 0.5}.diffusion_number(ring) == doctest::Approx(1.0 / 64.0));
  }

  TEST_CASE("kappa = 0 is plain internal evolution") {
    const LatticeState l = generic(4, 2);
    const RelaxationParams params{0.0, 0.1, true, true};
    const LatticeState relaxed = relax_step(l, params, dynamics());
    const LatticeState evolved = evolve_lattice(l, dynamics(), 0.05, EvolutionMode::Faithful, 2);
    CHECK(relaxed.cells == evolved.cells);
    CHECK(relaxed.t == evolved.t);

    const LatticeState tiny = relax_step(l, {1e-8, 0.1, true, false}, dynamics());
    for (std::size_t x = 0; x < 4; ++x) {
      CHECK(l2_distance(tiny.cells[x].phi, relaxed.cells[x].phi) < 1e-6);
      CHECK(std::abs(tiny.cells[x].z.x1 - relaxed.cells[x].z.x1) < 1e-6);
      CHECK(std::abs(tiny.cells[x].z.x2 - relaxed.cells[x].z.x2) < 1e-6);
    }
  }

  TEST_CASE("homogeneous lattices are fixed points of the diffusion") {
    const LatticeState l = singlet_lattice(8);
    for (double kappa : {0.5, 2.0, 16.0}) {
      const LatticeState out = relax_step(l, {kappa, 0.2, false, false}, dynamics());
      CHECK(out.cells == l.cells);
      CHECK(out.t == doctest::Approx(0.2));
      const LatticeState renorm = relax_step(l, {kappa, 0.2, false, true}, dynamics());
      for (std::size_t x = 0; x < 8; ++x) CHECK(l2_distance(renorm.cells[x].phi, l.cells[x].phi) < 1e-14);
      const GradientNorms g = gradient_norms(out);
      CHECK(g.g_phi == 0.0);
      CHECK(g.g_z == 0.0);
    }
  }

  TEST_CASE("single-cosine perturbation decays by the discrete heat kernel") {
    const std::size_t m = 16;
    const RingSpec ring(m, 4.0);
    const double kappa = 1.0, dt = 1.6;  // r = 0.1
    const double k = kTwoPi / ring.circumference();
    LatticeState l = generic(2, 7);
    LatticeState lattice{ring, {}, 0.0};
    for (std::size_t x = 0; x < m; ++x) {
      const double mode = std::cos(kTwoPi * static_cast<double>(x) / static_cast<double>(m));
      lattice.cells.push_back({l.cells[0].phi, {32.0 + 0.5 * mode, 30.0 + 0.5 * mode}});
    }
    const LatticeState next = relax_step(lattice, {kappa, dt, false, false}, dynamics());
    const double factor = (next.cells[0].z.x1 - 32.0) / 0.5;
    // heat-kernel oracle e^{-kappa k^2 dt} and the exact explicit eigenvalue
    CHECK(factor == doctest::Approx(std::exp(-kappa * k * k * dt)).epsilon(0.01));
    const double explicit_factor = 1.0 - 4.0 * kappa * dt / 16.0 * std::pow(std::sin(std::numbers::pi / 16.0), 2);
    CHECK(factor == doctest::Approx(explicit_factor).epsilon(1e-12));
  }

  TEST_CASE("pure diffusion never increases the gradient norms") {
    // cells scattered around a common state, so diffusion keeps every norm near 1
    LatticeState l = generic(8, 5);
    const SpinorField base = l.cells[0].phi;
    for (auto& c : l.cells) {
      for (std::size_t i = 0; i < c.phi.data().size(); ++i) c.phi.data()[i] = base.data()[i] + 0.2 * c.phi.data()[i];
      c.phi.normalize();
    }
    const RelaxationParams params{12.8, 1.0, false, false};  // r = 0.2
    GradientNorms prev = gradient_norms(l);
    for (int k = 0; k < 30; ++k) {
      l = relax_step(std::move(l), params, dynamics());
      const GradientNorms g = gradient_norms(l);
      CHECK(g.g_phi <= prev.g_phi * (1.0 + 1e-12));
      CHECK(g.g_z <= prev.g_z * (1.0 + 1e-12));
      prev = g;
    }
  }

  TEST_CASE("gradient norms") {
    LatticeState l = singlet_lattice(8);
    const GradientNorms zero = gradient_norms(l);
    CHECK(zero.g_phi == 0.0);
    CHECK(zero.g_z == 0.0);
    const double delta = 0.75;
    l.cells[4].z.x1 = l.cells[4].z.x1 + delta;
    CHECK(gradient_norms(l).g_z == doctest::Approx(2 * delta * delta).epsilon(1e-12));
    CHECK(check_homogeneity(l, 0.0).grad_z_max == doctest::Approx(delta));
  }

  TEST_CASE("decay rate fit") {
    GradientDiagnostics diag;
    for (int i = 0; i < 50; ++i) {
      const double t = 0.02 * i;
      diag.record(t, {std::exp(-3.0 * t), 2.0 * std::exp(-0.5 * t)});
    }
    CHECK(decay_rate_fit(diag, 0.0, 1.0, GradientSeries::Phi) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(decay_rate_fit(diag, 0.0, 1.0, GradientSeries::Z) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK_THROWS_AS(decay_rate_fit(diag, 0.0, 0.1, GradientSeries::Phi), std::invalid_argument);
    CHECK_THROWS_AS(diag.record(0.5, {1.0, 1.0}), std::invalid_argument);
  }

  TEST_CASE("shared-field ensemble relaxes like the lattice") {
    const LatticeState l = singlet_lattice(8);
    std::vector<ParticleConfig> configs;
    RngStream rng(4, 0, StreamPurpose::Perturbation);
    for (std::size_t run = 0; run < 2; ++run) {
      for (std::size_t x = 0; x < 8; ++x) {
        configs.push_back({kSinglet.wrap(l.cells[0].z.x1 + rng.normal()), kSinglet.wrap(l.cells[0].z.x2 + rng.normal())});
      }
    }
    SharedFieldEnsemble ensemble(l.ring, l.cells[0].phi, configs);
    LatticeState lattice = ensemble.materialize(1);
    const RelaxationParams params{2.0, 0.1, true, true};
    for (int k = 0; k < 3; ++k) {
      relax_step(ensemble, params, dynamics());
      lattice = relax_step(std::move(lattice), params, dynamics());
    }
    const LatticeState mat = ensemble.materialize(1);
    CHECK(mat.cells == lattice.cells);
    CHECK(mat.t == lattice.t);
    CHECK(gradient_norms(ensemble, 1).g_z == gradient_norms(lattice).g_z);
  }
}
