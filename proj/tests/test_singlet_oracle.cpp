#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpw/singlet_oracle.hpp"

using namespace lpw;
using std::numbers::pi;
using std::numbers::sqrt2;

namespace {

// Independent oracle: singlet joint distribution written out directly.
double oracle_joint(int a, int b, double theta) { return 0.25 * (1.0 - a * b * std::cos(theta)); }

double oracle_split(double ab, double abp, double apb, double apbp) {
  return std::abs(ab - abp) + std::abs(apb + apbp);
}

}  // namespace

TEST_SUITE("singlet-oracle") {
  TEST_CASE("quantum_correlation examples") {
    CHECK(quantum_correlation(Angle(pi / 4)) == doctest::Approx(-sqrt2 / 2).epsilon(1e-14));
    CHECK(quantum_correlation(Angle(0.0)) == -1.0);
    CHECK(std::abs(quantum_correlation(Angle(pi / 2))) < 1e-15);
  }

  TEST_CASE("quantum_correlation is symmetric under theta -> 2pi - theta") {
    for (int i = 0; i < 64; ++i) {
      const double t = 0.1 * i;
      CHECK(quantum_correlation(Angle(t)) == doctest::Approx(quantum_correlation(Angle(kTwoPi - t))).epsilon(1e-12));
    }
  }

  TEST_CASE("joint_probability examples and normalization") {
    CHECK(joint_probability(+1, -1, Angle(0.0)) == doctest::Approx(0.5));
    CHECK(joint_probability(+1, +1, Angle(0.0)) == doctest::Approx(0.0));
    CHECK(joint_probability(+1, +1, Angle(pi / 2)) == doctest::Approx(0.25));
    for (int i = 0; i < 100; ++i) {
      const Angle t(0.0731 * i);
      double sum = 0.0, corr = 0.0;
      for (int a : {-1, 1}) {
        for (int b : {-1, 1}) {
          const double p = joint_probability(a, b, t);
          CHECK(p >= 0.0);
          CHECK(p == doctest::Approx(oracle_joint(a, b, t.radians())).epsilon(1e-14));
          sum += p;
          corr += a * b * p;
        }
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(corr == doctest::Approx(quantum_correlation(t)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(joint_probability(0, 1, Angle(0.0)), std::invalid_argument);
  }

  TEST_CASE("chsh_value examples") {
    CHECK(chsh_value({-sqrt2 / 2, sqrt2 / 2, -sqrt2 / 2, -sqrt2 / 2}) == doctest::Approx(2 * sqrt2).epsilon(1e-14));
    CHECK(chsh_value({0, 0, 0, 0}) == 0.0);
    CHECK(chsh_value({-1, -1, -1, -1}) == 2.0);
    CHECK(chsh_value({-1, -1, -1, -1}, ChshForm::SingleAbsolute) == 2.0);
    CHECK_THROWS_AS(chsh_value({1.5, 0, 0, 0}), std::invalid_argument);
  }

  TEST_CASE("chsh_value is invariant under global negation") {
    RngStream rng(3, 0);
    for (int i = 0; i < 200; ++i) {
      Correlators e{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
      Correlators n{-e.ab, -e.abp, -e.apb, -e.apbp};
      CHECK(chsh_value(e) == chsh_value(n));
      CHECK(chsh_value(e) == doctest::Approx(oracle_split(e.ab, e.abp, e.apb, e.apbp)));
    }
  }

  TEST_CASE("standard angles") {
    const ChshQuad q = standard_chsh_angles();
    CHECK(q.a.radians() == 0.0);
    CHECK(q.a_prime.radians() == doctest::Approx(pi / 2));
    CHECK(q.b.radians() == doctest::Approx(pi / 4));
    CHECK(q.b_prime.radians() == doctest::Approx(3 * pi / 4));
    // relative angles: a vs b is 45 degrees, a vs a' is 90 degrees
    CHECK(std::cos((q.a - q.b).radians()) == doctest::Approx(std::cos(pi / 4)));
    CHECK(std::cos((q.a - q.a_prime).radians()) == doctest::Approx(0.0));
    CHECK(chsh_value(quantum_correlators(q)) == doctest::Approx(2 * sqrt2).epsilon(1e-12));
  }

  TEST_CASE("strategy correlators") {
    const ChshQuad q = standard_chsh_angles();
    const Correlators ones = strategy_correlators(StrategyMixture::single({1, 1, 1, 1}), q);
    CHECK(ones.ab == 1.0);
    CHECK(ones.abp == 1.0);
    CHECK(ones.apb == 1.0);
    CHECK(ones.apbp == 1.0);
    const Correlators zero = strategy_correlators(StrategyMixture::uniform_all(), q);
    CHECK(std::abs(zero.ab) < 1e-15);
    CHECK(std::abs(zero.abp) < 1e-15);
    CHECK(std::abs(zero.apb) < 1e-15);
    CHECK(std::abs(zero.apbp) < 1e-15);
    const Correlators mixed = strategy_correlators(StrategyMixture::single({1, 1, -1, 1}), q);
    CHECK(mixed.ab == -1.0);
    CHECK(mixed.abp == 1.0);
    CHECK(mixed.apb == -1.0);
    CHECK(mixed.apbp == 1.0);
  }

  TEST_CASE("strategy index round trip") {
    for (int k = 0; k < 16; ++k) CHECK(DeterministicStrategy::from_index(k).index() == k);
    CHECK_THROWS(DeterministicStrategy::from_index(16));
  }

  TEST_CASE("mixture validation") {
    CHECK_THROWS_AS(StrategyMixture({{DeterministicStrategy{}, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(StrategyMixture({{DeterministicStrategy{}, -0.5}, {DeterministicStrategy{}, 1.5}}),
                    std::invalid_argument);
  }

  TEST_CASE("brute force LHV maximum") {
    // independent enumeration over the sixteen sign tables
    double oracle = 0.0;
    for (int a : {-1, 1})
      for (int ap : {-1, 1})
        for (int b : {-1, 1})
          for (int bp : {-1, 1}) oracle = std::max(oracle, oracle_split(a * b, a * bp, ap * b, ap * bp));
    CHECK(oracle == 2.0);
    for (ChshForm form : {ChshForm::SplitAbsolute, ChshForm::SingleAbsolute}) {
      const LhvOptimum best = brute_force_lhv_max(form);
      CHECK(best.value == 2.0);
      const auto rescored =
          chsh_value(strategy_correlators(StrategyMixture::single(best.strategy), standard_chsh_angles()), form);
      CHECK(rescored == best.value);
    }
  }

  TEST_CASE("random mixtures never exceed the local bound") {
    const ChshQuad q = standard_chsh_angles();
    for (std::uint64_t m = 0; m < 1000; ++m) {
      RngStream rng(11, m, StreamPurpose::Strategy);
      std::vector<StrategyMixture::Entry> entries;
      double total = 0.0;
      const int support = 1 + static_cast<int>(rng.uniform() * 16);
      for (int k = 0; k < support; ++k) {
        const double w = rng.uniform() + 1e-3;
        entries.emplace_back(DeterministicStrategy::from_index(static_cast<int>(rng.uniform() * 16)), w);
        total += w;
      }
      for (auto& e : entries) e.second /= total;
      const StrategyMixture mix(entries);
      CHECK(chsh_value(strategy_correlators(mix, q), ChshForm::SplitAbsolute) <= 2.0 + 1e-12);
      CHECK(chsh_value(strategy_correlators(mix, q), ChshForm::SingleAbsolute) <= 2.0 + 1e-12);
    }
  }

  TEST_CASE("sample_quantum_outcomes") {
    RngStream rng(5, 0, StreamPurpose::Outcome);
    for (int i = 0; i < 10000; ++i) {
      const OutcomePair o = sample_quantum_outcomes(Angle(0.0), rng);
      REQUIRE(o.wing1 == -o.wing2);
    }
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const OutcomePair o = sample_quantum_outcomes(Angle(pi / 2), rng);
      sum += o.wing1 * o.wing2;
    }
    CHECK(std::abs(sum / n) <= 0.01);

    RngStream r1(9, 4, StreamPurpose::Outcome), r2(9, 4, StreamPurpose::Outcome);
    for (int i = 0; i < 100; ++i) CHECK(sample_quantum_outcomes(Angle(1.0), r1) == sample_quantum_outcomes(Angle(1.0), r2));
  }
}
