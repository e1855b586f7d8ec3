#include <doctest.h>

#include <numbers>

#include "lpw/bell_harness.hpp"

using namespace lpw;

namespace {

EngineParams small_engine() { return {GridSpec(128, 64.0), {}, MeasurementSchedule::standard(), 0.05, 8}; }

const FixedList kAllCorners{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

}  // namespace

TEST_SUITE("bell-harness") {
  TEST_CASE("pi digits and the parity policy") {
    CHECK(pi_digits(20) == "14159265358979323846");
    CHECK(pi_digits(1000).substr(990, 10) == "2164201989");  // digits 991-1000
    const PiDigits policy{};
    CHECK(choose_settings(policy, 0) == PairIndex{0, 1});
    CHECK(choose_settings(policy, 1) == PairIndex{0, 0});
    const PiDigits flipped{0, false};
    CHECK(choose_settings(flipped, 0) == PairIndex{1, 0});
    CHECK(choose_settings(PiDigits{2}, 0) == PairIndex{0, 0});
  }

  TEST_CASE("fixed list and independent policies") {
    const FixedList list{{{0, 0}, {1, 1}}};
    CHECK(choose_settings(list, 0) == PairIndex{0, 0});
    CHECK(choose_settings(list, 1) == PairIndex{1, 1});
    CHECK(choose_settings(list, 2) == PairIndex{0, 0});
    CHECK_THROWS_AS(choose_settings(FixedList{}, 0), std::invalid_argument);

    std::array<int, 4> counts{};
    for (std::size_t r = 0; r < 4000; ++r) {
      const PairIndex p = choose_settings(IndependentUniform{9}, r);
      CHECK(p == choose_settings(IndependentUniform{9}, r));
      ++counts[static_cast<std::size_t>(2 * p.a_index + p.b_index)];
    }
    for (int c : counts) CHECK(std::abs(c - 1000) < 4 * std::sqrt(750.0));
  }

  TEST_CASE("lattice-derived settings") {
    SpinorField phi = prepare_singlet_state(GridSpec(128, 64.0), 2.0);
    RngStream rng(1, 0);
    const CellState cell{phi, born_sample(phi, rng)};
    const LatticeState a = init_homogeneous(cell, RingSpec(8, 8.0));
    const LatticeState b = init_homogeneous(cell, RingSpec(8, 8.0));
    const LatticeDerived policy{};
    CHECK(choose_settings(policy, 0, &a) == choose_settings(policy, 7, &b));
    const auto d = cell_digest(cell);
    CHECK(choose_settings(policy, 0, &a) == settings_from_digests(d, d));
    CHECK_THROWS_AS(choose_settings(policy, 0), std::invalid_argument);
    CHECK_THROWS_AS(choose_settings(LatticeDerived{1, 8}, 0, &a), std::invalid_argument);
    CHECK(settings_from_digests(0b01, 0b10) == PairIndex{1, 1});
    CHECK(settings_from_digests(0b10, 0b01) == PairIndex{0, 0});
  }

  TEST_CASE("lhv ledgers follow the strategy table") {
    const DeterministicStrategy s{1, -1, -1, 1};
    const ModelSpec model{ModelKind::Lhv, {}, StrategyMixture::single(s)};
    const RunLedger ledger = run_bell_ensemble(model, standard_chsh_angles(), IndependentUniform{3}, 10, 5);
    for (const auto& r : ledger.records) {
      CHECK(r.outcome.wing1 == s.wing1(r.pair.a_index));
      CHECK(r.outcome.wing2 == s.wing2(r.pair.b_index));
      CHECK(r.lambda.x1 == s.index());
    }
    CHECK_THROWS_AS(run_bell_ensemble({ModelKind::Lhv, {}, std::nullopt}, standard_chsh_angles(), kAllCorners, 4, 1),
                    std::invalid_argument);
  }

  TEST_CASE("oracle equal settings are anticorrelated") {
    const ChshQuad quad{Angle(0.3), Angle(1.0), Angle(0.3), Angle(2.0)};
    const RunLedger ledger =
        run_bell_ensemble({}, quad, FixedList{{{0, 0}}}, 1000, 2);
    for (const auto& r : ledger.records) CHECK(r.outcome.wing1 == -r.outcome.wing2);
  }

  TEST_CASE("chsh report") {
    const ChshQuad quad = standard_chsh_angles();
    const ChshReport q = chsh_report(run_bell_ensemble({}, quad, kAllCorners, 4 * 4096, 8));
    CHECK(std::abs(q.s - 2.0 * std::numbers::sqrt2) <= 3.0 * q.s_std_error);
    CHECK(q.verdict == Verdict::ViolatesBound);

    const ChshReport u =
        chsh_report(run_bell_ensemble({ModelKind::Lhv, {}, StrategyMixture::uniform_all()}, quad, kAllCorners, 4096, 8));
    CHECK(std::abs(u.s) <= 3.0 * u.s_std_error);
    CHECK(u.verdict == Verdict::BelowBound);

    const LhvOptimum best = brute_force_lhv_max();
    const ChshReport b = chsh_report(
        run_bell_ensemble({ModelKind::Lhv, {}, StrategyMixture::single(best.strategy)}, quad, kAllCorners, 400, 8));
    CHECK(std::abs(b.s - 2.0) <= 3.0 * b.s_std_error + 1e-12);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RngStream rng(seed, 0, StreamPurpose::Strategy);
      std::vector<StrategyMixture::Entry> entries;
      double total = 0;
      for (int k = 0; k < 16; ++k) {
        const double w = std::pow(rng.uniform(), 4);
        entries.emplace_back(DeterministicStrategy::from_index(k), w);
        total += w;
      }
      for (auto& e : entries) e.second /= total;
      const ChshReport r = chsh_report(
          run_bell_ensemble({ModelKind::Lhv, {}, StrategyMixture(entries)}, quad, IndependentUniform{seed}, 2000, seed));
      CHECK(r.s <= 2.0 + 3.0 * r.s_std_error);
    }

    CHECK_THROWS_WITH_AS(chsh_report(run_bell_ensemble({}, quad, FixedList{{{0, 0}, {1, 1}}}, 200, 1)),
                         doctest::Contains("(a,b')"), std::invalid_argument);
  }

  TEST_CASE("model and policy mismatches fail before running") {
    CHECK_THROWS_AS(run_bell_ensemble({}, standard_chsh_angles(), LatticeDerived{}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_bell_ensemble({}, standard_chsh_angles(), kAllCorners, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_bell_ensemble({}, standard_chsh_angles(), FixedList{{{0, 2}}}, 1, 1), std::invalid_argument);
  }

  TEST_CASE("lattice readout") {
    const RingSpec ring(8, 8.0);
    MassDensity rho{std::vector<std::vector<int>>(8), {1.0, 1.0}};
    CHECK_FALSE(lattice_readout(rho, ring, 1).has_value());
    rho.occupancy[5] = {1};
    rho.occupancy[2] = {2};
    CHECK(lattice_readout(rho, ring, 1) == 1);
    CHECK(lattice_readout(rho, ring, 2) == -1);
    rho.occupancy[1] = {1};
    CHECK_FALSE(lattice_readout(rho, ring, 1).has_value());
  }

  TEST_CASE("homogeneous lattice and pilot-wave runs agree outcome for outcome") {
    const ChshQuad quad = standard_chsh_angles();
    ModelSpec pw{ModelKind::PilotWave, small_engine(), std::nullopt};
    ModelSpec lpw{ModelKind::Lpw, small_engine(), std::nullopt};
    const RunLedger a = run_bell_ensemble(pw, quad, FixedList{{{0, 0}, {1, 1}}}, 48, 77);
    const RunLedger b = run_bell_ensemble(lpw, quad, FixedList{{{0, 0}, {1, 1}}}, 48, 77);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].lambda == b.records[i].lambda);
      CHECK(a.records[i].outcome == b.records[i].outcome);
      CHECK(a.records[i].flagged == b.records[i].flagged);
    }
  }

  TEST_CASE("settings-independence test") {
    const ChshQuad quad = standard_chsh_angles();
    RunLedger ledger = run_bell_ensemble({}, quad, IndependentUniform{4}, 10000, 4);
    const SiTestReport ok = si_test(ledger, 16);
    CHECK(ok.p_value > 0.001);
    CHECK(ok.columns == 4);

    const RunLedger pi = run_bell_ensemble({}, quad, PiDigits{}, 4000, 6);
    CHECK(si_test(pi, 8).p_value > 0.001);

    // engineered dependence: lambda's side of the midpoint copies the wing-1 setting
    for (auto& r : ledger.records) {
      const double off = std::abs(r.lambda.x1 - 32.0);
      r.lambda.x1 = r.pair.a_index == 0 ? 32.0 - off : 32.0 + off;
    }
    CHECK(si_test(ledger, 16).p_value < 1e-3);

    ledger.records.resize(1);
    CHECK_THROWS_AS(si_test(ledger, 16), std::invalid_argument);
  }
}
