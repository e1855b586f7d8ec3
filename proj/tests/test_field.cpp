#include <doctest.h>

#include <set>

#include "lpw/field.hpp"
#include "lpw/rng.hpp"

using namespace lpw;

TEST_SUITE("field") {
  TEST_CASE("grid validation") {
    CHECK_THROWS_AS(GridSpec(100, 64.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(16, 64.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(64, 0.0), std::invalid_argument);
    const GridSpec g(256, 64.0);
    CHECK(g.spacing() == 0.25);
    CHECK(g.midpoint() == 32.0);
    CHECK(g.wrap(-0.5) == 63.5);
    CHECK(g.wrap(64.0) == 0.0);
    CHECK(g.wrap(130.25) == doctest::Approx(2.25));
  }

  TEST_CASE("periodic_delta takes the short way round") {
    CHECK(periodic_delta(1.0, 63.0, 64.0) == doctest::Approx(-2.0));
    CHECK(periodic_delta(63.0, 1.0, 64.0) == doctest::Approx(2.0));
    CHECK(periodic_delta(10.0, 12.5, 64.0) == doctest::Approx(2.5));
  }

  TEST_CASE("constants validation") {
    CHECK_THROWS(PhysicalConstants{0.0, 1.0}.validate());
    CHECK_THROWS(PhysicalConstants{1.0, -1.0}.validate());
    CHECK_NOTHROW(PhysicalConstants{}.validate());
  }

  TEST_CASE("spinor field layout and norm") {
    const GridSpec g(32, 8.0);
    SpinorField f(g);
    f.at(1, 0, 3, 5) = {3.0, 4.0};
    CHECK(f.component(2)[3 * 32 + 5] == Complex(3.0, 4.0));
    CHECK(f.density(3, 5) == doctest::Approx(25.0));
    CHECK(f.norm() == doctest::Approx(5.0 * g.spacing()));
    f.normalize();
    CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-14));
    SpinorField h = f;
    CHECK(h == f);
    h.at(0, 0, 0, 0) = 1e-300;
    CHECK_FALSE(h == f);
    CHECK(l2_distance(f, f) == 0.0);
  }

  TEST_CASE("rng streams are keyed, not ordered") {
    RngStream a(7, 3, StreamPurpose::Lambda);
    RngStream other(7, 2, StreamPurpose::Lambda);
    (void)other.uniform();
    RngStream b(7, 3, StreamPurpose::Lambda);
    for (int i = 0; i < 10; ++i) CHECK(a.bits() == b.bits());
    CHECK(RngStream(7, 3, StreamPurpose::Lambda).seed() != RngStream(7, 3, StreamPurpose::Outcome).seed());
    std::set<std::uint64_t> seeds;
    for (std::uint64_t id = 0; id < 1000; ++id) seeds.insert(RngStream(1, id).seed());
    CHECK(seeds.size() == 1000);
    RngStream u(1, 0);
    for (int i = 0; i < 1000; ++i) {
      const double x = u.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
    }
  }
}
