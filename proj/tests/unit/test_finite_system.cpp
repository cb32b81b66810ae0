#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "ergo/finite_system.hpp"

using namespace ergo;

namespace {

FiniteSystem two_point_swap() { return make_cycle(2); }

}  // namespace

TEST_CASE("validate: permutation with equal weights passes") {
  const FiniteSystem sys{{Rational(1, 2), Rational(1, 2)}, {1, 0}};
  CHECK(validate(sys).ok);
}

TEST_CASE("validate: mass conservation violated") {
  const FiniteSystem sys{{Rational(1, 2), Rational(1, 2)}, {0, 0}};
  const ValidationResult result = validate(sys);
  CHECK_FALSE(result.ok);
  REQUIRE(result.first_bad_point.has_value());
  CHECK(*result.first_bad_point == 0);  // preimage mass 1 != 1/2
}

TEST_CASE("validate: preimage weights summed by hand") {
  // Point 0 receives 1/2 + 1/4 = 3/4 != 1/2.
  const FiniteSystem sys{{Rational(1, 2), Rational(1, 4), Rational(1, 4)}, {0, 0, 1}};
  const ValidationResult result = validate(sys);
  CHECK_FALSE(result.ok);
  REQUIRE(result.first_bad_point.has_value());
  CHECK(*result.first_bad_point == 0);
}

TEST_CASE("validate: further rejections") {
  CHECK_FALSE(validate(FiniteSystem{{Rational(1)}, {5}}).ok);                  // out of range
  CHECK_FALSE(validate(FiniteSystem{{Rational(-1), Rational(2)}, {0, 1}}).ok); // negative
  CHECK_FALSE(validate(FiniteSystem{{Rational(1, 3), Rational(1, 3)}, {1, 0}}).ok);  // sum != 1
  CHECK_FALSE(validate(FiniteSystem{{}, {}}).ok);                              // empty
}

TEST_CASE("make_cycle basics") {
  CHECK_THROWS_AS(make_cycle(0), std::invalid_argument);
  const FiniteSystem one = make_cycle(1);
  CHECK(one.map == std::vector<std::size_t>{0});
  CHECK(one.weights[0] == 1);
  const FiniteSystem swap = two_point_swap();
  CHECK(swap.map == std::vector<std::size_t>({1, 0}));
  CHECK(validate(make_cycle(3)).ok);
}

TEST_CASE("make_random_preserving: validated and deterministic") {
  const FiniteSystem a = make_random_preserving(16, 7);
  const FiniteSystem b = make_random_preserving(16, 7);
  CHECK(a.map == b.map);
  CHECK(a.weights == b.weights);
  CHECK(validate(a).ok);

  const FiniteSystem one = make_random_preserving(1, 99);
  CHECK(one.map == std::vector<std::size_t>{0});
  CHECK(one.weights[0] == 1);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 1 + static_cast<std::size_t>(Rng(seed).below(64));
    CAPTURE(seed, n);
    REQUIRE(validate(make_random_preserving(n, seed)).ok);
  }
}

TEST_CASE("make_random_preserving covers non-invertible maps") {
  bool saw_noninvertible = false;
  for (std::uint64_t seed = 0; seed < 64 && !saw_noninvertible; ++seed) {
    const FiniteSystem sys = make_random_preserving(12, seed);
    std::set<std::size_t> images(sys.map.begin(), sys.map.end());
    if (images.size() < sys.size()) saw_noninvertible = true;
  }
  CHECK(saw_noninvertible);
}

TEST_CASE("orbit walks the map") {
  const FiniteSystem id{{Rational(1, 3), Rational(1, 3), Rational(1, 3)}, {0, 1, 2}};
  CHECK(orbit(id, 1, 3) == std::vector<std::size_t>({1, 1, 1}));
  CHECK(orbit(two_point_swap(), 0, 4) == std::vector<std::size_t>({0, 1, 0, 1}));
  CHECK_THROWS_AS(orbit(id, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(orbit(id, 9, 1), std::invalid_argument);
}

TEST_CASE("orbit(m+1) extends orbit(m) by one step") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FiniteSystem sys = make_random_preserving(17, seed);
    Rng rng(seed * 31 + 1);
    const auto x = static_cast<std::size_t>(rng.below(17));
    const auto m = static_cast<std::size_t>(1 + rng.below(40));
    std::vector<std::size_t> shorter = orbit(sys, x, m);
    const std::vector<std::size_t> longer = orbit(sys, x, m + 1);
    shorter.push_back(sys.map[shorter.back()]);
    CHECK(shorter == longer);
  }
}

TEST_CASE("orbit shape: preperiod + period <= n, transients weightless") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 1 + static_cast<std::size_t>(Rng(seed ^ 5).below(32));
    const FiniteSystem sys = make_random_preserving(n, seed);
    for (std::size_t x = 0; x < n; ++x) {
      const OrbitShape shape = orbit_shape(sys, x);
      CHECK(shape.preperiod + shape.period <= n);
      CHECK(shape.period >= 1);
      if (shape.preperiod > 0) {
        // x itself is transient, so measure preservation forces weight 0.
        CHECK(sys.weights[x] == 0);
      }
    }
  }
}

TEST_CASE("is_invariant examples") {
  const FiniteSystem swap = two_point_swap();
  CHECK(is_invariant(swap, constant_observable(2, Rational(5, 9))));
  CHECK_FALSE(is_invariant(swap, make_observable({Rational(1), Rational(0)})));
  const FiniteSystem id2{{Rational(1, 2), Rational(1, 2)}, {0, 1}};
  CHECK(is_invariant(id2, make_observable({Rational(3, 7), Rational(-2)})));
}

TEST_CASE("make_invariant: constant on cycles, independent across components") {
  const FiniteObservable on_cycle = make_invariant(make_cycle(5), 3);
  for (std::size_t i = 1; i < 5; ++i) CHECK(on_cycle.values[i] == on_cycle.values[0]);

  const FiniteSystem id3{{Rational(1, 3), Rational(1, 3), Rational(1, 3)}, {0, 1, 2}};
  bool all_equal = true;
  for (std::uint64_t seed = 0; seed < 8 && all_equal; ++seed) {
    const FiniteObservable lam = make_invariant(id3, seed);
    all_equal = lam.values[0] == lam.values[1] && lam.values[1] == lam.values[2];
  }
  CHECK_FALSE(all_equal);  // three independent values

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FiniteSystem sys = make_random_preserving(1 + seed % 24, seed);
    CHECK(is_invariant(sys, make_invariant(sys, seed + 1)));
  }
}

TEST_CASE("observable bound checking") {
  CHECK_THROWS_AS(make_observable({Rational(3)}, Rational(2)), std::invalid_argument);
  const FiniteObservable tight = make_observable({Rational(3), Rational(-5)});
  CHECK(tight.sup_bound == 5);
  const FiniteObservable declared = make_observable({Rational(1)}, Rational(10));
  CHECK(declared.sup_bound == 10);
}

TEST_CASE("doubling grid is the finite image of the doubling map") {
  const DoublingGrid grid = make_doubling_grid(11);
  CHECK(grid.system.size() == 10);
  CHECK(validate(grid.system).ok);
  // residue 1 -> 2 -> 4 -> 8 -> 5 -> 10 -> 9 -> 7 -> 3 -> 6 -> 1
  const std::vector<std::size_t> o = orbit(grid.system, 0, 11);
  CHECK(o == std::vector<std::size_t>({0, 1, 3, 7, 4, 9, 8, 6, 2, 5, 0}));
  CHECK_THROWS_AS(make_doubling_grid(10), std::invalid_argument);
  CHECK_THROWS_AS(make_doubling_grid(1), std::invalid_argument);
}
