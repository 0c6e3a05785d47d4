#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctmctail/errors.hpp"
#include "ctmctail/model.hpp"

using namespace ctmc;

namespace {

JumpModel bdp(PowerSum birth, PowerSum death) {
  JumpModel m;
  m.jumps.emplace(1, std::move(birth));
  m.jumps.emplace(-1, std::move(death));
  return m;
}

} // namespace

TEST_CASE("gcd and lattice membership") {
  JumpModel m;
  m.jumps.emplace(-2, PowerSum::from_terms({{1, 1}}));
  m.jumps.emplace(2, PowerSum::from_terms({{1, 0}}));
  m.jumps.emplace(4, PowerSum::from_terms({{1, 0}}));
  m.state_min = 4;
  CHECK(m.omega_star() == 2);
  CHECK(m.on_lattice(4));
  CHECK(m.on_lattice(8));
  CHECK_FALSE(m.on_lattice(5));
  CHECK_FALSE(m.on_lattice(2));
  CHECK(m.two_sided());
}

TEST_CASE("validation rejects degenerate rates") {
  JumpModel m = bdp(PowerSum::from_terms({}), PowerSum::from_terms({{1, 1}}));
  CHECK_THROWS_WITH_AS(validate(m), doctest::Contains("ValidationError"),
                       error);

  JumpModel m2 = bdp(PowerSum::from_terms({{-1, 2}, {100, 1}}),
                     PowerSum::from_terms({{1, 1}}));
  CHECK_THROWS_WITH_AS(validate(m2),
                       doctest::Contains("leading coefficient"), error);
}

TEST_CASE("validation checks absorbing closure on explicit values") {
  // positive birth rate at the absorbing state leaks out of the trap
  JumpModel m = bdp(PowerSum::from_terms({{1, 0}}),
                    PowerSum::from_terms({{1, 1}}));
  m.absorbing = {0};
  CHECK_THROWS_WITH_AS(validate(m), doctest::Contains("not closed"), error);

  JumpModel ok = bdp(PowerSum::from_terms({{1, 1}}),
                     PowerSum::from_terms({{1, 1}}));
  ok.absorbing = {0};
  CHECK_NOTHROW(validate(ok));
}

TEST_CASE("validation rejects rates leading below the state floor") {
  // constant death rate jumps from 0 to -1
  JumpModel m = bdp(PowerSum::from_terms({{1, 1}}),
                    PowerSum::from_terms({{1, 0}}));
  CHECK_THROWS_WITH_AS(validate(m), doctest::Contains("below state_min"),
                       error);
}

TEST_CASE("normalization rescales the jump lattice") {
  SUBCASE("gcd scaling with shifted minimum") {
    JumpModel m;
    m.jumps.emplace(-2, PowerSum::from_terms({{1, 1}}));
    m.jumps.emplace(2, PowerSum::from_terms({{1, 0}}));
    m.state_min = 4;
    NormalizedModel nm = normalize(m);
    CHECK(nm.model.jumps.count(-1) == 1);
    CHECK(nm.model.jumps.count(1) == 1);
    CHECK(nm.model.state_min == 0);
    CHECK(nm.map.scale == 2);
    CHECK(nm.map.shift == 4);
    CHECK(nm.map.to_original(3) == 10);
    CHECK(nm.map.to_normalized(10) == 3);
  }
  SUBCASE("already normalized model maps to itself") {
    JumpModel m = bdp(PowerSum::from_terms({{1, 1}}),
                      PowerSum::from_terms({{1, 1}}));
    NormalizedModel nm = normalize(m);
    CHECK(nm.map.scale == 1);
    CHECK(nm.map.shift == 0);
    CHECK(nm.model == m);
  }
}

TEST_CASE("normalized rates agree with the original at mapped states") {
  JumpModel m;
  m.jumps.emplace(-2, PowerSum::from_terms({{1, 2}, {1, 1}}));
  m.jumps.emplace(1, PowerSum::from_terms({{2, 1}}));
  m.state_min = 1;
  NormalizedModel nm = normalize(m);
  CHECK(nm.model.omega_star() == 1);
  for (long long x = 0; x <= 10000; ++x) {
    long long y = nm.map.to_original(x);
    for (const auto &[omega, rate] : m.jumps) {
      long long scaled = omega / nm.map.scale;
      CHECK(nm.model.rate(scaled, x) == m.rate(omega, y)); // exact
    }
  }
}

TEST_CASE("normalization carries overrides and absorbing states over") {
  JumpModel m;
  m.jumps.emplace(-2, PowerSum::from_terms({{1, 1}}, 4, {{2, 7.0}}));
  m.jumps.emplace(2, PowerSum::from_terms({{1, 0}}));
  m.state_min = 0;
  m.absorbing = {0, 2};
  NormalizedModel nm = normalize(m);
  CHECK(nm.model.absorbing == std::set<long long>{0, 1});
  CHECK(nm.model.rate(-1, 1) == 7.0);
  CHECK(nm.model.rate(-1, 0) == 0.0);
  CHECK(nm.model.rate(-1, 2) == m.rate(-2, 4));
}
