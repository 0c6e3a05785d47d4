#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctmctail/analysis.hpp"
#include "ctmctail/errors.hpp"
#include "ctmctail/parse.hpp"
#include "ctmctail/solver.hpp"

#include <cmath>

using namespace ctmc;

namespace {

JumpModel parse(const std::string &text) { return parse_model({text}); }

double tv_distance(const DistVector &a, const DistVector &b) {
  long long lo = std::min(a.offset, b.offset);
  long long hi = std::max(a.last_state(), b.last_state());
  double acc = 0;
  for (long long x = lo; x <= hi; ++x)
    acc += std::abs(a.at(x) - b.at(x));
  return 0.5 * acc;
}

double poisson1(long long x) {
  return std::exp(-1.0 - std::lgamma(static_cast<double>(x) + 1.0));
}

} // namespace

TEST_CASE("truncated solve reproduces the Poisson stationary law") {
  JumpModel m = parse("jump +1: 1\njump -1: x");
  SolverConfig cfg;
  cfg.N = 50;
  DistVector d = solve_stationary_truncated(m, cfg);
  for (long long x = 0; x <= 20; ++x)
    CHECK(d.at(x) == doctest::Approx(poisson1(x)).epsilon(1e-10));
  CHECK(d.max_identity_residual <= 1e-10);
}

TEST_CASE("truncated solve reproduces the CMP stationary law") {
  // lambda_1 = a, lambda_-1 = x^b with a = 2, b = 2
  JumpModel m = parse("jump +1: 2\njump -1: x^2");
  SolverConfig cfg;
  cfg.N = 40;
  DistVector d = solve_stationary_truncated(m, cfg);
  DistVector ref = reference_dist({ReferenceSpec::Family::cmp, 2.0, 2.0}, 40);
  for (long long x = 0; x <= 40; ++x)
    CHECK(std::abs(d.at(x) - ref.at(x)) <= 1e-8);
}

TEST_CASE("window must cover the jump span") {
  JumpModel m = parse("jump +1: 1\njump -1: x");
  SolverConfig cfg;
  cfg.N = 2;
  CHECK_THROWS_WITH_AS(solve_stationary_truncated(m, cfg),
                       doctest::Contains("InvalidTruncation"), error);
}

TEST_CASE("recursive solve matches the BDP product formula") {
  JumpModel m = parse("jump +1: 1\njump -1: x");
  SolverConfig cfg;
  cfg.N = 60;
  cfg.seeds = {1.0};
  DistVector d = solve_stationary_recursive(m, cfg);
  for (long long x = 0; x <= 30; ++x)
    CHECK(d.at(x) == doctest::Approx(poisson1(x)).epsilon(1e-12));
}

TEST_CASE("recursive solve rejects wrong seed counts") {
  JumpModel m = parse("jump +1: 1\njump -1: x");
  SolverConfig cfg;
  cfg.N = 60;
  cfg.seeds = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(solve_stationary_recursive(m, cfg),
                       doctest::Contains("SeedDimension"), error);
}

TEST_CASE("recursive and truncated solvers agree on multi-jump networks") {
  JumpModel m = parse_reactions(
      {"statemin 1\nS -> 2S @ 1\n2S -> 3S @ 1\n3S -> S @ 1"});
  SolverConfig cfg;
  cfg.N = 200;
  DistVector oracle = solve_stationary_truncated(m, cfg);
  std::vector<long long> slots = undetermined_states(m, cfg.N);
  NormalizedModel nm = normalize(m);
  for (long long s : slots)
    cfg.seeds.push_back(oracle.at(nm.map.to_original(s)));
  DistVector rec = solve_stationary_recursive(m, cfg);
  CHECK(tv_distance(rec, oracle) <= 1e-8);
}

TEST_CASE("bdp closed form equals the linear solve") {
  PowerSum birth = PowerSum::from_terms({{2, 0}});
  PowerSum death = PowerSum::from_terms({{1, 2}});
  SolverConfig cfg;
  cfg.N = 60;
  DistVector prod = bdp_stationary(birth, death, cfg);
  DistVector lin =
      solve_stationary_truncated(parse("jump +1: 2\njump -1: x^2"), cfg);
  for (long long x = 0; x <= 60; ++x)
    CHECK(std::abs(prod.at(x) - lin.at(x)) <= 1e-12);
}

TEST_CASE("bdp closed form flags dead rates in the product") {
  PowerSum birth = PowerSum::from_terms({{1, 1}}); // b(0) = 0
  PowerSum death = PowerSum::from_terms({{1, 1}});
  SolverConfig cfg;
  cfg.N = 10;
  CHECK_THROWS_WITH_AS(bdp_stationary(birth, death, cfg),
                       doctest::Contains("ZeroRateInProduct"), error);
}

TEST_CASE("QSD of the logistic-type linear BDP has the Zeta-like form") {
  // nu(x) = 1/(x(x+1)) for lambda_1 = x, lambda_-1(1) = 2, 2(x+1) above
  JumpModel m = parse("statemin 0\nabsorbing {0}\n"
                      "jump -1: override 1 -> 2; (2/2+1)*(x+1) from 2\n"
                      "jump +1: 1*x");
  SolverConfig cfg;
  cfg.N = 2000;
  cfg.tolerance = 1e-5;
  DistVector d = solve_qsd(m, cfg);
  REQUIRE(d.theta);
  for (long long x = 1; x <= 50; ++x)
    CHECK(std::abs(d.at(x) - 1.0 / (static_cast<double>(x) * (x + 1))) <=
          2e-6);
  CHECK(*d.theta == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(theta_from_dist(m, d) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("QSD of the linear BDP is geometric") {
  // b = 1, d1 = 2: nu(x) = (1/2)^{x-1} (1/2), theta = d1 - b = 1
  JumpModel m = parse("absorbing {0}\njump +1: x\njump -1: 2*x");
  SolverConfig cfg;
  cfg.N = 400;
  DistVector d = solve_qsd(m, cfg);
  for (long long x = 1; x <= 40; ++x)
    CHECK(std::abs(d.at(x) - std::pow(0.5, x)) <= 1e-10);
  CHECK(*d.theta == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("QSD of the quadratic BDP is 2^-x") {
  JumpModel m = parse("absorbing {0}\n"
                      "jump +1: 0.5*x^2 + 1.5*x\njump -1: x^2 + x");
  SolverConfig cfg;
  cfg.N = 300;
  DistVector d = solve_qsd(m, cfg);
  for (long long x = 1; x <= 30; ++x)
    CHECK(std::abs(d.at(x) - std::pow(2.0, -static_cast<double>(x))) <= 1e-8);
}

TEST_CASE("QSD with Poisson-like tail from rational rates") {
  // lambda_1 = x/(x+2), lambda_-1 = x - 1 + 2/x; nu(x) = 1/((x-1)! (x+1))
  JumpModel m = parse("absorbing {0}\njump +1: ratio(x ; x + 2)\n"
                      "jump -1: override 0 -> 0; x - 1 + 2*x^-1 from 1");
  SolverConfig cfg;
  cfg.N = 400;
  DistVector d = solve_qsd(m, cfg);
  for (long long x = 1; x <= 20; ++x) {
    double expect = std::exp(-std::lgamma(static_cast<double>(x))) / (x + 1.0);
    CHECK(std::abs(d.at(x) - expect) <= 1e-8);
  }
}

TEST_CASE("QSD solver demands an absorbing set") {
  JumpModel m = parse("jump +1: x\njump -1: 2*x");
  SolverConfig cfg;
  CHECK_THROWS_WITH_AS(solve_qsd(m, cfg),
                       doctest::Contains("EmptyAbsorbingSet"), error);
}

TEST_CASE("power iteration agrees with inverse iteration") {
  JumpModel m = parse("absorbing {0}\njump +1: x\njump -1: 2*x");
  SolverConfig cfg;
  cfg.N = 120;
  DistVector inv = solve_qsd(m, cfg);
  cfg.qsd_method = QsdMethod::power_iteration;
  cfg.max_iterations = 40000;
  DistVector pow_it = solve_qsd(m, cfg);
  CHECK(tv_distance(inv, pow_it) <= 1e-7);
  CHECK(*inv.theta == doctest::Approx(*pow_it.theta).epsilon(1e-6));
}

TEST_CASE("reference distributions") {
  SUBCASE("cmp(a,1) is poisson(a)") {
    DistVector c = reference_dist({ReferenceSpec::Family::cmp, 3.0, 1.0}, 80);
    DistVector p =
        reference_dist({ReferenceSpec::Family::poisson, 3.0, 0}, 80);
    for (long long x = 0; x <= 80; ++x)
      CHECK(c.at(x) == doctest::Approx(p.at(x)).epsilon(1e-12));
  }
  SUBCASE("zeta tail sums the power law") {
    DistVector z =
        reference_dist({ReferenceSpec::Family::zeta, 2.0, 0}, 20000);
    std::vector<double> t = z.tails();
    double norm = 0;
    for (long long y = 1; y <= 20000; ++y)
      norm += std::pow(static_cast<double>(y), -2.0);
    for (long long x : {10LL, 100LL, 1000LL}) {
      double direct = 0;
      for (long long y = x; y <= 20000; ++y)
        direct += std::pow(static_cast<double>(y), -2.0) / norm;
      CHECK(t[static_cast<std::size_t>(x - 1)] ==
            doctest::Approx(direct).epsilon(1e-9));
    }
  }
  SUBCASE("negative binomial mass function") {
    double a = 1.5, delta = 0.4;
    DistVector nb = reference_dist(
        {ReferenceSpec::Family::negative_binomial, a, delta}, 200);
    for (long long x = 0; x <= 20; ++x) {
      double expect = std::exp(std::lgamma(x + a) - std::lgamma(x + 1.0) -
                               std::lgamma(a)) *
                      std::pow(delta, static_cast<double>(x)) *
                      std::pow(1 - delta, a);
      CHECK(nb.at(x) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("parameter domains are enforced") {
    CHECK_THROWS_WITH_AS(
        reference_dist({ReferenceSpec::Family::zeta, 1.0, 0}, 10),
        doctest::Contains("ParameterDomain"), error);
    CHECK_THROWS_WITH_AS(
        reference_dist({ReferenceSpec::Family::geometric, 1.5, 0}, 10),
        doctest::Contains("ParameterDomain"), error);
  }
}

TEST_CASE("identity residuals stay within the solver contract") {
  const char *fixtures[] = {
      "jump +1: 1\njump -1: x",
      "jump +1: 2\njump -1: x^2",
      "statemin 1\nS -> 2S @ 1\n2S -> 3S @ 1\n3S -> S @ 1",
      "jump +1: x^2 + 1\njump -1: x^2 + 2*x",
  };
  for (const char *f : fixtures) {
    SolverConfig cfg;
    cfg.N = 300;
    DistVector d = solve_stationary_truncated(parse(f), cfg);
    CHECK(d.max_identity_residual <= 10 * cfg.tolerance);
  }
}

TEST_CASE("increasing the window never hurts the identity residual") {
  JumpModel m = parse("jump +1: x^2 + 1\njump -1: x^2 + 2*x");
  double prev = 1.0;
  for (long long N : {100LL, 400LL, 1600LL}) {
    SolverConfig cfg;
    cfg.N = N;
    DistVector d = solve_stationary_truncated(m, cfg);
    CHECK(d.max_identity_residual <= prev * 1.000001);
    prev = d.max_identity_residual;
  }
}

TEST_CASE("theta is positive for every converged QSD") {
  const char *fixtures[] = {
      "absorbing {0}\njump +1: x\njump -1: 2*x",
      "absorbing {0}\njump +1: 0.5*x^2 + 1.5*x\njump -1: x^2 + x",
      "absorbing {0}\njump +1: ratio(x ; x + 2)\n"
      "jump -1: override 0 -> 0; x - 1 + 2*x^-1 from 1",
  };
  for (const char *f : fixtures) {
    SolverConfig cfg;
    cfg.N = 200;
    DistVector d = solve_qsd(parse(f), cfg);
    CHECK(*d.theta > 0);
  }
}
