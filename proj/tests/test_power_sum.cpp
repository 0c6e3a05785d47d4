#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctmctail/errors.hpp"
#include "ctmctail/power_sum.hpp"

#include <cmath>
#include <random>

using namespace ctmc;

namespace {

// Test-local oracle: falling factorial x(x-1)...(x-n+1) expanded by direct
// convolution, independent of the library's expansion path.
std::vector<Term> ff_terms(int n) {
  std::vector<Term> poly = {{1.0, 0.0}};
  for (int i = 0; i < n; ++i) {
    std::vector<Term> next;
    for (const auto &t : poly) {
      next.push_back({t.coeff, t.exponent + 1.0});
      next.push_back({-static_cast<double>(i) * t.coeff, t.exponent});
    }
    canonicalize(next);
    poly = std::move(next);
  }
  return poly;
}

} // namespace

TEST_CASE("pointwise evaluation of plain power sums") {
  PowerSum f = PowerSum::from_terms({{1, 2}, {3, 1}, {4, 0}});
  CHECK(f.evaluate(2) == doctest::Approx(14).epsilon(1e-15));
  CHECK(f.evaluate(0) == doctest::Approx(4).epsilon(1e-15));

  PowerSum ff3 = PowerSum::from_terms(ff_terms(3));
  CHECK(ff3.evaluate(3) == doctest::Approx(6).epsilon(1e-15));
  CHECK(ff3.evaluate(2) == 0.0);
}

TEST_CASE("override table takes precedence below the cutoff") {
  // linear BDP death rate: d at 1, (d/2 + b)(x+1) from 2, with d = 2, b = 1
  PowerSum f = PowerSum::from_terms({{2, 1}, {2, 0}}, 2, {{1, 2.0}});
  CHECK(f.evaluate(1) == 2.0);
  CHECK(f.evaluate(2) == 6.0);
  CHECK(f.evaluate(0) == 0.0); // absent key below cutoff
}

TEST_CASE("zero power at x = 0 with negative exponent") {
  PowerSum f = PowerSum::from_terms({{1, 1}, {2, -1}});
  CHECK(f.evaluate(1) == doctest::Approx(3.0));
  CHECK_THROWS_WITH_AS(f.evaluate(0), doctest::Contains("ZeroPower"), error);
}

TEST_CASE("negative values in the formula domain are rejected") {
  PowerSum f = PowerSum::from_terms({{1, 1}, {-5, 0}});
  CHECK_THROWS_WITH_AS(f.evaluate(2), doctest::Contains("NegativeRate"),
                       error);
  CHECK(f.evaluate(7) == doctest::Approx(2.0));
}

TEST_CASE("minimal power extraction") {
  SUBCASE("full polynomial") {
    APLHTriple t = PowerSum::from_terms({{1, 2}, {3, 1}, {4, 0}}).aplh();
    CHECK(t.r1 == 2.0);
    CHECK(t.r2 == 1.0);
    CHECK(t.r3 == 0.0);
    CHECK(t.a == 1.0);
    CHECK(t.b == 3.0);
    CHECK(t.valid());
  }
  SUBCASE("single term pads with zero coefficients") {
    APLHTriple t = PowerSum::from_terms({{1, 2}}).aplh();
    CHECK(t.r1 == 2.0);
    CHECK(t.r2 == 1.0);
    CHECK(t.r3 == 0.0);
    CHECK(t.b == 0.0);
  }
  SUBCASE("falling factorial") {
    APLHTriple t = PowerSum::from_terms(ff_terms(3)).aplh();
    CHECK(t.r1 == 3.0);
    CHECK(t.r2 == 2.0);
    CHECK(t.r3 == 1.0);
    CHECK(t.a == 1.0);
    CHECK(t.b == -3.0);
  }
  SUBCASE("fractional second power") {
    APLHTriple t = PowerSum::from_terms({{2, 2}, {5, 1.5}}).aplh();
    CHECK(t.r1 == 2.0);
    CHECK(t.r2 == 1.5);
    CHECK(t.b == 5.0);
    CHECK(t.r3 == 0.0); // clamp at r1 - 2
  }
  SUBCASE("gap wider than one pads r2") {
    APLHTriple t = PowerSum::from_terms({{2, 2}, {5, 0.5}}).aplh();
    CHECK(t.r1 == 2.0);
    CHECK(t.r2 == 1.0);
    CHECK(t.b == 0.0);
    CHECK(t.r3 == 0.5);
  }
}

TEST_CASE("extraction is idempotent on two-term hierarchies") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.1, 4.0);
  for (int i = 0; i < 200; ++i) {
    double r1 = uni(rng);
    double r2 = r1 - 1.0 + 0.9 * (uni(rng) / 4.0); // within [r1-1, r1)
    double a = uni(rng), b = uni(rng) - 2.0;
    if (b == 0)
      b = 0.5;
    APLHTriple t = PowerSum::from_terms({{a, r1}, {b, r2}}).aplh();
    CHECK(t.r1 == doctest::Approx(r1).epsilon(1e-14));
    CHECK(t.r2 == doctest::Approx(r2).epsilon(1e-14));
    CHECK(t.a == doctest::Approx(a).epsilon(1e-14));
    CHECK(t.b == doctest::Approx(b).epsilon(1e-14));
  }
}

TEST_CASE("integer polynomials always extract adjacent powers") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> deg(1, 6);
  std::uniform_real_distribution<double> coeff(0.25, 3.0);
  for (int i = 0; i < 200; ++i) {
    int d = deg(rng);
    std::vector<Term> terms{{coeff(rng), static_cast<double>(d)}};
    for (int e = d - 1; e >= 0; --e)
      if (rng() % 2)
        terms.push_back({coeff(rng), static_cast<double>(e)});
    APLHTriple t = PowerSum::from_terms(terms).aplh();
    CHECK(t.r2 == doctest::Approx(t.r1 - 1.0));
    CHECK(t.r3 == doctest::Approx(t.r1 - 2.0));
    CHECK(t.valid());
  }
}

TEST_CASE("polynomial quotient rates") {
  // x / (x + 2) = 1 - 2/x + 4/x^2 + O(x^-3)
  PowerSum q = PowerSum::quotient({{1, 1}}, {{1, 1}, {2, 0}});
  CHECK(q.evaluate(2) == doctest::Approx(0.5));
  CHECK(q.evaluate(0) == 0.0);
  APLHTriple t = q.aplh();
  CHECK(t.r1 == 0.0);
  CHECK(t.r2 == -1.0);
  CHECK(t.r3 == -2.0);
  CHECK(t.a == 1.0);
  CHECK(t.b == -2.0);
  CHECK(q.series().coeff_at(-2.0) == doctest::Approx(4.0));
}

TEST_CASE("gamma ratio rates follow the rising factorial") {
  PowerSum g = PowerSum::gamma_ratio(1.0, 2.0);
  for (long long x = 1; x <= 20; ++x)
    CHECK(g.evaluate(x) ==
          doctest::Approx(static_cast<double>(x) * (x + 1)).epsilon(1e-12));
  CHECK(g.evaluate(0) == 0.0);
  APLHTriple t = g.aplh();
  CHECK(t.r1 == 2.0);
  CHECK(t.r2 == 1.0);
  CHECK(t.r3 == 0.0);
  CHECK(t.a == doctest::Approx(1.0));
  CHECK(t.b == doctest::Approx(1.0)); // xi (xi - 1) / 2 = 1

  PowerSum g2 = PowerSum::gamma_ratio(2.0, 2.5);
  APLHTriple t2 = g2.aplh();
  CHECK(t2.r1 == doctest::Approx(2.5));
  CHECK(t2.r2 == doctest::Approx(1.5));
  CHECK(t2.r3 == doctest::Approx(0.5));
  CHECK(t2.a == doctest::Approx(2.0));
  CHECK(t2.b == doctest::Approx(2.0 * 2.5 * 1.5 / 2.0));
  // large-x agreement with the lgamma evaluation
  long long x = 4000;
  double series_val = 0;
  for (const auto &term : g2.series().terms)
    series_val += term.coeff * std::pow(static_cast<double>(x), term.exponent);
  CHECK(g2.evaluate(x) == doctest::Approx(series_val).epsilon(1e-9));
}

TEST_CASE("argument shift folds exactly for integer polynomials") {
  PowerSum f = PowerSum::from_terms({{1, 2}, {3, 1}, {4, 0}});
  PowerSum g = f.with_affine_arg(1, 2);
  for (long long x = 0; x <= 10000; ++x)
    CHECK(g.evaluate(x) == f.evaluate(x + 2)); // bit-exact
  PowerSum h = f.with_affine_arg(2, 4);
  for (long long x = 0; x <= 5000; ++x)
    CHECK(h.evaluate(x) == f.evaluate(2 * x + 4));
}

TEST_CASE("argument shift keeps evaluation semantics for real exponents") {
  PowerSum f = PowerSum::from_terms({{1, 1.5}});
  PowerSum g = f.with_affine_arg(1, 1);
  for (long long x = 0; x <= 50; ++x)
    CHECK(g.evaluate(x) ==
          doctest::Approx(std::pow(x + 1.0, 1.5)).epsilon(1e-14));
  APLHTriple t = g.aplh();
  CHECK(t.r1 == doctest::Approx(1.5));
  CHECK(t.a == doctest::Approx(1.0));
  CHECK(t.b == doctest::Approx(1.5)); // binomial series coefficient
}

TEST_CASE("term-wise addition merges duplicate jump declarations") {
  PowerSum a = PowerSum::from_terms({{1, 2}, {1, 1}});
  PowerSum b = PowerSum::from_terms({{1, 1}});
  PowerSum c = a.plus(b);
  CHECK(c.evaluate(5) == doctest::Approx(35.0));
  CHECK(c.series().terms.size() == 2);
  CHECK(c.series().coeff_at(1.0) == doctest::Approx(2.0));
}

TEST_CASE("series arithmetic respects truncation orders") {
  Series a;
  a.terms = {{1.0, 1.0}};
  a.err_order = -2.0;
  Series b;
  b.terms = {{2.0, 0.5}};
  Series c = series_mul(a, b);
  CHECK(c.leading_exponent() == doctest::Approx(1.5));
  CHECK(c.err_order == doctest::Approx(-1.5));
  Series d = series_add(a, b);
  CHECK(d.terms.size() == 2);
  CHECK(d.err_order == doctest::Approx(-2.0));
}
