#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctmctail/asymptotics.hpp"
#include "ctmctail/errors.hpp"
#include "ctmctail/parse.hpp"

#include <numeric>
#include <random>
#include <set>

using namespace ctmc;

namespace {

JumpModel parse(const std::string &text) { return parse_model({text}); }

// Independent enumeration of the nested jump sets, read off the defining
// display: A_j = {w in O- : j w* > w} for j <= 0, {w in O+ : j w* <= w}
// for j >= 1.
std::set<long long> aj_oracle(const std::set<long long> &Omega, long long j,
                              long long ws) {
  std::set<long long> out;
  for (long long w : Omega) {
    if (j <= 0 && w < 0 && j * ws > w)
      out.insert(w);
    if (j >= 1 && w > 0 && j * ws <= w)
      out.insert(w);
  }
  return out;
}

JumpModel model_with_jumps(const std::set<long long> &Omega) {
  JumpModel m;
  for (long long w : Omega) {
    // keep the model valid: zero the rate where the jump would leave N0
    long long guard = w < 0 ? -w : 0;
    m.jumps.emplace(w, PowerSum::from_terms({{1.0, 1.0}}, guard, {}));
  }
  return m;
}

} // namespace

TEST_CASE("jump structure of a birth-death chain") {
  JumpStructure js =
      jump_structure(parse("jump -1: x^2 + x\njump +1: x^2"));
  CHECK(js.omega_star == 1);
  CHECK(js.omega_plus == 1);
  CHECK(js.omega_minus == -1);
  CHECK(js.A.at(0) == std::vector<long long>{-1});
  CHECK(js.A.at(1) == std::vector<long long>{1});
  CHECK(js.A.at(-1).empty());
  CHECK(js.A.at(2).empty());
}

TEST_CASE("jump structure with a double backward jump") {
  JumpStructure js = jump_structure(
      parse("statemin 1\njump -2: override 1 -> 0, 2 -> 0; x^3 from 3\n"
            "jump +1: x"));
  CHECK(js.omega_star == 1);
  CHECK(js.omega_plus == 1);
  CHECK(js.omega_minus == -2);
  CHECK(js.A.at(-1) == std::vector<long long>{-2});
  CHECK(js.A.at(0) == std::vector<long long>{-2});
  CHECK(js.A.at(1) == std::vector<long long>{1});
  CHECK(js.A.at(-2).empty());
  CHECK(js.A.at(2).empty());
}

TEST_CASE("jump structure with gcd scaling") {
  JumpModel m;
  m.jumps.emplace(-2, PowerSum::from_terms({{1, 1}}, 2, {}));
  m.jumps.emplace(2, PowerSum::from_terms({{1, 0}}));
  m.jumps.emplace(4, PowerSum::from_terms({{1, 0}}));
  JumpStructure js = jump_structure(m);
  CHECK(js.omega_star == 2);
  CHECK(js.omega_plus == 2);
  CHECK(js.omega_minus == -1);
  CHECK(js.A.at(1) == std::vector<long long>{2, 4});
  CHECK(js.A.at(2) == std::vector<long long>{4});
}

TEST_CASE("A_j sets match direct enumeration and nest monotonically") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<long long> Omega;
    int n = 2 + static_cast<int>(rng() % 5);
    while (static_cast<int>(Omega.size()) < n) {
      long long w = static_cast<long long>(rng() % 13) - 6;
      if (w != 0)
        Omega.insert(w);
    }
    JumpModel m = model_with_jumps(Omega);
    JumpStructure js = jump_structure(m);
    long long g = 0;
    for (long long w : Omega)
      g = std::gcd(g, w < 0 ? -w : w);
    CHECK(js.omega_star == g);
    for (const auto &[j, set] : js.A) {
      std::set<long long> got(set.begin(), set.end());
      CHECK(got == aj_oracle(Omega, j, js.omega_star));
    }
    for (long long j = js.omega_minus; j < 0; ++j) {
      std::set<long long> a(js.A.at(j).begin(), js.A.at(j).end());
      std::set<long long> b(js.A.at(j + 1).begin(), js.A.at(j + 1).end());
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
    for (long long j = 1; j <= js.omega_plus; ++j) {
      std::set<long long> a(js.A.at(j).begin(), js.A.at(j).end());
      std::set<long long> b(js.A.at(j + 1).begin(), js.A.at(j + 1).end());
      CHECK(std::includes(a.begin(), a.end(), b.begin(), b.end()));
    }
    CHECK(js.A.at(js.omega_minus).empty());
    CHECK(js.A.at(js.omega_plus + 1).empty());
  }
}

TEST_CASE("linear BDP with override reproduces the drift coefficient") {
  // lambda_1 = b x, lambda_-1(1) = d, lambda_-1 = (d/2 + b)(x+1) for x >= 2
  // with b = 1, d = 2: alpha = -d/2, R = R- = R+ = 1
  JumpModel m = parse("statemin 0\nabsorbing {0}\n"
                      "jump -1: override 1 -> 2; (2/2+1)*(x+1) from 2\n"
                      "jump +1: 1*x");
  AsymptoticParams p = compute_params(m);
  CHECK(p.R == doctest::Approx(1.0));
  CHECK(p.R_minus == doctest::Approx(1.0));
  CHECK(p.R_plus == doctest::Approx(1.0));
  CHECK(p.alpha == doctest::Approx(-1.0));
  CHECK(p.sigma1 == doctest::Approx(1.0));
  CHECK(p.sigma2 == doctest::Approx(2.0));
}

TEST_CASE("quotient rates shift the forward degree") {
  // lambda_1 = x/(x+2), lambda_-1 = x - 1 + 2/x
  JumpModel m = parse("absorbing {0}\njump +1: ratio(x ; x + 2)\n"
                      "jump -1: override 0 -> 0; x - 1 + 2*x^-1 from 1");
  AsymptoticParams p = compute_params(m);
  CHECK(p.R == doctest::Approx(1.0));
  CHECK(p.R_minus == doctest::Approx(1.0));
  CHECK(p.R_plus == doctest::Approx(0.0));
  CHECK(p.alpha == doctest::Approx(-1.0));
  CHECK(p.sigma1 == doctest::Approx(1.0));
  CHECK(p.sigma2 == doctest::Approx(2.0));
  CHECK(p.alpha_plus == doctest::Approx(1.0));
  CHECK(p.beta == doctest::Approx(1.0));
}

TEST_CASE("strongly connected reaction network drift") {
  // lambda_1 = k1 x + k2 x(x-1), lambda_-2 = k3 x(x-1)(x-2); the drift
  // definition weighs the -2 jump twice, so alpha = -2 k3 here.
  JumpModel m = parse_reactions(
      {"statemin 1\nS -> 2S @ 1\n2S -> 3S @ 1\n3S -> S @ 1"});
  AsymptoticParams p = compute_params(m);
  CHECK(p.R_plus == doctest::Approx(2.0));
  CHECK(p.R_minus == doctest::Approx(3.0));
  CHECK(p.R == doctest::Approx(3.0));
  CHECK(p.alpha == doctest::Approx(-2.0));
  CHECK(p.alpha_minus == doctest::Approx(2.0));
  CHECK(p.alpha_j.at(-1) == doctest::Approx(1.0));
  CHECK(p.alpha_j.at(0) == doctest::Approx(1.0));
}

TEST_CASE("one-sided models produce flagged partial parameters") {
  JumpModel m = parse("jump +1: x");
  AsymptoticParams p = compute_params(m);
  CHECK(p.has_plus);
  CHECK_FALSE(p.has_minus);
  CHECK_FALSE(p.two_sided());
  CHECK(p.R_plus == doctest::Approx(1.0));
}

TEST_CASE("consistency identities on hand-checked models") {
  SUBCASE("critical quadratic BDP") {
    JumpModel m = parse("jump +1: x^2\njump -1: x^2 + x");
    AsymptoticParams p = compute_params(m);
    JumpStructure js = jump_structure(m);
    CHECK(p.alpha == doctest::Approx(0.0));
    CHECK(p.alpha_j.at(1) == doctest::Approx(1.0));
    CHECK(p.alpha_j.at(0) == doctest::Approx(1.0));
    CHECK(p.alpha_plus == doctest::Approx(1.0));
    CHECK(p.alpha_minus == doctest::Approx(1.0));
    CHECK(p.vartheta == doctest::Approx(1.0));
    ConsistencyReport rep = lemma_consistency(p, js);
    CHECK(rep.ok);
    CHECK(rep.max_residual <= 1e-12);
    bool saw_theta = false;
    for (const auto &c : rep.checks)
      saw_theta |= c.name.find("vartheta") != std::string::npos;
    CHECK(saw_theta);
  }
  SUBCASE("double backward jump splits alpha_minus across A_j") {
    JumpModel m = parse_reactions(
        {"statemin 1\nS -> 2S @ 1\n2S -> 3S @ 1\n3S -> S @ 1"});
    AsymptoticParams p = compute_params(m);
    CHECK(p.alpha_minus ==
          doctest::Approx(p.alpha_j.at(-1) + p.alpha_j.at(0)));
    CHECK(lemma_consistency(p, jump_structure(m)).ok);
  }
  SUBCASE("single forward jump is its own group") {
    JumpModel m = parse("jump +1: 2*x\njump -1: 3*x");
    AsymptoticParams p = compute_params(m);
    CHECK(p.alpha_plus == doctest::Approx(p.alpha_j.at(1)));
  }
}

TEST_CASE("randomized polynomial models satisfy the splitting identities") {
  std::mt19937_64 rng(17);
  auto dyadic = [&] { return static_cast<double>(1 + rng() % 64) / 16.0; };
  int alpha_zero_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::set<long long> Omega;
    int n = 2 + static_cast<int>(rng() % 4);
    Omega.insert(-1 - static_cast<long long>(rng() % 2));
    Omega.insert(1 + static_cast<long long>(rng() % 2));
    while (static_cast<int>(Omega.size()) < n) {
      long long w = static_cast<long long>(rng() % 11) - 5;
      if (w != 0)
        Omega.insert(w);
    }
    long long R = 1 + static_cast<long long>(rng() % 4);
    bool force_alpha_zero = trial % 2 == 0;
    JumpModel m;
    double drift_rest = 0.0;
    long long last = *Omega.rbegin();
    for (long long w : Omega) {
      double lead = dyadic();
      if (force_alpha_zero && w == last) {
        double need = -drift_rest / static_cast<double>(w);
        if (need > 0)
          lead = need;
      }
      drift_rest += lead * static_cast<double>(w);
      std::vector<Term> terms{{lead, static_cast<double>(R)}};
      for (long long e = R - 1; e >= 0; --e)
        if (rng() % 2)
          terms.push_back({dyadic(), static_cast<double>(e)});
      long long guard = w < 0 ? -w : 0;
      m.jumps.emplace(w, PowerSum::from_terms(std::move(terms), guard, {}));
    }
    AsymptoticParams p = compute_params(m);
    ConsistencyReport rep = lemma_consistency(p, jump_structure(m));
    CHECK(rep.ok);
    CHECK(rep.max_residual <= 1e-12);
    if (std::abs(p.alpha) < 1e-13)
      ++alpha_zero_seen;
    CHECK(p.sigma1 == doctest::Approx(1.0));
    CHECK(p.sigma2 == doctest::Approx(2.0));
    if (p.R_minus == p.R_plus)
      CHECK(p.alpha ==
            doctest::Approx(p.alpha_plus - p.alpha_minus).epsilon(1e-12));
  }
  CHECK(alpha_zero_seen >= 50); // the second-moment identity was exercised
}

TEST_CASE("normalized models have unit gcd") {
  JumpModel m;
  m.jumps.emplace(-2, PowerSum::from_terms({{1, 1}}, 2, {}));
  m.jumps.emplace(4, PowerSum::from_terms({{1, 0}}));
  CHECK(jump_structure(normalize(m).model).omega_star == 1);
}

TEST_CASE("consistency checking requires a two-sided model") {
  JumpModel m = parse("jump +1: x");
  AsymptoticParams p = compute_params(m);
  CHECK_THROWS_WITH_AS(lemma_consistency(p, jump_structure(m)),
                       doctest::Contains("PartialParams"), error);
}
