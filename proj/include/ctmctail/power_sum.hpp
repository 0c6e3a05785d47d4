#pragma once

// Transition rate functions.
//
// A rate is one of
//   * a finite sum of c*x^r terms with real exponents ("sum"),
//   * a quotient of two integer-exponent polynomials ("quotient"),
//   * kappa * Gamma(x+xi)/Gamma(x) ("gamma_ratio", generalized mass action).
//
// All three expose the same interface: pointwise evaluation on integers
// (with a small-x override table below `valid_from`) and an exact truncated
// asymptotic series in descending powers of x, from which the hierarchical
// power triple (r1, r2, r3) and the coefficients (a, b) are extracted with
// the minimal-power convention.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctmc {

// Exponents within this distance are considered equal; exponents this close
// to an integer are snapped so that differences like r1 - r2 come out exact.
inline constexpr double kExpTol = 1e-12;

struct Term {
  double coeff = 0.0;
  double exponent = 0.0;
};

// Truncated asymptotic expansion sum_i c_i x^{e_i} + O(x^{err_order}),
// terms sorted by strictly decreasing exponent.  err_order == -inf means
// the expansion is exact (a finite power sum).
struct Series {
  std::vector<Term> terms;
  double err_order = -std::numeric_limits<double>::infinity();

  // Coefficient of x^e; exact as long as e lies above err_order.
  double coeff_at(double e) const;
  bool trusted_at(double e) const { return e > err_order + kExpTol; }
  double leading_exponent() const; // -inf when empty
  double leading_coeff() const;
};

Series series_add(const Series &a, const Series &b);
Series series_scale(const Series &a, double c);
Series series_mul(const Series &a, const Series &b);
// Expansion of (m*x + s)^r keeping `nterms` terms; exact when r is a
// non-negative integer or s == 0.
Series affine_pow(double r, long long m, long long s, int nterms = 3);
// Substitute x -> m*x + s into a series.
Series series_affine(const Series &a, long long m, long long s,
                     int nterms = 3);
void canonicalize(std::vector<Term> &terms);

// Hierarchical power triple with minimal powers: f = a x^{r1} + b x^{r2}
// + O(x^{r3}) and r2 + 1 >= r1 > r2 > r3 >= r1 - 2.
struct APLHTriple {
  double r1 = 0, r2 = 0, r3 = 0;
  double a = 0, b = 0;
  bool valid() const;
};

APLHTriple aplh_from_series(const Series &s);

class PowerSum {
public:
  enum class Kind { sum, quotient, gamma_ratio };

  PowerSum() = default;

  static PowerSum from_terms(std::vector<Term> terms, long long valid_from = 0,
                             std::map<long long, double> overrides = {});
  static PowerSum constant(double c) { return from_terms({{c, 0.0}}); }
  // num / den, both integer-exponent polynomials.
  static PowerSum quotient(std::vector<Term> num, std::vector<Term> den,
                           long long valid_from = 0,
                           std::map<long long, double> overrides = {});
  // kappa * Gamma(x+xi)/Gamma(x); evaluates to 0 at x = 0.
  static PowerSum gamma_ratio(double kappa, double xi, long long valid_from = 0,
                              std::map<long long, double> overrides = {});

  Kind kind() const { return kind_; }
  long long valid_from() const { return valid_from_; }
  const std::map<long long, double> &overrides() const { return overrides_; }

  // Pointwise value at integer x >= 0.  Below valid_from the override table
  // applies (absent key = 0).  Throws NegativeRate / ZeroPower.
  double evaluate(long long x) const;

  const Series &series() const { return series_; }
  APLHTriple aplh() const { return aplh_from_series(series_); }

  bool identically_zero() const { return series_.terms.empty(); }
  double leading_exponent() const { return series_.leading_exponent(); }
  double leading_coeff() const { return series_.leading_coeff(); }

  // Rate of the transformed chain x -> lambda(scale*x + shift).  Exact
  // term re-expansion for integer-exponent sums and quotients; other kinds
  // keep shifted-argument evaluation semantics and recompute their series.
  PowerSum with_affine_arg(long long scale, long long shift) const;

  // Term-wise sum (used when several declarations share one jump).  Both
  // operands must be plain sums unless one side is identically zero.
  PowerSum plus(const PowerSum &other) const;

  // Render in the model DSL (round-trips through the parser).
  std::string to_dsl() const;

  bool operator==(const PowerSum &other) const;

private:
  void rebuild_series();
  double evaluate_formula(long long x) const;

  Kind kind_ = Kind::sum;
  std::vector<Term> terms_;           // kind == sum
  std::vector<Term> num_, den_;       // kind == quotient
  double kappa_ = 0.0, xi_ = 0.0;     // kind == gamma_ratio
  long long arg_scale_ = 1, arg_shift_ = 0;
  long long valid_from_ = 0;
  std::map<long long, double> overrides_;
  Series series_;
};

} // namespace ctmc
