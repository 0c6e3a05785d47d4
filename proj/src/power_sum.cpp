#include "ctmctail/power_sum.hpp"

#include "ctmctail/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ctmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double snap_exponent(double e) {
  double r = std::round(e);
  return std::abs(e - r) <= kExpTol ? r : e;
}

bool is_nonneg_int(double e) {
  return e >= -kExpTol && std::abs(e - std::round(e)) <= kExpTol;
}

// x^r for integer x >= 0.  Integer exponents use repeated multiplication.
double pow_int_arg(double x, double r) {
  if (std::abs(r - std::round(r)) <= kExpTol) {
    long long n = llround(r);
    if (n >= 0) {
      double acc = 1.0;
      for (long long i = 0; i < n; ++i)
        acc *= x;
      return acc;
    }
    if (x == 0.0)
      fail(errc::validation, "ZeroPower",
           "negative exponent evaluated at x = 0");
    double acc = 1.0;
    for (long long i = 0; i < -n; ++i)
      acc *= x;
    return 1.0 / acc;
  }
  if (x == 0.0) {
    if (r > 0)
      return 0.0;
    fail(errc::validation, "ZeroPower",
         "negative exponent evaluated at x = 0");
  }
  return std::exp(r * std::log(x));
}

double binom(double r, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i)
    acc *= (r - i) / (i + 1);
  return acc;
}

std::vector<Term> poly_mul(const std::vector<Term> &a,
                           const std::vector<Term> &b) {
  std::vector<Term> out;
  out.reserve(a.size() * b.size());
  for (const auto &ta : a)
    for (const auto &tb : b)
      out.push_back({ta.coeff * tb.coeff, ta.exponent + tb.exponent});
  canonicalize(out);
  return out;
}

std::vector<Term> poly_sub(std::vector<Term> a, const std::vector<Term> &b) {
  for (const auto &tb : b)
    a.push_back({-tb.coeff, tb.exponent});
  canonicalize(a);
  return a;
}

// Exact re-expansion of p(m*x + s) for a polynomial with non-negative
// integer exponents.
std::vector<Term> poly_affine(const std::vector<Term> &p, long long m,
                              long long s) {
  std::vector<Term> out;
  for (const auto &t : p) {
    int n = static_cast<int>(llround(t.exponent));
    for (int k = 0; k <= n; ++k) {
      double c = t.coeff * binom(static_cast<double>(n), k) *
                 std::pow(static_cast<double>(m), n - k) *
                 std::pow(static_cast<double>(s), k);
      out.push_back({c, static_cast<double>(n - k)});
    }
  }
  canonicalize(out);
  return out;
}

// First `nterms` series terms of num/den (descending powers).
Series poly_div_series(std::vector<Term> num, const std::vector<Term> &den,
                       int nterms) {
  if (den.empty())
    fail(errc::validation, "ZeroDenominator",
         "rate quotient with identically zero denominator");
  Series out;
  std::vector<Term> rem = std::move(num);
  canonicalize(rem);
  for (int i = 0; i < nterms && !rem.empty(); ++i) {
    Term q{rem.front().coeff / den.front().coeff,
           rem.front().exponent - den.front().exponent};
    out.terms.push_back(q);
    rem = poly_sub(std::move(rem), poly_mul({q}, den));
  }
  if (!rem.empty())
    out.err_order = rem.front().exponent - den.front().exponent;
  canonicalize(out.terms);
  return out;
}

// kappa * Gamma(y+xi)/Gamma(y) ~ kappa * y^xi (1 + b1/y + b2/y^2 + O(y^-3)).
Series gamma_ratio_series(double kappa, double xi) {
  double b1 = xi * (xi - 1.0) / 2.0;
  double b2 = xi * (xi - 1.0) * (3.0 * (xi - 1.0) * (xi - 1.0) - (xi + 1.0)) /
              24.0;
  Series s;
  s.terms = {{kappa, xi}, {kappa * b1, xi - 1.0}, {kappa * b2, xi - 2.0}};
  canonicalize(s.terms);
  s.err_order = xi - 3.0;
  return s;
}

} // namespace

void canonicalize(std::vector<Term> &terms) {
  for (auto &t : terms)
    t.exponent = snap_exponent(t.exponent);
  std::sort(terms.begin(), terms.end(), [](const Term &a, const Term &b) {
    return a.exponent > b.exponent;
  });
  std::vector<Term> merged;
  for (const auto &t : terms) {
    if (!merged.empty() &&
        std::abs(merged.back().exponent - t.exponent) <= kExpTol)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term &t) { return t.coeff == 0.0; });
  terms = std::move(merged);
}

double Series::coeff_at(double e) const {
  for (const auto &t : terms)
    if (std::abs(t.exponent - e) <= kExpTol)
      return t.coeff;
  return 0.0;
}

double Series::leading_exponent() const {
  return terms.empty() ? kNegInf : terms.front().exponent;
}

double Series::leading_coeff() const {
  return terms.empty() ? 0.0 : terms.front().coeff;
}

Series series_add(const Series &a, const Series &b) {
  Series out;
  out.err_order = std::max(a.err_order, b.err_order);
  out.terms = a.terms;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  canonicalize(out.terms);
  std::erase_if(out.terms, [&](const Term &t) {
    return t.exponent <= out.err_order + kExpTol;
  });
  return out;
}

Series series_scale(const Series &a, double c) {
  if (c == 0.0)
    return {};
  Series out = a;
  for (auto &t : out.terms)
    t.coeff *= c;
  return out;
}

Series series_mul(const Series &a, const Series &b) {
  Series out;
  out.err_order = kNegInf;
  if (a.err_order > kNegInf)
    out.err_order = std::max(out.err_order, a.err_order + b.leading_exponent());
  if (b.err_order > kNegInf)
    out.err_order = std::max(out.err_order, b.err_order + a.leading_exponent());
  for (const auto &ta : a.terms)
    for (const auto &tb : b.terms)
      out.terms.push_back({ta.coeff * tb.coeff, ta.exponent + tb.exponent});
  canonicalize(out.terms);
  std::erase_if(out.terms, [&](const Term &t) {
    return t.exponent <= out.err_order + kExpTol;
  });
  return out;
}

Series affine_pow(double r, long long m, long long s, int nterms) {
  Series out;
  if (s == 0) {
    out.terms = {{std::pow(static_cast<double>(m), r), r}};
    return out;
  }
  if (is_nonneg_int(r)) {
    int n = static_cast<int>(llround(r));
    for (int k = 0; k <= n; ++k)
      out.terms.push_back({binom(static_cast<double>(n), k) *
                               std::pow(static_cast<double>(m), n - k) *
                               std::pow(static_cast<double>(s), k),
                           static_cast<double>(n - k)});
    canonicalize(out.terms);
    return out;
  }
  double ratio = static_cast<double>(s) / static_cast<double>(m);
  double lead = std::pow(static_cast<double>(m), r);
  for (int k = 0; k < nterms; ++k)
    out.terms.push_back({lead * binom(r, k) * std::pow(ratio, k), r - k});
  out.err_order = r - nterms;
  canonicalize(out.terms);
  return out;
}

Series series_affine(const Series &a, long long m, long long s, int nterms) {
  Series out;
  out.err_order = a.err_order; // (m x + s)^e = Theta(x^e)
  for (const auto &t : a.terms)
    out = series_add(out, series_scale(affine_pow(t.exponent, m, s, nterms),
                                       t.coeff));
  return out;
}

bool APLHTriple::valid() const {
  return a > 0 && r2 + 1 >= r1 - kExpTol && r1 > r2 + kExpTol &&
         r2 > r3 + kExpTol && r3 >= r1 - 2 - kExpTol;
}

APLHTriple aplh_from_series(const Series &s) {
  if (s.terms.empty())
    fail(errc::precondition, "EmptyRate",
         "cannot extract powers from an identically zero rate");
  APLHTriple t;
  t.r1 = s.terms.front().exponent;
  t.a = s.terms.front().coeff;
  std::size_t i = 1;
  if (i < s.terms.size() && s.terms[i].exponent >= t.r1 - 1.0 - kExpTol) {
    t.r2 = s.terms[i].exponent;
    t.b = s.terms[i].coeff;
    ++i;
  } else {
    t.r2 = t.r1 - 1.0;
    t.b = 0.0;
  }
  double r3_cand = i < s.terms.size() ? s.terms[i].exponent : kNegInf;
  t.r3 = std::max(r3_cand, t.r1 - 2.0);
  return t;
}

PowerSum PowerSum::from_terms(std::vector<Term> terms, long long valid_from,
                              std::map<long long, double> overrides) {
  PowerSum p;
  p.kind_ = Kind::sum;
  canonicalize(terms);
  p.terms_ = std::move(terms);
  p.valid_from_ = valid_from;
  p.overrides_ = std::move(overrides);
  p.rebuild_series();
  return p;
}

PowerSum PowerSum::quotient(std::vector<Term> num, std::vector<Term> den,
                            long long valid_from,
                            std::map<long long, double> overrides) {
  canonicalize(num);
  canonicalize(den);
  for (const auto &t : num)
    if (!is_nonneg_int(t.exponent))
      fail(errc::validation, "ValidationError",
           "ratio() numerator must be a polynomial with integer exponents");
  for (const auto &t : den)
    if (!is_nonneg_int(t.exponent))
      fail(errc::validation, "ValidationError",
           "ratio() denominator must be a polynomial with integer exponents");
  PowerSum p;
  p.kind_ = Kind::quotient;
  p.num_ = std::move(num);
  p.den_ = std::move(den);
  p.valid_from_ = valid_from;
  p.overrides_ = std::move(overrides);
  p.rebuild_series();
  return p;
}

PowerSum PowerSum::gamma_ratio(double kappa, double xi, long long valid_from,
                               std::map<long long, double> overrides) {
  if (xi <= 0)
    fail(errc::validation, "ParameterDomain",
         "gammaratio index must be positive");
  PowerSum p;
  p.kind_ = Kind::gamma_ratio;
  p.kappa_ = kappa;
  p.xi_ = xi;
  p.valid_from_ = valid_from;
  p.overrides_ = std::move(overrides);
  p.rebuild_series();
  return p;
}

void PowerSum::rebuild_series() {
  switch (kind_) {
  case Kind::sum: {
    Series base;
    base.terms = terms_;
    if (arg_scale_ == 1 && arg_shift_ == 0)
      series_ = base;
    else
      series_ = series_affine(base, arg_scale_, arg_shift_);
    break;
  }
  case Kind::quotient:
    series_ = poly_div_series(num_, den_, 3);
    break;
  case Kind::gamma_ratio:
    series_ = series_affine(gamma_ratio_series(kappa_, xi_), arg_scale_,
                            arg_shift_);
    break;
  }
}

double PowerSum::evaluate_formula(long long x) const {
  double y = static_cast<double>(arg_scale_ * x + arg_shift_);
  switch (kind_) {
  case Kind::sum: {
    double acc = 0.0;
    for (const auto &t : terms_)
      acc += t.coeff * pow_int_arg(y, t.exponent);
    return acc;
  }
  case Kind::quotient: {
    double n = 0.0, d = 0.0;
    for (const auto &t : num_)
      n += t.coeff * pow_int_arg(y, t.exponent);
    for (const auto &t : den_)
      d += t.coeff * pow_int_arg(y, t.exponent);
    if (d == 0.0)
      fail(errc::validation, "ZeroDenominator",
           "rate quotient denominator vanishes at x = " + std::to_string(x));
    return n / d;
  }
  case Kind::gamma_ratio: {
    if (y <= 0.0)
      return 0.0; // Gamma(y) pole: the ratio tends to 0
    return kappa_ * std::exp(std::lgamma(y + xi_) - std::lgamma(y));
  }
  }
  return 0.0;
}

double PowerSum::evaluate(long long x) const {
  if (x < 0)
    fail(errc::invalid_argument, "InvalidArgument",
         "rate evaluated at negative state");
  if (x < valid_from_) {
    auto it = overrides_.find(x);
    return it == overrides_.end() ? 0.0 : it->second;
  }
  double v = evaluate_formula(x);
  if (v < 0.0) {
    if (v > -1e-12)
      return 0.0;
    fail(errc::validation, "NegativeRate",
         "rate is negative at x = " + std::to_string(x));
  }
  return v;
}

PowerSum PowerSum::with_affine_arg(long long scale, long long shift) const {
  if (scale < 1)
    fail(errc::invalid_argument, "InvalidArgument",
         "argument scale must be positive");
  PowerSum p = *this;
  // Compose with any existing transform: base(old_scale*(scale*x+shift)+old_shift).
  long long m = arg_scale_ * scale;
  long long s = arg_scale_ * shift + arg_shift_;
  p.arg_scale_ = m;
  p.arg_shift_ = s;

  // Fold exactly where the representation allows it.
  if (kind_ == Kind::sum) {
    bool all_int = std::all_of(terms_.begin(), terms_.end(), [](const Term &t) {
      return is_nonneg_int(t.exponent);
    });
    if (all_int) {
      p.terms_ = poly_affine(terms_, m, s);
      p.arg_scale_ = 1;
      p.arg_shift_ = 0;
    }
  } else if (kind_ == Kind::quotient) {
    p.num_ = poly_affine(num_, m, s);
    p.den_ = poly_affine(den_, m, s);
    p.arg_scale_ = 1;
    p.arg_shift_ = 0;
  }

  // Remap the explicit small-x region: new cutoff is the least x' with
  // scale*x' + shift >= valid_from.
  long long vf = valid_from_ - shift;
  long long new_vf = vf <= 0 ? 0 : (vf + scale - 1) / scale;
  p.valid_from_ = new_vf;
  p.overrides_.clear();
  for (long long xp = 0; xp < new_vf; ++xp) {
    double v = evaluate(scale * xp + shift);
    if (v != 0.0)
      p.overrides_[xp] = v;
  }
  p.rebuild_series();
  return p;
}

PowerSum PowerSum::plus(const PowerSum &other) const {
  if (identically_zero())
    return other;
  if (other.identically_zero())
    return *this;
  if (kind_ != Kind::sum || other.kind_ != Kind::sum ||
      arg_scale_ != other.arg_scale_ || arg_shift_ != other.arg_shift_)
    fail(errc::validation, "ValidationError",
         "cannot merge non-polynomial rates declared for the same jump");
  std::vector<Term> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  long long vf = std::max(valid_from_, other.valid_from_);
  std::map<long long, double> ov;
  for (long long x = 0; x < vf; ++x) {
    double v = evaluate(x) + other.evaluate(x);
    if (v != 0.0)
      ov[x] = v;
  }
  return from_terms(std::move(terms), vf, std::move(ov));
}

bool PowerSum::operator==(const PowerSum &other) const {
  auto term_eq = [](const std::vector<Term> &a, const std::vector<Term> &b) {
    if (a.size() != b.size())
      return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].coeff != b[i].coeff || a[i].exponent != b[i].exponent)
        return false;
    return true;
  };
  return kind_ == other.kind_ && term_eq(terms_, other.terms_) &&
         term_eq(num_, other.num_) && term_eq(den_, other.den_) &&
         kappa_ == other.kappa_ && xi_ == other.xi_ &&
         arg_scale_ == other.arg_scale_ && arg_shift_ == other.arg_shift_ &&
         valid_from_ == other.valid_from_ && overrides_ == other.overrides_;
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string poly_to_dsl(const std::vector<Term> &terms) {
  if (terms.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto &t : terms) {
    double c = t.coeff;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      c = std::abs(c);
    }
    first = false;
    if (t.exponent == 0.0) {
      os << fmt_num(c);
    } else {
      os << fmt_num(c) << "*x";
      if (t.exponent != 1.0)
        os << "^" << fmt_num(t.exponent);
    }
  }
  return os.str();
}

} // namespace

std::string PowerSum::to_dsl() const {
  if (arg_scale_ != 1 || arg_shift_ != 0)
    fail(errc::internal, "Internal",
         "cannot render a rate with composed argument transform");
  std::ostringstream os;
  if (!overrides_.empty()) {
    os << "override ";
    bool first = true;
    for (const auto &[x, v] : overrides_) {
      if (!first)
        os << ", ";
      first = false;
      os << x << " -> " << fmt_num(v);
    }
    os << "; ";
  }
  switch (kind_) {
  case Kind::sum:
    os << poly_to_dsl(terms_);
    break;
  case Kind::quotient:
    os << "ratio(" << poly_to_dsl(num_) << " ; " << poly_to_dsl(den_) << ")";
    break;
  case Kind::gamma_ratio:
    os << fmt_num(kappa_) << "*gammaratio(" << fmt_num(xi_) << ")";
    break;
  }
  if (valid_from_ > 0)
    os << " from " << valid_from_;
  return os.str();
}

} // namespace ctmc
