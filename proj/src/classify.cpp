#include "ctmctail/classify.hpp"

#include "ctmctail/errors.hpp"
#include "ctmctail/numeric.hpp"

#include <cmath>
#include <sstream>

namespace ctmc {

const char *regime_name(Regime r) {
  switch (r) {
  case Regime::NoUnboundedStationary:
    return "NoUnboundedStationary";
  case Regime::CMPLike:
    return "CMPLike";
  case Regime::Exponential:
    return "Exponential";
  case Regime::StretchedExponential:
    return "StretchedExponential";
  case Regime::PowerLaw:
    return "PowerLaw";
  case Regime::LowerBoundOnly:
    return "LowerBoundOnly";
  case Regime::GapIndeterminate:
    return "GapIndeterminate";
  case Regime::NoQSDPossible:
    return "NoQSDPossible";
  }
  return "?";
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Boundary warning helper: flags |value| within 10x of the equality
// tolerance without being treated as zero.
void warn_near(std::vector<std::string> &warnings, const char *what, double v,
               double scale) {
  double m = std::max({1.0, std::abs(v), std::abs(scale)});
  if (!near_zero(v, scale) && std::abs(v) <= 10.0 * kRelTol * m)
    warnings.push_back(std::string("NearBoundary: ") + what + " margin " +
                       fmt(v));
}

} // namespace

TailClassification classify_stationary(const AsymptoticParams &p) {
  if (!p.two_sided())
    fail(errc::precondition, "PartialParams",
         "stationary classification needs jumps in both directions; use the "
         "support obstruction report for one-sided models");

  TailClassification out;
  double coeff_scale = std::max(p.alpha_plus, p.alpha_minus);
  bool alpha_zero = near_zero(p.alpha, coeff_scale);
  bool sigma1_one = std::abs(p.sigma1 - 1.0) <= kExpTol;
  bool degrees_eq = near_eq(p.R_minus, p.R_plus, std::max(1.0, p.R));
  double ws = static_cast<double>(p.omega_star);

  warn_near(out.warnings, "alpha", p.alpha, coeff_scale);

  if (!alpha_zero && p.alpha > 0) {
    out.regime = Regime::NoUnboundedStationary;
    out.clauses.push_back(
        "alpha > 0: no stationary distribution with unbounded support "
        "(theorem requires alpha <= 0)");
    return out;
  }

  if (!degrees_eq && p.R_minus > p.R_plus) { // case (i)
    out.regime = Regime::CMPLike;
    double drop = p.R_minus - p.R_plus;
    out.upper = DecayBound{"x log x",
                           drop / (static_cast<double>(p.omega_plus) * ws)};
    out.lower = DecayBound{"x log x", drop / ws};
    out.clauses.push_back("(i) R- > R+: CMP-like bracket");
    return out;
  }

  if (!alpha_zero) { // case (ii), alpha < 0 with equal degrees
    out.regime = Regime::Exponential;
    double rate_low = std::log(p.alpha_minus / p.alpha_plus);
    double span = static_cast<double>(p.omega_plus - p.omega_minus - 1);
    out.lower = DecayBound{"x^a", 1.0, rate_low};
    out.upper = DecayBound{"x^a", 1.0, rate_low / span};
    out.clauses.push_back("(ii) R- = R+ and alpha < 0: exponential tail");
    return out;
  }

  // alpha == 0 from here on.
  out.clauses.push_back("alpha = 0 critical regime");
  warn_near(out.warnings, "Delta", p.Delta, 1.0);
  if (sigma1_one) {
    // Existence forces Delta > 1 here.
    if (p.Delta <= 1.0 + kRelTol && !near_eq(p.Delta, 1.0)) {
      out.regime = Regime::NoUnboundedStationary;
      out.clauses.push_back(
          "necessary condition violated: sigma1 = 1 requires Delta > 1 "
          "(Delta = " +
          fmt(p.Delta) + ")");
      return out;
    }
    if (near_eq(p.Delta, 1.0)) {
      out.regime = Regime::NoUnboundedStationary;
      out.clauses.push_back(
          "necessary condition violated: sigma1 = 1 requires Delta > 1 "
          "(Delta = 1 boundary)");
      out.warnings.push_back("NearBoundary: Delta at the critical value 1");
      return out;
    }
    out.regime = Regime::PowerLaw;
    out.upper = DecayBound{"log x", p.Delta - 1.0};
    out.clauses.push_back("(iv) alpha = 0, sigma1 = 1: power-law upper bound");
    out.clauses.push_back("note: sigma1 = 1 requires Delta > 1, satisfied");
    if (p.delta > 1.0 + kRelTol) {
      out.lower = DecayBound{"log x", p.delta - 1.0};
      out.clauses.push_back("(iv)' delta > 1: power-law lower bound");
    }
    return out;
  }

  // sigma1 < 1
  bool delta_zero = near_zero(p.Delta, 1.0);
  if (!delta_zero && p.Delta > 0) { // case (iii)
    out.regime = Regime::StretchedExponential;
    double e = 1.0 - p.sigma1;
    out.lower = DecayBound{"x^a", e, p.Delta / e};
    out.upper = DecayBound{"x^a", e, p.delta / e};
    out.clauses.push_back(
        "(iii) alpha = 0, Delta > 0, sigma1 < 1: stretched exponential");
    return out;
  }
  if (delta_zero) {
    out.clauses.push_back("note: Delta = 0 requires sigma1 < 1, satisfied");
    out.clauses.push_back(
        "gap case alpha = 0, sigma1 < 1, Delta = 0: no upper estimate exists");
    if (p.sigma2 < 1.0 - kExpTol) { // case (v)
      out.regime = Regime::LowerBoundOnly;
      double e = 1.0 - p.sigma2;
      out.lower = DecayBound{"x^a", e};
      out.clauses.push_back(
          "(v) Delta = 0, sigma2 < 1: stretched-exponential lower bound "
          "(theorem text labels this power-law with exponent 1 - sigma2)");
    } else { // case (vi)
      out.regime = Regime::LowerBoundOnly;
      out.lower = DecayBound{"log x",
                             std::numeric_limits<double>::quiet_NaN()};
      out.clauses.push_back(
          "(vi) Delta = 0, sigma2 >= 1: power-law lower bound, exponent "
          "unspecified");
    }
    return out;
  }
  // alpha = 0, sigma1 < 1, Delta < 0: outside every clause of the theorem.
  out.regime = Regime::GapIndeterminate;
  out.clauses.push_back(
      "alpha = 0, sigma1 < 1, Delta < 0: no theorem clause applies "
      "(existence of a stationary distribution requires Delta >= 0)");
  return out;
}

TailClassification classify_qsd(const AsymptoticParams &p, double theta) {
  if (!p.two_sided())
    fail(errc::precondition, "PartialParams",
         "QSD classification needs jumps in both directions");
  if (!(theta > 0))
    fail(errc::precondition, "NecessaryConditionViolated",
         "theta must be positive");

  TailClassification out;
  double coeff_scale = std::max(p.alpha_plus, p.alpha_minus);
  bool alpha_zero = near_zero(p.alpha, coeff_scale);
  bool R_zero = near_zero(p.R, std::max(1.0, std::abs(p.R)));
  bool degrees_eq = near_eq(p.R_minus, p.R_plus, std::max(1.0, p.R));
  bool sigma1_one = std::abs(p.sigma1 - 1.0) <= kExpTol;
  double ws = static_cast<double>(p.omega_star);

  warn_near(out.warnings, "alpha", p.alpha, coeff_scale);
  warn_near(out.warnings, "R", p.R, 1.0);
  warn_near(out.warnings, "alpha_minus - theta", p.alpha_minus - theta,
            coeff_scale);

  // Necessary conditions.
  if (!alpha_zero && p.alpha > 0)
    fail(errc::precondition, "NecessaryConditionViolated",
         "alpha <= 0 fails (alpha = " + fmt(p.alpha) + ")");
  if (p.R < -kExpTol)
    fail(errc::precondition, "NecessaryConditionViolated",
         "R >= 0 fails (R = " + fmt(p.R) + ")");
  if (R_zero) {
    if (p.alpha_minus < theta - kRelTol * std::max(1.0, theta))
      fail(errc::precondition, "NecessaryConditionViolated",
           "R = 0 requires alpha_minus >= theta (alpha_minus = " +
               fmt(p.alpha_minus) + ", theta = " + fmt(theta) + ")");
    if (degrees_eq && p.alpha > -theta + kRelTol * std::max(1.0, theta))
      fail(errc::precondition, "NecessaryConditionViolated",
           "R- = R+ = 0 requires alpha <= -theta (alpha = " + fmt(p.alpha) +
               ", theta = " + fmt(theta) + ")");
    if (!degrees_eq && p.R_minus > p.R_plus &&
        p.beta < theta - kRelTol * std::max(1.0, theta))
      fail(errc::precondition, "NecessaryConditionViolated",
           "R- > R+ with R = 0 requires beta >= theta (beta = " + fmt(p.beta) +
               ")");
  }
  if (degrees_eq && p.R > 0 && alpha_zero &&
      p.R < p.sigma1 - kRelTol * std::max(1.0, p.sigma1))
    fail(errc::precondition, "NecessaryConditionViolated",
         "R- = R+ > 0 with alpha = 0 requires R > sigma1 (R = " + fmt(p.R) +
             ", sigma1 = " + fmt(p.sigma1) + ")");

  // Lower estimates.
  if (!degrees_eq && p.R_minus > p.R_plus) {
    double drop = p.R_minus - p.R_plus;
    if (R_zero) {
      if (near_eq(p.beta, theta)) {
        if (drop <= 1.0 + kExpTol) {
          out.lower = DecayBound{"x^a", 1.0};
          out.clauses.push_back(
              "(ii) R = 0, beta = theta, R- - R+ <= 1: exponential lower "
              "bound");
        }
      } else if (p.beta > theta) {
        out.lower = DecayBound{"x log x", drop / ws};
        out.clauses.push_back("(i) R = 0, beta > theta: CMP lower bound");
      }
    } else {
      out.lower = DecayBound{"x log x", drop / ws};
      out.clauses.push_back("(iv) R- > R+, R > 0: CMP lower bound");
      if (p.R > 1.0 + kRelTol) {
        out.upper = DecayBound{
            "x log x", drop / (static_cast<double>(p.omega_plus) * ws)};
        out.clauses.push_back("(iv) R > 1: CMP upper bound");
      }
    }
  } else if (degrees_eq) {
    if (!R_zero && !alpha_zero) { // (v)
      out.lower = DecayBound{"x^a", 1.0};
      out.clauses.push_back(
          "(v) R- = R+, R > 0, alpha < 0: exponential lower bound");
      if (p.R > 1.0 + kRelTol) {
        out.upper = DecayBound{"x^a", 1.0};
        out.clauses.push_back("(v) R > 1: exponential upper bound");
      }
    } else if (!R_zero && alpha_zero) { // (vi)
      if (!sigma1_one && near_eq(p.R, p.sigma1)) {
        out.lower = DecayBound{"x^a", 1.0 - p.R};
        out.clauses.push_back(
            "(vi) R = sigma1 < 1: stretched-exponential lower bound");
      } else if (sigma1_one && p.R >= 1.0 - kExpTol) {
        out.lower =
            DecayBound{"log x", std::numeric_limits<double>::quiet_NaN()};
        out.clauses.push_back(
            "(vi) R >= sigma1 = 1: power-law lower bound, exponent "
            "unspecified");
      } else if (std::min(1.0, p.R) > p.sigma1 + kExpTol) {
        out.lower = DecayBound{"x^a", 1.0 - p.sigma1};
        out.clauses.push_back(
            "(vi) min{1, R} > sigma1: stretched-exponential lower bound "
            "(exponent read as 1 - sigma1; theorem text writes P2- with "
            "exponent below 1)");
      }
    } else if (R_zero) { // (vii)
      double at = p.alpha + theta;
      warn_near(out.warnings, "alpha + theta", at, coeff_scale);
      if (near_zero(at, coeff_scale)) {
        if (sigma1_one) {
          out.lower =
              DecayBound{"log x", std::numeric_limits<double>::quiet_NaN()};
          out.clauses.push_back(
              "(vii) R = 0, alpha + theta = 0, sigma1 = 1: power-law lower "
              "bound");
        } else {
          out.lower = DecayBound{"x^a", 1.0 - p.sigma1};
          out.clauses.push_back(
              "(vii) R = 0, alpha + theta = 0, sigma1 < 1: "
              "stretched-exponential lower bound");
        }
      } else if (at < 0) {
        out.lower = DecayBound{"x^a", 1.0};
        out.clauses.push_back(
            "(vii) R = 0, alpha + theta < 0: exponential lower bound");
      }
    }
  }

  // Upper estimates (viii)-(xi), keyed on R alone.
  if (near_eq(p.R, 1.0)) {
    out.upper = DecayBound{"log x", theta / p.alpha_plus};
    out.clauses.push_back("(viii) R = 1: power-law upper bound");
  } else if (!R_zero && p.R > 0 && p.R < 1.0) {
    out.upper = DecayBound{"x^a", 1.0 - p.R};
    out.clauses.push_back(
        "(ix) 0 < R < 1: stretched-exponential upper bound");
  } else if (R_zero) {
    if (near_eq(p.alpha_minus, theta)) {
      out.upper = DecayBound{
          "x log x", -p.sigma1 / static_cast<double>(p.omega_minus)};
      out.clauses.push_back("(xi) R = 0, alpha_minus = theta: CMP upper bound");
    } else if (p.alpha_minus > theta) {
      out.upper = DecayBound{"x^a", 1.0};
      out.clauses.push_back(
          "(x) R = 0, alpha_minus > theta: exponential upper bound");
    }
  }

  out.clauses.push_back(
      "no QSD decays faster than a CMP distribution (summary corollary)");
  if (near_eq(p.R, 1.0) && !alpha_zero && p.alpha < 0)
    out.clauses.push_back(
        "open: whether a QSD with CMP tail exists when R = 1 is not settled; "
        "the bracket does not rule it out");

  // Regime tag: matching bracket families name the regime; a mixed bracket
  // is genuinely indeterminate between its two families.
  auto family_regime = [](const DecayBound &b) {
    if (b.family == "x log x")
      return Regime::CMPLike;
    if (b.family == "log x")
      return Regime::PowerLaw;
    return std::abs(b.a - 1.0) <= kExpTol ? Regime::Exponential
                                          : Regime::StretchedExponential;
  };
  if (out.lower && out.upper) {
    Regime rl = family_regime(*out.lower), ru = family_regime(*out.upper);
    if (rl == ru) {
      out.regime = rl;
    } else {
      out.regime = Regime::GapIndeterminate;
      out.clauses.push_back(
          std::string("bracket families differ (lower ") +
          regime_name(rl) + ", upper " + regime_name(ru) +
          "); tail regime indeterminate within the bracket");
    }
  } else if (out.lower) {
    out.regime = Regime::LowerBoundOnly;
  } else if (out.upper) {
    out.regime = family_regime(*out.upper);
    out.clauses.push_back("upper bound only");
  } else {
    out.regime = Regime::GapIndeterminate;
    out.clauses.push_back("no theorem clause produced a bound");
  }
  return out;
}

ErgodicityReport ergodicity_check(const AsymptoticParams &p) {
  ErgodicityReport rep;
  if (!p.two_sided()) {
    rep.reason = "one-sided model";
    return rep;
  }
  if (p.R < 3.0 - kExpTol) {
    rep.reason = "hypothesis R >= 3 fails (R = " + fmt(p.R) + ")";
    return rep;
  }
  double lhs = (p.R - 1.0) * p.vartheta - p.alpha_plus;
  if (lhs > kRelTol * std::max(1.0, std::abs(p.alpha_plus))) {
    rep.reason = "hypothesis (R-1)*vartheta - alpha_plus <= 0 fails (value " +
                 fmt(lhs) + ")";
    return rep;
  }
  rep.verdict = ErgodicVerdict::Ergodic;
  rep.reason = "R >= 3 and (R-1)*vartheta - alpha_plus <= 0";
  return rep;
}

ObstructionReport support_obstruction(const JumpModel &model) {
  bool has_plus = false, has_minus = false;
  for (const auto &[omega, rate] : model.jumps)
    (omega > 0 ? has_plus : has_minus) = true;
  if (has_plus && has_minus)
    fail(errc::precondition, "TwoSidedModel",
         "support obstruction applies to one-sided models only");

  ObstructionReport rep;
  rep.stationary_note =
      "one-sided jumps: any stationary measure is concentrated on states "
      "where every rate vanishes";

  if (!has_minus) {
    // With no backward jumps theta_nu = 0, so a QSD cannot charge any state
    // with a positive rate; full coverage of the non-absorbing states rules
    // a QSD out.
    bool covered = true;
    long long horizon = model.state_min + 64;
    for (const auto &[omega, rate] : model.jumps)
      horizon = std::max(horizon, rate.valid_from() + 64);
    for (long long x = model.state_min; x <= horizon; ++x) {
      if (!model.on_lattice(x) || model.absorbing.count(x))
        continue;
      if (model.total_rate(x) == 0.0) {
        covered = false;
        break;
      }
    }
    if (covered && !model.absorbing.empty()) {
      rep.no_qsd_possible = true;
      rep.qsd_note =
          "no backward jumps and the rates cover every non-absorbing state: "
          "no QSD exists";
    } else {
      rep.qsd_note = "no backward jumps: any QSD avoids states with a "
                     "positive rate";
    }
  } else {
    rep.qsd_note =
        "no forward jumps: a QSD may still exist (pure-death chains admit "
        "one); no obstruction";
  }
  return rep;
}

} // namespace ctmc
