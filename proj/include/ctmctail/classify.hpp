#pragma once

// Tail-regime classification of stationary distributions and QSDs from the
// asymptotic parameters.  The verdicts mirror the decision tables of the
// stationary trichotomy theorem and its QSD counterpart; regime boundaries
// are tested with a relative tolerance and near-boundary inputs carry a
// warning.

#include "ctmctail/asymptotics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctmc {

enum class Regime {
  NoUnboundedStationary,
  CMPLike,
  Exponential,
  StretchedExponential,
  PowerLaw,
  LowerBoundOnly,
  GapIndeterminate,
  NoQSDPossible,
};

const char *regime_name(Regime r);

// One side of a tail bracket: T(x) decays like exp(-a * family(x)) for the
// "x log x" and "x^a" families (b is a known rate coefficient when the
// theory provides one), and like x^{-a} for the "log x" family.
struct DecayBound {
  DecayBound() = default;
  DecayBound(std::string f, double a_, std::optional<double> b_ = std::nullopt)
      : family(std::move(f)), a(a_), b(b_) {}
  std::string family; // "x log x" | "x^a" | "log x"
  double a = 0;
  std::optional<double> b;
};

struct TailClassification {
  Regime regime = Regime::GapIndeterminate;
  std::optional<DecayBound> lower, upper;
  std::vector<std::string> clauses;  // triggered theorem clauses
  std::vector<std::string> warnings; // e.g. NearBoundary margins
};

// Stationary decision table; requires two-sided params (PartialParams
// otherwise; use support_obstruction for one-sided models).
TailClassification classify_stationary(const AsymptoticParams &params);

// QSD decision table; theta is the absorption-rate functional (numeric
// estimate from the QSD solver or user supplied).  Violated necessary
// conditions raise NecessaryConditionViolated.
TailClassification classify_qsd(const AsymptoticParams &params, double theta);

enum class ErgodicVerdict { Ergodic, Unknown };

struct ErgodicityReport {
  ErgodicVerdict verdict = ErgodicVerdict::Unknown;
  std::string reason;
};

ErgodicityReport ergodicity_check(const AsymptoticParams &params);

struct ObstructionReport {
  bool no_qsd_possible = false;
  std::string stationary_note;
  std::string qsd_note;
};

// One-sided models: stationary measures concentrate on states where every
// rate vanishes, and with no backward jumps a QSD cannot exist when the
// rates cover all of the non-absorbing states.  Throws TwoSidedModel when
// both jump directions are present.
ObstructionReport support_obstruction(const JumpModel &model);

} // namespace ctmc
