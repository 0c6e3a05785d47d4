#pragma once

// Verification of the stationary/QSD identities on computed distributions,
// empirical tail fitting, and the sharp-asymptotics predictors for the
// critical (alpha = 0) regime.

#include "ctmctail/asymptotics.hpp"
#include "ctmctail/classify.hpp"
#include "ctmctail/solver.hpp"

#include <optional>
#include <string>

namespace ctmc {

struct ResidualReport {
  double max_residual = 0;
  double mean_residual = 0;
  long long worst_x = 0;
  std::string form; // "per-omega" | "A_j-grouped" | "tail"
};

// Evaluates the per-omega and A_j-grouped stationary identities at every
// admissible x of the truncation window; residuals are normalized by the
// larger side (pointwise floor guards heavy tails).
ResidualReport verify_identity_stationary(const JumpModel &model,
                                          const DistVector &dist);
// Same for the QSD identity including the theta * T(x) term.
ResidualReport verify_identity_qsd(const JumpModel &model,
                                   const DistVector &dist);
// Tail-distribution form of the identity (theta term included for QSDs).
ResidualReport verify_tail_identity(const JumpModel &model,
                                    const DistVector &dist);

// theta_nu from the absorption-flux formula.
double theta_from_dist(const JumpModel &model, const DistVector &dist);

struct TailFit {
  std::string family; // "x log x" | "x^a" | "log x"
  double a = 0;       // family exponent: stretch power for "x^a",
                      // power-law exponent for "log x", 1 for "x log x"
  double coeff = 0;   // fitted decay coefficient (slope magnitude)
  double rms = 0;     // fit residual
  double gof = 0;     // 1 - ss_res/ss_tot on log T
};

// Least-squares fit of log T(x) over [window_lo, window_hi] against the
// candidate decay families; ties within 5% relative residual break toward
// `predicted` when given.
TailFit fit_tail(const DistVector &dist, long long window_lo,
                 long long window_hi,
                 const std::optional<std::string> &predicted = std::nullopt);

struct SharpPrediction {
  bool available = false;
  std::string family; // "x^a" or "log x"
  double exponent = 0;
  double coefficient = 0; // rate in exp(-coefficient * x^exponent), when known
  std::string formula;
};

// Birth-death sharp asymptotics (alpha = 0 required).
SharpPrediction sharp_bdp_prediction(const AsymptoticParams &params);

// Drift-based sharp asymptotics via h = 2 m1/m2 (alpha = 0, gamma +
// vartheta < 0 required); `h_remainder_integral` reports the numerically
// integrated part of h beyond its leading term.
struct DriftPrediction {
  SharpPrediction prediction;
  double h_remainder_integral = 0;
};

DriftPrediction sharp_drift_prediction(const JumpModel &model);

} // namespace ctmc
