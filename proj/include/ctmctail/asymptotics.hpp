#pragma once

// Jump-structure quantities (omega_star, scaled extreme jumps, the nested
// sets A_j) and the asymptotic parameters R, R+-, sigma1, sigma2, alpha,
// alpha+-, beta, gamma, vartheta, Delta, delta together with the per-j
// arrays alpha_j, gamma_j.  All coefficients are read off exact truncated
// series of the rates, so the Appendix-B identities hold to rounding error
// and double as an implementation self-test.

#include "ctmctail/model.hpp"

#include <map>
#include <vector>

namespace ctmc {

struct JumpStructure {
  long long omega_star = 1;
  long long omega_plus = 0;  // max Omega+ / omega_star, 0 when Omega+ empty
  long long omega_minus = 0; // min Omega- / omega_star, 0 when Omega- empty
  bool has_plus = false, has_minus = false;
  // j in [omega_minus, omega_plus + 1] -> subset of Omega (original jumps)
  std::map<long long, std::vector<long long>> A;
};

JumpStructure jump_structure(const JumpModel &model);

struct AsymptoticParams {
  bool has_minus = false, has_plus = false; // one-sided models get partials
  double R = 0, R_minus = 0, R_plus = 0;
  double sigma1 = 0, sigma2 = 0;
  double alpha = 0, alpha_minus = 0, alpha_plus = 0;
  double beta = 0, gamma = 0, vartheta = 0;
  double Delta = 0, delta = 0;
  std::map<long long, double> alpha_j, gamma_j;
  double gamma_minus = 0, gamma_plus = 0; // second-order one-sided sums

  // copied from the jump structure so classification needs only this struct
  long long omega_star = 1, omega_plus = 0, omega_minus = 0;

  bool two_sided() const { return has_minus && has_plus; }
};

AsymptoticParams compute_params(const JumpModel &model);

struct ConsistencyCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  double residual() const { return lhs > rhs ? lhs - rhs : rhs - lhs; }
};

struct ConsistencyReport {
  std::vector<ConsistencyCheck> checks;
  double max_residual = 0;
  bool ok = true;
};

// Verifies the one-sided coefficient splittings and, when alpha == 0, the
// second-moment identity.  A failure indicates a bug in compute_params, not
// bad input, and raises ConsistencyFailure.
ConsistencyReport lemma_consistency(const AsymptoticParams &params,
                                    const JumpStructure &js);

} // namespace ctmc
