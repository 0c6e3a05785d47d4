#pragma once

// One-dimensional CTMC with finitely many jump sizes.  States live on the
// lattice state_min + omega_star * N0; an optional finite absorbing set
// turns the chain into an absorbed process with quasi-stationary behaviour
// on its complement.

#include "ctmctail/power_sum.hpp"

#include <map>
#include <set>
#include <vector>

namespace ctmc {

struct JumpModel {
  std::map<long long, PowerSum> jumps; // omega -> rate, omega != 0
  long long state_min = 0;
  std::set<long long> absorbing;

  long long omega_star() const; // gcd of |omega|
  bool on_lattice(long long x) const;
  bool two_sided() const;

  // lambda_omega(x), zero outside the state space.
  double rate(long long omega, long long x) const;
  double total_rate(long long x) const;

  bool operator==(const JumpModel &other) const {
    return jumps == other.jumps && state_min == other.state_min &&
           absorbing == other.absorbing;
  }
};

// Checks the model invariants: nonempty finite jump set, eventually strictly
// positive rates with positive leading coefficient, non-negative values on
// an explicit horizon, absorbing set closed under the rates, and no positive
// rate leading below state_min.  Throws ValidationError subtypes.
void validate(const JumpModel &model);

// y = scale * x + shift translates states of the normalized chain back to
// the original one.
struct AffineMap {
  long long scale = 1;
  long long shift = 0;
  long long to_original(long long x) const { return scale * x + shift; }
  long long to_normalized(long long y) const { return (y - shift) / scale; }
};

struct NormalizedModel {
  JumpModel model; // omega_star == 1, state_min == 0
  AffineMap map;
};

NormalizedModel normalize(const JumpModel &model);

} // namespace ctmc
