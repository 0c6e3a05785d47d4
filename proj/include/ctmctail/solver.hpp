#pragma once

// Numerical computation of stationary distributions and QSDs on a truncated
// window, the exact birth-death product formula, and the closed-form
// reference families (CMP, Zeta, geometric, Poisson, negative binomial).

#include "ctmctail/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ctmc {

enum class StationaryMethod { recursive, truncated_linear, bdp_closed_form };
enum class QsdMethod { power_iteration, inverse_iteration };

struct SolverConfig {
  long long N = 1000; // truncation: states state_min .. state_min + N
  double tolerance = 1e-10;
  long long max_iterations = 20000;
  StationaryMethod method = StationaryMethod::truncated_linear;
  QsdMethod qsd_method = QsdMethod::inverse_iteration;
  std::vector<double> seeds; // recursive solver generating terms
};

struct DistVector {
  enum class Kind { stationary, qsd };

  long long offset = 0; // first support point (original state units)
  std::vector<double> values;
  long long truncation = 0;
  double mass_defect = 0.0;
  Kind kind = Kind::stationary;
  std::optional<double> theta;
  double max_identity_residual = 0.0; // from the defining identity

  double at(long long x) const {
    long long i = x - offset;
    return i < 0 || i >= static_cast<long long>(values.size()) ? 0.0
                                                               : values[i];
  }
  long long last_state() const {
    return offset + static_cast<long long>(values.size()) - 1;
  }
  // T(x) = sum_{y >= x} p(y) over the stored window.
  std::vector<double> tails() const;
  double tail_at(long long x) const;
};

// Augmented truncation of the master equation: outflow beyond the window is
// redirected to the largest retained state, and the probability vector in
// the left null space of the truncated generator is returned.
DistVector solve_stationary_truncated(const JumpModel &model,
                                      const SolverConfig &cfg);

// Iterates the grouped stationary identity, solving each step for the
// single highest-index unknown; `seeds` supplies the generating terms the
// identity leaves free (their count is model-dependent; pass an empty
// config.seeds to let the caller query required_seed_count first).
DistVector solve_stationary_recursive(const JumpModel &model,
                                      const SolverConfig &cfg);
// Normalized states whose values the recursion cannot determine (the seed
// slots), in increasing order; seeds must supply one value per entry.
std::vector<long long> undetermined_states(const JumpModel &model,
                                           long long N);
long long required_seed_count(const JumpModel &model, long long N);

// Exact product formula for birth-death chains.
DistVector bdp_stationary(const PowerSum &birth, const PowerSum &death,
                          const SolverConfig &cfg);

// Left Perron eigenvector of the sub-generator restricted to the
// non-absorbing window (plain truncation), with theta = -eigenvalue,
// cross-checked against the absorption-flux formula.
DistVector solve_qsd(const JumpModel &model, const SolverConfig &cfg);

struct ReferenceSpec {
  enum class Family { cmp, zeta, geometric, poisson, negative_binomial };
  Family family;
  double a = 0, b = 0; // cmp(a,b), zeta(a), geometric(p=a), poisson(a),
                       // negative_binomial(a, delta=b)
};

DistVector reference_dist(const ReferenceSpec &spec, long long N);

} // namespace ctmc
