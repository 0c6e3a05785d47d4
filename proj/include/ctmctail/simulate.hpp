#pragma once

// Exact stochastic simulation of the jump chain, with empirical stationary
// and quasi-stationary estimators for cross-validating the solvers.
//
// Reproducibility contract: replica streams are split from the master seed
// with SplitMix64 and each stream drives a standard mt19937_64 engine, so
// every operation here is a pure function of (model, parameters, seed).

#include "ctmctail/model.hpp"
#include "ctmctail/solver.hpp"

#include <cstdint>
#include <vector>

namespace ctmc {

struct Trajectory {
  std::vector<double> times;
  std::vector<long long> states;
  bool absorbed = false;
  std::uint64_t seed = 0;
};

struct SsaConfig {
  double t_end = 0;
  std::uint64_t max_steps = 100000000; // explosion guard
};

Trajectory simulate_ssa(const JumpModel &model, long long x0,
                        const SsaConfig &cfg, std::uint64_t seed);

struct EmpiricalConfig {
  double t_end = 0;
  double burn_in = 0;
  int replicas = 1;
  std::uint64_t max_steps = 100000000;
};

// Time-weighted occupancy over [burn_in, t_end] pooled across replicas.
DistVector empirical_stationary(const JumpModel &model, long long x0,
                                const EmpiricalConfig &cfg,
                                std::uint64_t seed);

struct QsdEstimatorConfig {
  long long n_cycles = 100; // absorption events to accumulate
  double burn_in_fraction = 0.2;
  std::uint64_t max_steps = 100000000;
};

// Resample-on-absorption estimator: on hitting the absorbing set the chain
// restarts from a state drawn from the running occupancy; theta is estimated
// as absorptions / simulated time after burn-in.
DistVector empirical_qsd(const JumpModel &model, long long x0,
                         const QsdEstimatorConfig &cfg, std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t &state);

} // namespace ctmc
