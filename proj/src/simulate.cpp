#include "ctmctail/simulate.hpp"

#include "ctmctail/errors.hpp"
#include "ctmctail/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

namespace ctmc {

std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xa5a5a5a5a5a5a5a5ULL * (stream + 1));
  std::seed_seq seq{static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s) >> 32),
                    static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s) >> 32),
                    static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s) >> 32)};
  return std::mt19937_64(seq);
}

struct JumpTable {
  std::vector<long long> omegas;
  std::vector<double> rates;
  double total = 0;
};

JumpTable rates_at(const JumpModel &model, long long x) {
  JumpTable t;
  for (const auto &[omega, rate] : model.jumps) {
    double r = model.rate(omega, x);
    if (r > 0.0) {
      t.omegas.push_back(omega);
      t.rates.push_back(r);
      t.total += r;
    }
  }
  return t;
}

} // namespace

Trajectory simulate_ssa(const JumpModel &model, long long x0,
                        const SsaConfig &cfg, std::uint64_t seed) {
  if (!model.on_lattice(x0))
    fail(errc::simulation, "InvalidArgument",
         "initial state is outside the state space");
  Trajectory tr;
  tr.seed = seed;
  std::mt19937_64 rng = make_engine(seed, 0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  double t = 0.0;
  long long x = x0;
  tr.times.push_back(0.0);
  tr.states.push_back(x);
  if (model.absorbing.count(x)) {
    tr.absorbed = true;
    return tr;
  }
  for (std::uint64_t step = 0;; ++step) {
    if (step >= cfg.max_steps)
      fail(errc::simulation, "ExplosionGuardTripped",
           "step cap hit at t = " + std::to_string(t) +
               " before t_end (possibly explosive chain)");
    JumpTable jt = rates_at(model, x);
    if (jt.total <= 0.0) {
      // No way out: the chain sits here until t_end.
      tr.times.push_back(cfg.t_end);
      tr.states.push_back(x);
      return tr;
    }
    double wait = -std::log1p(-uni(rng)) / jt.total;
    if (t + wait >= cfg.t_end) {
      tr.times.push_back(cfg.t_end);
      tr.states.push_back(x);
      return tr;
    }
    t += wait;
    double u = uni(rng) * jt.total;
    std::size_t k = 0;
    for (; k + 1 < jt.rates.size(); ++k) {
      if (u < jt.rates[k])
        break;
      u -= jt.rates[k];
    }
    x += jt.omegas[k];
    tr.times.push_back(t);
    tr.states.push_back(x);
    if (model.absorbing.count(x)) {
      tr.absorbed = true;
      return tr;
    }
  }
}

namespace {

// Time-weighted occupancy of one replica over [burn_in, t_end].
void accumulate_occupancy(const JumpModel &model, long long x0,
                          const EmpiricalConfig &cfg, std::uint64_t master,
                          int replica, std::map<long long, double> &occ,
                          double &weight) {
  std::mt19937_64 rng =
      make_engine(master, static_cast<std::uint64_t>(replica));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double t = 0.0;
  long long x = x0;
  for (std::uint64_t step = 0;; ++step) {
    if (step >= cfg.max_steps)
      fail(errc::simulation, "ExplosionGuardTripped",
           "step cap hit at t = " + std::to_string(t));
    JumpTable jt = rates_at(model, x);
    double next = cfg.t_end;
    bool jumps = false;
    if (jt.total > 0.0) {
      double wait = -std::log1p(-uni(rng)) / jt.total;
      if (t + wait < cfg.t_end) {
        next = t + wait;
        jumps = true;
      }
    }
    double a = std::max(t, cfg.burn_in), b = next;
    if (b > a) {
      occ[x] += b - a;
      weight += b - a;
    }
    if (!jumps)
      return;
    t = next;
    double u = uni(rng) * jt.total;
    std::size_t k = 0;
    for (; k + 1 < jt.rates.size(); ++k) {
      if (u < jt.rates[k])
        break;
      u -= jt.rates[k];
    }
    x += jt.omegas[k];
    if (model.absorbing.count(x)) {
      occ[x] += cfg.t_end - t; // park remaining time in the trap
      weight += cfg.t_end - t;
      return;
    }
  }
}

DistVector occupancy_to_dist(const std::map<long long, double> &occ,
                             double weight, DistVector::Kind kind) {
  if (occ.empty() || weight <= 0.0)
    fail(errc::simulation, "InvalidWindow",
         "no occupancy mass accumulated");
  DistVector d;
  d.kind = kind;
  d.offset = occ.begin()->first;
  long long last = occ.rbegin()->first;
  d.truncation = last - d.offset;
  d.values.assign(static_cast<std::size_t>(last - d.offset + 1), 0.0);
  for (const auto &[x, w] : occ)
    d.values[static_cast<std::size_t>(x - d.offset)] = w / weight;
  return d;
}

} // namespace

DistVector empirical_stationary(const JumpModel &model, long long x0,
                                const EmpiricalConfig &cfg,
                                std::uint64_t seed) {
  if (!(cfg.burn_in < cfg.t_end))
    fail(errc::simulation, "InvalidWindow",
         "burn_in must be smaller than t_end");
  if (cfg.replicas < 1)
    fail(errc::simulation, "InvalidArgument", "need at least one replica");

  int nthreads = std::min<int>(cfg.replicas,
                               std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::map<long long, double>> occs(
      static_cast<std::size_t>(cfg.replicas));
  std::vector<double> weights(static_cast<std::size_t>(cfg.replicas), 0.0);
  std::vector<std::exception_ptr> errors(
      static_cast<std::size_t>(cfg.replicas));

  auto worker = [&](int r) {
    try {
      accumulate_occupancy(model, x0, cfg, seed, r,
                           occs[static_cast<std::size_t>(r)],
                           weights[static_cast<std::size_t>(r)]);
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int base = 0; base < cfg.replicas; base += nthreads) {
    int hi = std::min(cfg.replicas, base + nthreads);
    for (int r = base; r < hi; ++r)
      pool.emplace_back(worker, r);
    for (auto &th : pool)
      th.join();
    pool.clear();
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  // Merge in replica order: associative, deterministic.
  std::map<long long, double> occ;
  double weight = 0.0;
  for (int r = 0; r < cfg.replicas; ++r) {
    for (const auto &[x, w] : occs[static_cast<std::size_t>(r)])
      occ[x] += w;
    weight += weights[static_cast<std::size_t>(r)];
  }
  return occupancy_to_dist(occ, weight, DistVector::Kind::stationary);
}

DistVector empirical_qsd(const JumpModel &model, long long x0,
                         const QsdEstimatorConfig &cfg, std::uint64_t seed) {
  if (model.absorbing.empty())
    fail(errc::simulation, "EmptyAbsorbingSet",
         "QSD estimation requires a nonempty absorbing set");
  if (cfg.n_cycles < 1)
    fail(errc::simulation, "InvalidArgument", "need at least one cycle");

  std::mt19937_64 rng = make_engine(seed, 0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  if (model.absorbing.count(x0))
    fail(errc::simulation, "InvalidArgument",
         "initial state is absorbing");
  std::map<long long, double> occ; // running occupancy (all cycles)
  long long absorptions = 0;
  double t_total = 0.0;
  // post-burn-in tallies
  long long burn_cycles =
      std::max<long long>(1, static_cast<long long>(
                                 cfg.burn_in_fraction *
                                 static_cast<double>(cfg.n_cycles)));
  std::map<long long, double> occ_tail;
  double t_tail = 0.0;
  long long abs_tail = 0;

  long long x = x0;
  std::uint64_t steps = 0;
  while (absorptions < cfg.n_cycles) {
    if (steps++ >= cfg.max_steps) {
      if (absorptions == 0)
        fail(errc::simulation, "NoAbsorptions",
             "no absorption events within the step budget");
      break;
    }
    JumpTable jt = rates_at(model, x);
    if (jt.total <= 0.0 && !model.absorbing.count(x))
      fail(errc::simulation, "NoAbsorptions",
           "chain stuck in a rate-free non-absorbing state " +
               std::to_string(x));
    double wait = -std::log1p(-uni(rng)) / jt.total;
    occ[x] += wait;
    t_total += wait;
    if (absorptions >= burn_cycles) {
      occ_tail[x] += wait;
      t_tail += wait;
    }
    double u = uni(rng) * jt.total;
    std::size_t k = 0;
    for (; k + 1 < jt.rates.size(); ++k) {
      if (u < jt.rates[k])
        break;
      u -= jt.rates[k];
    }
    x += jt.omegas[k];
    if (model.absorbing.count(x)) {
      ++absorptions;
      if (absorptions > burn_cycles)
        ++abs_tail;
      // Restart from the running empirical occupancy.
      double target = uni(rng) * t_total;
      double acc = 0.0;
      long long restart = x0;
      for (const auto &[s, w] : occ) {
        acc += w;
        if (acc >= target) {
          restart = s;
          break;
        }
      }
      x = restart;
    }
  }
  if (abs_tail == 0 || t_tail <= 0.0)
    fail(errc::simulation, "NoAbsorptions",
         "no absorption events after burn-in");
  DistVector d = occupancy_to_dist(occ_tail, t_tail, DistVector::Kind::qsd);
  d.theta = static_cast<double>(abs_tail) / t_tail;
  return d;
}

} // namespace ctmc
