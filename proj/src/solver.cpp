#include "ctmctail/solver.hpp"

#include "ctmctail/analysis.hpp"
#include "ctmctail/classify.hpp"
#include "ctmctail/errors.hpp"
#include "ctmctail/numeric.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctmc {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

void normalize_values(std::vector<double> &v, double target = 1.0) {
  KahanSum total;
  for (double &x : v) {
    if (x < 0.0)
      x = 0.0;
    total.add(x);
  }
  double s = total.value();
  if (!(s > 0.0))
    fail(errc::solver, "SingularSystem",
         "computed distribution has no positive mass");
  for (double &x : v)
    x *= target / s;
}

// Tail mass beyond the last positive lattice point, from a least-squares fit
// of the boundary decay (power law vs geometric, better residual wins).
// Superexponential tails come out geometric with rho << 1, which is accurate
// enough since the true remainder is smaller still.
double boundary_tail_estimate(const std::vector<double> &lattice_values,
                              long long spacing) {
  std::size_t last = lattice_values.size();
  while (last > 0 && !(lattice_values[last - 1] > 0.0))
    --last;
  if (last < 8)
    return 0.0;
  const int k = 8;
  std::vector<double> xs, ls;
  for (std::size_t i = last - k; i < last; ++i) {
    xs.push_back(static_cast<double>(i) * static_cast<double>(spacing));
    ls.push_back(std::log(lattice_values[i]));
  }
  auto fit = [&](const std::vector<double> &basis, double &slope) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
      sx += basis[i];
      sy += ls[i];
      sxx += basis[i] * basis[i];
      sxy += basis[i] * ls[i];
    }
    double denom = k * sxx - sx * sx;
    slope = (k * sxy - sx * sy) / denom;
    double icpt = (sy - slope * sx) / k;
    double rss = 0;
    for (int i = 0; i < k; ++i) {
      double e = ls[i] - (icpt + slope * basis[i]);
      rss += e * e;
    }
    return rss;
  };
  std::vector<double> logx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    logx[i] = std::log(std::max(xs[i], 1.0));
  double s_pow = 0, s_geo = 0;
  double rss_pow = fit(logx, s_pow);
  double rss_geo = fit(xs, s_geo);

  double vL = lattice_values[last - 1];
  double L = static_cast<double>(last - 1) * static_cast<double>(spacing);
  double est = 0.0;
  if (rss_pow < rss_geo && -s_pow > 1.05) {
    est = vL * L / ((-s_pow - 1.0) * static_cast<double>(spacing));
  } else if (s_geo < 0.0) {
    double rho = std::exp(s_geo * static_cast<double>(spacing));
    est = vL * rho / (1.0 - rho);
  } else {
    double rho = lattice_values[last - 1] /
                 std::max(lattice_values[last - 2], 1e-300);
    if (rho < 1.0)
      est = vL * rho / (1.0 - rho);
  }
  return std::clamp(est, 0.0, 0.5);
}

// Stationary-case defect: prefer the classifier-predicted family when it
// pins a power-law exponent, otherwise use the boundary fit.
double stationary_mass_defect(const JumpModel &model,
                              const std::vector<double> &lattice_values,
                              long long spacing) {
  double est = boundary_tail_estimate(lattice_values, spacing);
  try {
    AsymptoticParams params = compute_params(model);
    if (params.two_sided()) {
      TailClassification cls = classify_stationary(params);
      if (cls.regime == Regime::PowerLaw && cls.upper && cls.upper->a > 0.05) {
        std::size_t last = lattice_values.size();
        while (last > 0 && !(lattice_values[last - 1] > 0.0))
          --last;
        if (last >= 2) {
          double vL = lattice_values[last - 1];
          double L =
              static_cast<double>(last - 1) * static_cast<double>(spacing);
          est = vL * L / (cls.upper->a * static_cast<double>(spacing));
        }
      }
    }
  } catch (const error &) {
    // classification unavailable; keep the fitted estimate
  }
  return std::clamp(est, 0.0, 0.5);
}

struct NormalizedWindow {
  NormalizedModel nm;
  long long Nn = 0; // normalized states 0..Nn
};

NormalizedWindow make_window(const JumpModel &model, long long N) {
  long long lo = 0, hi = 0;
  for (const auto &[omega, rate] : model.jumps) {
    lo = std::min(lo, omega);
    hi = std::max(hi, omega);
  }
  if (N < hi - lo + 2)
    fail(errc::solver, "InvalidTruncation",
         "truncation N = " + std::to_string(N) +
             " is smaller than the jump span + 2");
  NormalizedWindow w;
  w.nm = normalize(model);
  w.Nn = N / w.nm.map.scale;
  return w;
}

DistVector to_original_units(const NormalizedWindow &w,
                             std::vector<double> lattice_values,
                             DistVector::Kind kind) {
  DistVector d;
  d.kind = kind;
  long long scale = w.nm.map.scale;
  d.offset = w.nm.map.shift;
  d.truncation = w.Nn * scale;
  if (scale == 1) {
    d.values = std::move(lattice_values);
  } else {
    d.values.assign(static_cast<std::size_t>(w.Nn * scale + 1), 0.0);
    for (long long k = 0; k <= w.Nn; ++k)
      d.values[static_cast<std::size_t>(k * scale)] =
          lattice_values[static_cast<std::size_t>(k)];
  }
  return d;
}

} // namespace

std::vector<double> DistVector::tails() const {
  std::vector<double> t(values.size() + 1, mass_defect);
  for (std::size_t i = values.size(); i-- > 0;)
    t[i] = t[i + 1] + values[i];
  t.pop_back();
  return t;
}

double DistVector::tail_at(long long x) const {
  if (x <= offset)
    return mass_defect + std::accumulate(values.begin(), values.end(), 0.0);
  KahanSum acc;
  acc.add(mass_defect);
  for (long long y = std::max(x, offset); y <= last_state(); ++y)
    acc.add(at(y));
  return acc.value();
}

DistVector solve_stationary_truncated(const JumpModel &model,
                                      const SolverConfig &cfg) {
  if (!model.absorbing.empty())
    fail(errc::precondition, "PreconditionFailed",
         "stationary solve requires an empty absorbing set");
  if (!model.two_sided())
    fail(errc::precondition, "PreconditionFailed",
         "stationary solve requires jumps in both directions");
  NormalizedWindow w = make_window(model, cfg.N);
  const JumpModel &nm = w.nm.model;
  long long n = w.Nn + 1;

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) * (nm.jumps.size() + 1));
  for (long long i = 0; i < n; ++i) {
    double diag = 0.0;
    for (const auto &[omega, rate] : nm.jumps) {
      double r = rate.evaluate(i);
      if (r <= 0.0)
        continue;
      long long j = i + omega;
      if (j < 0)
        fail(errc::validation, "ValidationError",
             "positive rate leads below the state space at x = " +
                 std::to_string(i));
      if (j > w.Nn)
        j = w.Nn; // augmented truncation: redirect outflow to the boundary
      if (j != i) {
        // transposed generator entry Q^T[j][i] = Q[i][j]
        trip.emplace_back(static_cast<int>(j), static_cast<int>(i), r);
        diag -= r;
      }
    }
    if (i != 0)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }
  // Replace the balance equation at state 0 by the normalization sum = 1.
  std::erase_if(trip, [](const Triplet &t) { return t.row() == 0; });
  for (long long i = 0; i < n; ++i)
    trip.emplace_back(0, static_cast<int>(i), 1.0);

  SpMat A(static_cast<int>(n), static_cast<int>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    fail(errc::solver, "SingularSystem",
         "truncated generator is singular (reducible window?)");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[0] = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success)
    fail(errc::solver, "SingularSystem", "linear solve failed");

  std::vector<double> vals(x.data(), x.data() + n);
  normalize_values(vals);
  double defect = stationary_mass_defect(model, vals, w.nm.map.scale);
  DistVector d =
      to_original_units(w, std::move(vals), DistVector::Kind::stationary);
  d.mass_defect = defect;
  d.max_identity_residual = verify_identity_stationary(model, d).max_residual;
  return d;
}

std::vector<long long> undetermined_states(const JumpModel &model,
                                           long long N) {
  NormalizedWindow w = make_window(model, N);
  JumpStructure js = jump_structure(w.nm.model);
  if (!js.has_minus || !js.has_plus)
    fail(errc::precondition, "PreconditionFailed",
         "recursive solve requires jumps in both directions");
  long long B = -js.omega_minus;
  const PowerSum &pivot_rate = w.nm.model.jumps.at(js.omega_minus);
  std::vector<long long> out;
  for (long long s = 0; s <= w.Nn; ++s) {
    if (s < B - 1 || pivot_rate.evaluate(s) == 0.0)
      out.push_back(s);
    if (out.size() > 64)
      fail(errc::solver, "ZeroPivot",
           "pivot rate vanishes at more than 64 states; recursion cannot "
           "start");
  }
  return out;
}

long long required_seed_count(const JumpModel &model, long long N) {
  return static_cast<long long>(undetermined_states(model, N).size());
}

DistVector solve_stationary_recursive(const JumpModel &model,
                                      const SolverConfig &cfg) {
  if (!model.absorbing.empty())
    fail(errc::precondition, "PreconditionFailed",
         "stationary solve requires an empty absorbing set");
  NormalizedWindow w = make_window(model, cfg.N);
  const JumpModel &nm = w.nm.model;
  JumpStructure js = jump_structure(nm);
  if (!js.has_minus || !js.has_plus)
    fail(errc::precondition, "PreconditionFailed",
         "recursive solve requires jumps in both directions");
  long long B = -js.omega_minus, F = js.omega_plus;

  long long needed = required_seed_count(model, cfg.N);
  if (static_cast<long long>(cfg.seeds.size()) != needed)
    fail(errc::solver, "SeedDimension",
         "model needs " + std::to_string(needed) + " seed value(s), got " +
             std::to_string(cfg.seeds.size()));

  // F_j(y) = sum over A_j of lambda_omega(y).
  auto group_rate = [&](long long j, long long y) {
    if (y < 0)
      return 0.0;
    KahanSum acc;
    for (long long omega : js.A.at(j))
      acc.add(nm.jumps.at(omega).evaluate(y));
    return acc.value();
  };
  const PowerSum &pivot_rate = nm.jumps.at(js.omega_minus);

  std::vector<long double> vals(static_cast<std::size_t>(w.Nn + 1), 0.0L);
  std::size_t seed_idx = 0;
  double max_res = 0.0;

  for (long long s = 0; s <= w.Nn; ++s) {
    double pivot = s < B - 1 ? 0.0 : pivot_rate.evaluate(s);
    long long xx = s - B + 1; // identity index whose top state is s
    if (pivot == 0.0) {
      vals[static_cast<std::size_t>(s)] =
          static_cast<long double>(cfg.seeds[seed_idx++]);
      if (xx >= 0) {
        // The identity at xx degenerates to a constraint among known values.
        long double lhs = 0.0L, rhs = 0.0L, scale = 0.0L;
        for (long long j = js.omega_minus + 1; j <= 0; ++j) {
          long long y = xx - j;
          if (y < 0 || y > w.Nn)
            continue;
          long double term = vals[static_cast<std::size_t>(y)] *
                             static_cast<long double>(group_rate(j, y));
          lhs += term;
          scale = std::max(scale, std::abs(term));
        }
        for (long long j = 1; j <= F; ++j) {
          long long y = xx - j;
          if (y < 0 || y > w.Nn)
            continue;
          long double term = vals[static_cast<std::size_t>(y)] *
                             static_cast<long double>(group_rate(j, y));
          rhs += term;
          scale = std::max(scale, std::abs(term));
        }
        if (scale > 0.0L)
          max_res = std::max(
              max_res, static_cast<double>(std::abs(lhs - rhs) / scale));
      }
      continue;
    }
    // Solve the identity at xx for pi(s):
    //   pivot * pi(s) = RHS - (remaining LHS terms)
    long double acc = 0.0L;
    for (long long j = 1; j <= F; ++j) {
      long long y = xx - j;
      if (y < 0)
        continue;
      acc += vals[static_cast<std::size_t>(y)] *
             static_cast<long double>(group_rate(j, y));
    }
    for (long long j = js.omega_minus + 2; j <= 0; ++j) {
      long long y = xx - j; // ranges over [xx, s-1], all already known
      acc -= vals[static_cast<std::size_t>(y)] *
             static_cast<long double>(group_rate(j, y));
    }
    long double v = acc / static_cast<long double>(pivot);
    if (v < 0.0L) {
      long double mag = std::abs(acc) / static_cast<long double>(pivot);
      if (-v > 1e-9L * std::max<long double>(1.0L, mag))
        fail(errc::solver, "NegativeMass",
             "recursion produced negative mass at x = " + std::to_string(s) +
                 " (seed vector outside the valid cone)");
      v = 0.0L;
    }
    vals[static_cast<std::size_t>(s)] = v;
  }

  std::vector<double> out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    out[i] = static_cast<double>(vals[i]);
  normalize_values(out);
  double defect = stationary_mass_defect(model, out, w.nm.map.scale);
  DistVector d =
      to_original_units(w, std::move(out), DistVector::Kind::stationary);
  d.mass_defect = defect;
  d.max_identity_residual =
      std::max(max_res, verify_identity_stationary(model, d).max_residual);
  if (d.max_identity_residual > 10.0 * cfg.tolerance)
    fail(errc::solver, "NonConvergence",
         "identity residual " + std::to_string(d.max_identity_residual) +
             " exceeds 10x tolerance (inconsistent seeds?)");
  return d;
}

DistVector bdp_stationary(const PowerSum &birth, const PowerSum &death,
                          const SolverConfig &cfg) {
  if (cfg.N < 2)
    fail(errc::solver, "InvalidTruncation", "N must be at least 2");
  std::vector<double> logs(static_cast<std::size_t>(cfg.N + 1));
  logs[0] = 0.0;
  for (long long j = 1; j <= cfg.N; ++j) {
    double b = birth.evaluate(j - 1);
    double dd = death.evaluate(j);
    if (!(b > 0.0) || !(dd > 0.0))
      fail(errc::solver, "ZeroRateInProduct",
           "birth rate at " + std::to_string(j - 1) + " or death rate at " +
               std::to_string(j) + " is not positive");
    logs[static_cast<std::size_t>(j)] =
        logs[static_cast<std::size_t>(j - 1)] + std::log(b) - std::log(dd);
  }
  double lse = log_sum_exp(logs);
  DistVector d;
  d.kind = DistVector::Kind::stationary;
  d.offset = 0;
  d.truncation = cfg.N;
  d.values.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i)
    d.values[i] = std::exp(logs[i] - lse);
  d.mass_defect = boundary_tail_estimate(d.values, 1);
  return d;
}

DistVector solve_qsd(const JumpModel &model, const SolverConfig &cfg) {
  if (model.absorbing.empty())
    fail(errc::precondition, "EmptyAbsorbingSet",
         "QSD solve requires a nonempty absorbing set");
  NormalizedWindow w = make_window(model, cfg.N);
  const JumpModel &nm = w.nm.model;

  std::vector<long long> states; // window states outside the absorbing set
  for (long long s = 0; s <= w.Nn; ++s)
    if (!nm.absorbing.count(s))
      states.push_back(s);
  if (states.size() < 2)
    fail(errc::solver, "InvalidTruncation",
         "window contains fewer than two non-absorbing states");
  std::map<long long, int> idx;
  for (std::size_t i = 0; i < states.size(); ++i)
    idx[states[i]] = static_cast<int>(i);
  int n = static_cast<int>(states.size());

  // Sub-generator transpose with plain truncation: absorption and
  // beyond-window outflow stay only in the diagonal (killing).
  std::vector<Triplet> trip;
  double max_total = 0.0;
  for (int i = 0; i < n; ++i) {
    long long s = states[static_cast<std::size_t>(i)];
    double diag = 0.0, total = 0.0;
    for (const auto &[omega, rate] : nm.jumps) {
      double r = rate.evaluate(s);
      if (r <= 0.0)
        continue;
      total += r;
      diag -= r;
      long long j = s + omega;
      auto it = idx.find(j);
      if (it != idx.end())
        trip.emplace_back(it->second, i, r);
    }
    trip.emplace_back(i, i, diag);
    max_total = std::max(max_total, total);
  }
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();

  double stop_tol = std::min(cfg.tolerance, 1e-13);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  bool converged = false;

  auto kill_rate = [&](const Eigen::VectorXd &nu) {
    // -(nu Q) summed = total absorption + truncation outflow under nu.
    Eigen::VectorXd q = M * nu;
    return -q.sum() / nu.sum();
  };

  bool use_power = cfg.qsd_method == QsdMethod::power_iteration;
  Eigen::SparseLU<SpMat> lu;
  if (!use_power) {
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
      use_power = true; // shift-invert unavailable: fall back
  }

  if (!use_power) {
    for (long long it = 0; it < cfg.max_iterations && !converged; ++it) {
      Eigen::VectorXd next = lu.solve(v);
      if (lu.info() != Eigen::Success) {
        use_power = true;
        break;
      }
      next = next.cwiseMax(0.0);
      double s = next.lpNorm<1>();
      if (!(s > 0.0)) {
        use_power = true;
        break;
      }
      next /= s;
      if ((next - v).lpNorm<1>() <= stop_tol)
        converged = true;
      v = next;
    }
  }
  if (use_power && !converged) {
    double h = 0.5 / std::max(max_total, 1e-12);
    v = Eigen::VectorXd::Constant(n, 1.0 / n);
    for (long long it = 0; it < cfg.max_iterations * 50 && !converged; ++it) {
      Eigen::VectorXd next = v + h * (M * v).eval();
      next = next.cwiseMax(0.0);
      double s = next.lpNorm<1>();
      if (!(s > 0.0))
        fail(errc::solver, "NonConvergence", "power iteration lost all mass");
      next /= s;
      if ((next - v).lpNorm<1>() <= stop_tol)
        converged = true;
      v = next;
    }
  }
  if (!converged)
    fail(errc::solver, "NonConvergence",
         "QSD iteration did not converge within the iteration budget");
  double theta_hat = kill_rate(v);

  std::vector<double> lattice(static_cast<std::size_t>(w.Nn + 1), 0.0);
  for (int i = 0; i < n; ++i)
    lattice[static_cast<std::size_t>(states[static_cast<std::size_t>(i)])] =
        v[i];
  // The window loses genuine tail mass under plain truncation; report values
  // that sum to 1 - mass_defect so interior points approximate the true QSD.
  double defect = boundary_tail_estimate(lattice, w.nm.map.scale);
  normalize_values(lattice, 1.0 - defect);

  DistVector d =
      to_original_units(w, std::move(lattice), DistVector::Kind::qsd);
  d.mass_defect = defect;
  d.theta = theta_hat;

  double theta_formula = theta_from_dist(model, d);
  if (std::abs(theta_hat - theta_formula) >
      100.0 * cfg.tolerance * std::max(1.0, theta_hat))
    fail(errc::solver, "ThetaMismatch",
         "eigenvalue theta " + std::to_string(theta_hat) +
             " and absorption-flux formula " + std::to_string(theta_formula) +
             " disagree; truncation too small?");
  d.max_identity_residual = verify_identity_qsd(model, d).max_residual;
  return d;
}

DistVector reference_dist(const ReferenceSpec &spec, long long N) {
  if (N < 1)
    fail(errc::invalid_argument, "InvalidTruncation", "N must be positive");
  DistVector d;
  d.kind = DistVector::Kind::stationary;
  d.truncation = N;
  std::vector<double> logs;
  switch (spec.family) {
  case ReferenceSpec::Family::cmp: {
    if (!(spec.a > 0) || !(spec.b > 0))
      fail(errc::invalid_argument, "ParameterDomain",
           "cmp requires a > 0 and b > 0");
    d.offset = 0;
    for (long long x = 0; x <= N; ++x)
      logs.push_back(static_cast<double>(x) * std::log(spec.a) -
                     spec.b * std::lgamma(static_cast<double>(x) + 1.0));
    break;
  }
  case ReferenceSpec::Family::zeta: {
    if (!(spec.a > 1))
      fail(errc::invalid_argument, "ParameterDomain", "zeta requires a > 1");
    d.offset = 1;
    for (long long x = 1; x <= N; ++x)
      logs.push_back(-spec.a * std::log(static_cast<double>(x)));
    break;
  }
  case ReferenceSpec::Family::geometric: {
    if (!(spec.a > 0) || !(spec.a < 1))
      fail(errc::invalid_argument, "ParameterDomain",
           "geometric requires 0 < p < 1");
    d.offset = 0;
    for (long long x = 0; x <= N; ++x)
      logs.push_back(std::log1p(-spec.a) +
                     static_cast<double>(x) * std::log(spec.a));
    break;
  }
  case ReferenceSpec::Family::poisson: {
    if (!(spec.a > 0))
      fail(errc::invalid_argument, "ParameterDomain",
           "poisson requires lambda > 0");
    d.offset = 0;
    for (long long x = 0; x <= N; ++x)
      logs.push_back(static_cast<double>(x) * std::log(spec.a) -
                     std::lgamma(static_cast<double>(x) + 1.0) - spec.a);
    break;
  }
  case ReferenceSpec::Family::negative_binomial: {
    if (!(spec.a > 0) || !(spec.b > 0) || !(spec.b < 1))
      fail(errc::invalid_argument, "ParameterDomain",
           "negative binomial requires a > 0 and 0 < delta < 1");
    d.offset = 0;
    for (long long x = 0; x <= N; ++x)
      logs.push_back(std::lgamma(static_cast<double>(x) + spec.a) -
                     std::lgamma(static_cast<double>(x) + 1.0) -
                     std::lgamma(spec.a) +
                     static_cast<double>(x) * std::log(spec.b) +
                     spec.a * std::log1p(-spec.b));
    break;
  }
  }
  double lse = log_sum_exp(logs);
  d.values.resize(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i)
    d.values[i] = std::exp(logs[i] - lse);
  return d;
}

} // namespace ctmc
