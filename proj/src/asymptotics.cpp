#include "ctmctail/asymptotics.hpp"

#include "ctmctail/errors.hpp"
#include "ctmctail/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ctmc {

JumpStructure jump_structure(const JumpModel &model) {
  if (model.jumps.empty())
    fail(errc::precondition, "EmptyJumpSet", "jump set is empty");
  JumpStructure js;
  js.omega_star = model.omega_star();
  long long max_plus = 0, min_minus = 0;
  for (const auto &[omega, rate] : model.jumps) {
    if (omega > 0) {
      js.has_plus = true;
      max_plus = std::max(max_plus, omega);
    } else {
      js.has_minus = true;
      min_minus = std::min(min_minus, omega);
    }
  }
  js.omega_plus = max_plus / js.omega_star;
  js.omega_minus = min_minus / js.omega_star;

  for (long long j = js.omega_minus; j <= js.omega_plus + 1; ++j) {
    std::vector<long long> set;
    for (const auto &[omega, rate] : model.jumps) {
      if (j <= 0 && omega < 0 && j * js.omega_star > omega)
        set.push_back(omega);
      if (j >= 1 && omega > 0 && j * js.omega_star <= omega)
        set.push_back(omega);
    }
    js.A[j] = std::move(set);
  }
  return js;
}

namespace {

// Distinct exponents of the minimal-power triples on one side, descending.
std::vector<double> side_exponents(const JumpModel &model, int sign) {
  std::vector<double> es;
  for (const auto &[omega, rate] : model.jumps) {
    if ((sign > 0) != (omega > 0))
      continue;
    APLHTriple t = rate.aplh();
    es.push_back(t.r1);
    es.push_back(t.r2);
    es.push_back(t.r3);
  }
  std::sort(es.begin(), es.end(), std::greater<>());
  std::vector<double> dedup;
  for (double e : es)
    if (dedup.empty() || dedup.back() - e > kExpTol)
      dedup.push_back(e);
  return dedup;
}

Series weighted_sum(const JumpModel &model,
                    const std::function<double(long long)> &weight) {
  Series acc;
  for (const auto &[omega, rate] : model.jumps) {
    double w = weight(omega);
    if (w != 0.0)
      acc = series_add(acc, series_scale(rate.series(), w));
  }
  return acc;
}

double coeff_checked(const Series &s, double e, const char *what) {
  if (!s.trusted_at(e))
    fail(errc::internal, "Internal",
         std::string("series truncated above required order for ") + what);
  return s.coeff_at(e);
}

} // namespace

AsymptoticParams compute_params(const JumpModel &model) {
  JumpStructure js = jump_structure(model);
  AsymptoticParams p;
  p.has_minus = js.has_minus;
  p.has_plus = js.has_plus;
  p.omega_star = js.omega_star;
  p.omega_plus = js.omega_plus;
  p.omega_minus = js.omega_minus;

  std::vector<double> Em = side_exponents(model, -1);
  std::vector<double> Ep = side_exponents(model, +1);

  double s1 = std::numeric_limits<double>::infinity();
  double s2 = std::numeric_limits<double>::infinity();
  if (p.has_minus) {
    p.R_minus = Em[0];
    s1 = std::min(s1, Em[0] - Em[1]);
    s2 = std::min(s2, Em[0] - Em[2]);
  }
  if (p.has_plus) {
    p.R_plus = Ep[0];
    s1 = std::min(s1, Ep[0] - Ep[1]);
    s2 = std::min(s2, Ep[0] - Ep[2]);
  }
  p.sigma1 = s1;
  p.sigma2 = s2;
  p.R = std::max(p.has_minus ? p.R_minus : -std::numeric_limits<double>::infinity(),
                 p.has_plus ? p.R_plus : -std::numeric_limits<double>::infinity());

  Series drift = weighted_sum(model, [](long long w) {
    return static_cast<double>(w);
  });
  Series sq = weighted_sum(model, [](long long w) {
    return static_cast<double>(w) * static_cast<double>(w);
  });
  Series back = weighted_sum(model, [](long long w) {
    return w < 0 ? 1.0 : 0.0;
  });
  Series back_w = weighted_sum(model, [](long long w) {
    return w < 0 ? static_cast<double>(-w) : 0.0;
  });
  Series fwd_w = weighted_sum(model, [](long long w) {
    return w > 0 ? static_cast<double>(w) : 0.0;
  });

  p.alpha = coeff_checked(drift, p.R, "alpha");
  p.gamma = coeff_checked(drift, p.R - p.sigma1, "gamma");
  p.vartheta = 0.5 * coeff_checked(sq, p.R, "vartheta");
  if (p.has_minus) {
    p.alpha_minus = coeff_checked(back_w, p.R_minus, "alpha_minus");
    p.gamma_minus = coeff_checked(back_w, p.R_minus - p.sigma1, "gamma_minus");
    p.beta = coeff_checked(back, p.R_minus, "beta");
  }
  if (p.has_plus) {
    p.alpha_plus = coeff_checked(fwd_w, p.R_plus, "alpha_plus");
    p.gamma_plus = coeff_checked(fwd_w, p.R_plus - p.sigma1, "gamma_plus");
  }

  if (p.two_sided()) {
    double denom = p.alpha_plus * static_cast<double>(p.omega_star);
    if (std::abs(p.sigma1 - 1.0) <= kExpTol)
      p.Delta = (-p.gamma + p.R * p.vartheta) / denom;
    else
      p.Delta = -p.gamma / denom;
    p.delta = p.Delta /
              static_cast<double>(p.omega_plus - p.omega_minus - 1);
  }

  for (const auto &[j, set] : js.A) {
    if (j < js.omega_minus + 1 || j > js.omega_plus)
      continue;
    if (j <= 0 && !p.has_minus)
      continue;
    if (j >= 1 && !p.has_plus)
      continue;
    Series acc;
    for (long long omega : set) {
      auto it = model.jumps.find(omega);
      acc = series_add(acc, it->second.series());
    }
    double base = j <= 0 ? p.R_minus : p.R_plus;
    p.alpha_j[j] = acc.trusted_at(base) ? acc.coeff_at(base) : 0.0;
    p.gamma_j[j] =
        acc.trusted_at(base - p.sigma1) ? acc.coeff_at(base - p.sigma1) : 0.0;
  }
  return p;
}

ConsistencyReport lemma_consistency(const AsymptoticParams &p,
                                    const JumpStructure &js) {
  if (!(p.has_minus && p.has_plus))
    fail(errc::precondition, "PartialParams",
         "consistency checks need a two-sided model");
  ConsistencyReport rep;
  double w = static_cast<double>(js.omega_star);

  auto sum_range = [&](const std::map<long long, double> &m, long long lo,
                       long long hi) {
    KahanSum acc;
    for (const auto &[j, v] : m)
      if (j >= lo && j <= hi)
        acc.add(v);
    return acc.value();
  };

  rep.checks.push_back({"alpha_minus = omega_star * sum_{j<=0} alpha_j",
                        p.alpha_minus,
                        w * sum_range(p.alpha_j, js.omega_minus + 1, 0)});
  rep.checks.push_back({"alpha_plus = omega_star * sum_{j>=1} alpha_j",
                        p.alpha_plus,
                        w * sum_range(p.alpha_j, 1, js.omega_plus)});
  rep.checks.push_back({"gamma_minus = omega_star * sum_{j<=0} gamma_j",
                        p.gamma_minus,
                        w * sum_range(p.gamma_j, js.omega_minus + 1, 0)});
  rep.checks.push_back({"gamma_plus = omega_star * sum_{j>=1} gamma_j",
                        p.gamma_plus,
                        w * sum_range(p.gamma_j, 1, js.omega_plus)});

  if (near_zero(p.alpha, std::max(p.alpha_plus, p.alpha_minus))) {
    KahanSum acc;
    for (const auto &[j, v] : p.alpha_j)
      acc.add(std::abs(static_cast<double>(j)) * v);
    rep.checks.push_back({"sum |j| alpha_j = vartheta / omega_star^2",
                          acc.value(), p.vartheta / (w * w)});
  }

  for (const auto &c : rep.checks) {
    rep.max_residual = std::max(rep.max_residual, c.residual());
    double scale = std::max({1.0, std::abs(c.lhs), std::abs(c.rhs)});
    if (c.residual() > kRelTol * scale) {
      rep.ok = false;
      fail(errc::internal, "ConsistencyFailure",
           "identity '" + c.name + "' violated (residual " +
               std::to_string(c.residual()) + ")");
    }
  }
  return rep;
}

} // namespace ctmc
