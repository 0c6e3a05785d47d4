#include "ctmctail/model.hpp"

#include "ctmctail/errors.hpp"

#include <numeric>
#include <string>

namespace ctmc {

long long JumpModel::omega_star() const {
  long long g = 0;
  for (const auto &[omega, rate] : jumps)
    g = std::gcd(g, omega < 0 ? -omega : omega);
  return g == 0 ? 1 : g;
}

bool JumpModel::on_lattice(long long x) const {
  return x >= state_min && (x - state_min) % omega_star() == 0;
}

bool JumpModel::two_sided() const {
  bool plus = false, minus = false;
  for (const auto &[omega, rate] : jumps)
    (omega > 0 ? plus : minus) = true;
  return plus && minus;
}

double JumpModel::rate(long long omega, long long x) const {
  if (!on_lattice(x))
    return 0.0;
  auto it = jumps.find(omega);
  return it == jumps.end() ? 0.0 : it->second.evaluate(x);
}

double JumpModel::total_rate(long long x) const {
  double acc = 0.0;
  for (const auto &[omega, rate] : jumps)
    acc += this->rate(omega, x);
  return acc;
}

void validate(const JumpModel &model) {
  if (model.jumps.empty())
    fail(errc::validation, "ValidationError", "jump set is empty");
  if (model.jumps.count(0))
    fail(errc::validation, "ValidationError", "jump of size zero");
  if (model.state_min < 0)
    fail(errc::validation, "ValidationError", "state_min must be >= 0");

  long long horizon = model.state_min;
  for (const auto &[omega, rate] : model.jumps)
    horizon = std::max(horizon, rate.valid_from());
  long long span = 0;
  for (const auto &[omega, rate] : model.jumps)
    span = std::max(span, omega < 0 ? -omega : omega);
  horizon += 4 * span + 16;

  for (const auto &[omega, rate] : model.jumps) {
    if (rate.identically_zero())
      fail(errc::validation, "ValidationError",
           "rate for jump " + std::to_string(omega) +
               " vanishes for all large x ((A2) requires eventual strict "
               "positivity)");
    if (rate.leading_coeff() <= 0.0)
      fail(errc::validation, "ValidationError",
           "rate for jump " + std::to_string(omega) +
               " has non-positive leading coefficient ((A2))");
    for (const auto &[x, v] : rate.overrides())
      if (v < 0.0)
        fail(errc::validation, "NegativeRate",
             "override value for jump " + std::to_string(omega) + " at x = " +
                 std::to_string(x) + " is negative");
    for (long long x = model.state_min; x <= horizon; ++x) {
      if (!model.on_lattice(x))
        continue;
      double v = rate.evaluate(x); // throws NegativeRate on violation
      if (v > 0.0 && x + omega < model.state_min)
        fail(errc::validation, "ValidationError",
             "positive rate at x = " + std::to_string(x) + " for jump " +
                 std::to_string(omega) + " leads below state_min");
    }
  }

  long long ostar = model.omega_star();
  for (long long a : model.absorbing) {
    if (a < model.state_min || (a - model.state_min) % ostar != 0)
      fail(errc::validation, "ValidationError",
           "absorbing state " + std::to_string(a) +
               " lies outside the state lattice");
    for (const auto &[omega, rate] : model.jumps)
      if (model.rate(omega, a) > 0.0 && !model.absorbing.count(a + omega))
        fail(errc::validation, "ValidationError",
             "absorbing set is not closed: rate for jump " +
                 std::to_string(omega) + " is positive at absorbing state " +
                 std::to_string(a));
  }
}

NormalizedModel normalize(const JumpModel &model) {
  NormalizedModel out;
  out.map.scale = model.omega_star();
  out.map.shift = model.state_min;
  out.model.state_min = 0;
  for (const auto &[omega, rate] : model.jumps)
    out.model.jumps.emplace(omega / out.map.scale,
                            rate.with_affine_arg(out.map.scale,
                                                 out.map.shift));
  for (long long a : model.absorbing)
    out.model.absorbing.insert(out.map.to_normalized(a));
  return out;
}

} // namespace ctmc
