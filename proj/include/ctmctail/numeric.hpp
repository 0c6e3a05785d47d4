#pragma once

// Small numeric helpers shared across modules.

#include <cmath>
#include <vector>

namespace ctmc {

// Relative tolerance for regime-boundary equality tests (alpha == 0,
// Delta == 0, R- == R+, ...).
inline constexpr double kRelTol = 1e-9;

inline bool near_eq(double a, double b, double scale = 1.0) {
  double m = std::max({std::abs(a), std::abs(b), std::abs(scale)});
  return std::abs(a - b) <= kRelTol * m;
}

inline bool near_zero(double v, double scale = 1.0) {
  return near_eq(v, 0.0, scale);
}

// Neumaier compensated accumulator.
class KahanSum {
public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0, comp_ = 0.0;
};

inline double log_sum_exp(const std::vector<double> &logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logs)
    m = std::max(m, v);
  if (!std::isfinite(m))
    return m;
  KahanSum acc;
  for (double v : logs)
    acc.add(std::exp(v - m));
  return m + std::log(acc.value());
}

} // namespace ctmc
