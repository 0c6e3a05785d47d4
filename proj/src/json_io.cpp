#include "ctmctail/json_io.hpp"

#include "ctmctail/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ctmc {

namespace {

nlohmann::json num_or_null(double v) {
  if (std::isnan(v))
    return nullptr;
  return v;
}

nlohmann::json bound_json(const std::optional<DecayBound> &b) {
  if (!b)
    return nullptr;
  nlohmann::json j{{"family", b->family}, {"a", num_or_null(b->a)}};
  if (b->b)
    j["b"] = *b->b;
  return j;
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

nlohmann::json to_json(const JumpStructure &js) {
  nlohmann::json A = nlohmann::json::object();
  for (const auto &[j, set] : js.A)
    A[std::to_string(j)] = set;
  return {{"omega_star", js.omega_star},
          {"omega_plus", js.has_plus ? nlohmann::json(js.omega_plus)
                                     : nlohmann::json(nullptr)},
          {"omega_minus", js.has_minus ? nlohmann::json(js.omega_minus)
                                       : nlohmann::json(nullptr)},
          {"A", A}};
}

nlohmann::json to_json(const AsymptoticParams &p) {
  nlohmann::json aj = nlohmann::json::object(), gj = nlohmann::json::object();
  for (const auto &[j, v] : p.alpha_j)
    aj[std::to_string(j)] = v;
  for (const auto &[j, v] : p.gamma_j)
    gj[std::to_string(j)] = v;
  nlohmann::json out{
      {"R", p.R},
      {"R_minus", p.has_minus ? nlohmann::json(p.R_minus) : nullptr},
      {"R_plus", p.has_plus ? nlohmann::json(p.R_plus) : nullptr},
      {"sigma1", p.sigma1},
      {"sigma2", p.sigma2},
      {"alpha", p.alpha},
      {"alpha_minus", p.has_minus ? nlohmann::json(p.alpha_minus) : nullptr},
      {"alpha_plus", p.has_plus ? nlohmann::json(p.alpha_plus) : nullptr},
      {"beta", p.has_minus ? nlohmann::json(p.beta) : nullptr},
      {"gamma", p.gamma},
      {"vartheta", p.vartheta},
      {"Delta", p.two_sided() ? nlohmann::json(p.Delta) : nullptr},
      {"delta", p.two_sided() ? nlohmann::json(p.delta) : nullptr},
      {"alpha_j", aj},
      {"gamma_j", gj},
      {"one_sided", !p.two_sided()},
  };
  return out;
}

nlohmann::json to_json(const TailClassification &c) {
  return {{"regime", regime_name(c.regime)},
          {"lower", bound_json(c.lower)},
          {"upper", bound_json(c.upper)},
          {"clauses", c.clauses},
          {"warnings", c.warnings}};
}

nlohmann::json to_json(const ConsistencyReport &r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto &c : r.checks)
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"residual", c.residual()}});
  return {{"checks", checks},
          {"max_residual", r.max_residual},
          {"ok", r.ok}};
}

nlohmann::json to_json(const ResidualReport &r) {
  return {{"max_residual", r.max_residual},
          {"mean_residual", r.mean_residual},
          {"worst_x", r.worst_x},
          {"form", r.form}};
}

nlohmann::json to_json(const TailFit &f) {
  return {{"family", f.family},
          {"a", f.a},
          {"coeff", f.coeff},
          {"rms", f.rms},
          {"gof", f.gof}};
}

nlohmann::json to_json(const ErgodicityReport &r) {
  return {{"verdict",
           r.verdict == ErgodicVerdict::Ergodic ? "Ergodic" : "Unknown"},
          {"reason", r.reason}};
}

nlohmann::json to_json(const ObstructionReport &r) {
  return {{"no_qsd_possible", r.no_qsd_possible},
          {"stationary", r.stationary_note},
          {"qsd", r.qsd_note}};
}

std::string dist_to_csv(const DistVector &d) {
  std::ostringstream os;
  os << "x,p(x),T(x)\n";
  std::vector<double> t = d.tails();
  for (std::size_t i = 0; i < d.values.size(); ++i)
    os << d.offset + static_cast<long long>(i) << ","
       << fmt_g17(d.values[i]) << "," << fmt_g17(t[i]) << "\n";
  return os.str();
}

DistVector dist_from_csv(const std::string &csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,", 0) != 0)
    fail(errc::syntax, "SyntaxError",
         "distribution CSV must start with the header 'x,p(x),T(x)'");
  DistVector d;
  bool first = true;
  long long prev = 0;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    long long x;
    double p;
    if (std::sscanf(line.c_str(), "%lld,%lf", &x, &p) != 2)
      fail(errc::syntax, "SyntaxError",
           "bad distribution CSV row: " + line);
    if (first) {
      d.offset = x;
      first = false;
    } else if (x != prev + 1) {
      fail(errc::syntax, "SyntaxError",
           "distribution CSV rows must be consecutive states");
    }
    prev = x;
    d.values.push_back(p);
  }
  if (d.values.empty())
    fail(errc::syntax, "SyntaxError", "distribution CSV has no rows");
  d.truncation = static_cast<long long>(d.values.size()) - 1;
  return d;
}

std::string trajectory_to_csv(const Trajectory &t) {
  std::ostringstream os;
  os << "t,x\n";
  for (std::size_t i = 0; i < t.times.size(); ++i)
    os << fmt_g17(t.times[i]) << "," << t.states[i] << "\n";
  return os.str();
}

} // namespace ctmc
