#include "ctmctail.h"

#include "ctmctail/analysis.hpp"
#include "ctmctail/asymptotics.hpp"
#include "ctmctail/classify.hpp"
#include "ctmctail/errors.hpp"
#include "ctmctail/json_io.hpp"
#include "ctmctail/model.hpp"
#include "ctmctail/parse.hpp"
#include "ctmctail/simulate.hpp"
#include "ctmctail/solver.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

using nlohmann::json;

struct ctmc_model {
  ctmc::JumpModel m;
};

struct ctmc_dist {
  ctmc::DistVector d;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_tag;

ctmc_status record(const ctmc::error &e) {
  g_last_error = e.what();
  g_last_tag = e.tag();
  return static_cast<ctmc_status>(static_cast<int>(e.code()));
}

ctmc_status record_unknown(const std::exception &e) {
  g_last_error = e.what();
  g_last_tag = "Internal";
  return CTMC_ERR_INTERNAL;
}

template <typename F> ctmc_status guarded(F &&f) {
  try {
    f();
    return CTMC_OK;
  } catch (const ctmc::error &e) {
    return record(e);
  } catch (const json::exception &e) {
    g_last_error = e.what();
    g_last_tag = "SyntaxError";
    return CTMC_ERR_INVALID_ARG;
  } catch (const std::exception &e) {
    return record_unknown(e);
  }
}

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_opts(const char *opts_json) {
  if (opts_json == nullptr || *opts_json == '\0')
    return json::object();
  return json::parse(opts_json);
}

ctmc::JumpModel parse_by_kind(const std::string &text, const char *kind,
                              const std::string &origin) {
  ctmc::ModelSource src{text, origin};
  if (kind != nullptr && std::strcmp(kind, "rxn") == 0)
    return ctmc::parse_reactions(src);
  return ctmc::parse_model(src);
}

ctmc::SolverConfig solver_config(const json &o) {
  ctmc::SolverConfig cfg;
  cfg.N = o.value("N", static_cast<long long>(1000));
  cfg.tolerance = o.value("tol", 1e-10);
  if (o.contains("seeds"))
    cfg.seeds = o["seeds"].get<std::vector<double>>();
  std::string method = o.value("method", "");
  if (method == "recursive")
    cfg.method = ctmc::StationaryMethod::recursive;
  else if (method == "bdp")
    cfg.method = ctmc::StationaryMethod::bdp_closed_form;
  else if (method == "power")
    cfg.qsd_method = ctmc::QsdMethod::power_iteration;
  else if (method == "inverse")
    cfg.qsd_method = ctmc::QsdMethod::inverse_iteration;
  else if (!method.empty() && method != "truncated")
    ctmc::fail(ctmc::errc::invalid_argument, "InvalidArgument",
               "unknown method '" + method + "'");
  return cfg;
}

} // namespace

extern "C" {

unsigned ctmc_abi_version(void) { return 1; }

const char *ctmc_last_error(void) { return g_last_error.c_str(); }
const char *ctmc_last_error_tag(void) { return g_last_tag.c_str(); }

void ctmc_string_free(char *s) { std::free(s); }

ctmc_status ctmc_model_parse(const char *text, const char *kind,
                             ctmc_model **out) {
  return guarded([&] {
    if (text == nullptr || out == nullptr)
      ctmc::fail(ctmc::errc::invalid_argument, "InvalidArgument",
                 "null argument");
    *out = new ctmc_model{parse_by_kind(text, kind, "<string>")};
  });
}

ctmc_status ctmc_model_parse_file(const char *path, const char *kind,
                                  ctmc_model **out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr)
      ctmc::fail(ctmc::errc::invalid_argument, "InvalidArgument",
                 "null argument");
    std::ifstream in(path);
    if (!in)
      ctmc::fail(ctmc::errc::invalid_argument, "InvalidArgument",
                 std::string("cannot open ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const char *effective = kind;
    std::string p = path;
    if (effective == nullptr) {
      if (p.size() > 4 && p.substr(p.size() - 4) == ".rxn")
        effective = "rxn";
    }
    *out = new ctmc_model{parse_by_kind(ss.str(), effective, path)};
  });
}

void ctmc_model_free(ctmc_model *m) { delete m; }

ctmc_status ctmc_model_pretty(const ctmc_model *m, char **out_text) {
  return guarded([&] { *out_text = dup_string(ctmc::pretty_print(m->m)); });
}

ctmc_status ctmc_analyze_json(const ctmc_model *m, const char *opts_json,
                              char **out_json) {
  return guarded([&] {
    json opts = parse_opts(opts_json);
    const ctmc::JumpModel &model = m->m;
    json out;
    ctmc::JumpStructure js = ctmc::jump_structure(model);
    out["jump_structure"] = ctmc::to_json(js);
    ctmc::AsymptoticParams params = ctmc::compute_params(model);
    out["params"] = ctmc::to_json(params);
    if (params.two_sided()) {
      out["lemma_consistency"] =
          ctmc::to_json(ctmc::lemma_consistency(params, js));
      out["classification_stationary"] =
          ctmc::to_json(ctmc::classify_stationary(params));
      out["ergodicity"] = ctmc::to_json(ctmc::ergodicity_check(params));
    } else {
      out["support_obstruction"] =
          ctmc::to_json(ctmc::support_obstruction(model));
    }
    if (!model.absorbing.empty() && params.two_sided()) {
      double theta = 0.0;
      if (opts.contains("theta")) {
        theta = opts["theta"].get<double>();
      } else if (opts.value("solve_qsd", false)) {
        ctmc::SolverConfig cfg = solver_config(opts);
        if (!opts.contains("N"))
          cfg.N = 4000;
        ctmc::DistVector qsd = ctmc::solve_qsd(model, cfg);
        theta = qsd.theta.value();
        out["theta_estimate"] = theta;
      }
      if (theta > 0)
        out["classification_qsd"] =
            ctmc::to_json(ctmc::classify_qsd(params, theta));
    }
    *out_json = dup_string(out.dump(2));
  });
}

ctmc_status ctmc_solve_stationary(const ctmc_model *m, const char *opts_json,
                                  ctmc_dist **out) {
  return guarded([&] {
    json opts = parse_opts(opts_json);
    ctmc::SolverConfig cfg = solver_config(opts);
    ctmc::DistVector d;
    switch (cfg.method) {
    case ctmc::StationaryMethod::recursive: {
      if (cfg.seeds.empty()) {
        // default generating terms: read off a truncated linear solve
        std::vector<long long> slots =
            ctmc::undetermined_states(m->m, cfg.N);
        ctmc::DistVector ref = ctmc::solve_stationary_truncated(m->m, cfg);
        ctmc::NormalizedModel nm = ctmc::normalize(m->m);
        for (long long s : slots)
          cfg.seeds.push_back(ref.at(nm.map.to_original(s)));
      }
      d = ctmc::solve_stationary_recursive(m->m, cfg);
      break;
    }
    case ctmc::StationaryMethod::bdp_closed_form: {
      auto bp = m->m.jumps.find(1);
      auto dp = m->m.jumps.find(-1);
      if (m->m.jumps.size() != 2 || bp == m->m.jumps.end() ||
          dp == m->m.jumps.end())
        ctmc::fail(ctmc::errc::precondition, "NotBDP",
                   "bdp method requires jumps {-1, +1}");
      d = ctmc::bdp_stationary(bp->second, dp->second, cfg);
      break;
    }
    case ctmc::StationaryMethod::truncated_linear:
      d = ctmc::solve_stationary_truncated(m->m, cfg);
      break;
    }
    *out = new ctmc_dist{std::move(d)};
  });
}

ctmc_status ctmc_solve_qsd(const ctmc_model *m, const char *opts_json,
                           ctmc_dist **out) {
  return guarded([&] {
    json opts = parse_opts(opts_json);
    ctmc::SolverConfig cfg = solver_config(opts);
    if (!opts.contains("N"))
      cfg.N = 4000;
    *out = new ctmc_dist{ctmc::solve_qsd(m->m, cfg)};
  });
}

ctmc_status ctmc_reference_dist(const char *spec_json, ctmc_dist **out) {
  return guarded([&] {
    json o = json::parse(spec_json);
    ctmc::ReferenceSpec spec;
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "cmp")
      spec.family = ctmc::ReferenceSpec::Family::cmp;
    else if (kind == "zeta")
      spec.family = ctmc::ReferenceSpec::Family::zeta;
    else if (kind == "geometric")
      spec.family = ctmc::ReferenceSpec::Family::geometric;
    else if (kind == "poisson")
      spec.family = ctmc::ReferenceSpec::Family::poisson;
    else if (kind == "negative_binomial")
      spec.family = ctmc::ReferenceSpec::Family::negative_binomial;
    else
      ctmc::fail(ctmc::errc::invalid_argument, "ParameterDomain",
                 "unknown reference family '" + kind + "'");
    spec.a = o.value("a", 0.0);
    spec.b = o.value("b", 0.0);
    *out = new ctmc_dist{
        ctmc::reference_dist(spec, o.value("N", static_cast<long long>(1000)))};
  });
}

void ctmc_dist_free(ctmc_dist *d) { delete d; }

ctmc_status ctmc_dist_len(const ctmc_dist *d, size_t *out) {
  return guarded([&] { *out = d->d.values.size(); });
}

ctmc_status ctmc_dist_offset(const ctmc_dist *d, long long *out) {
  return guarded([&] { *out = d->d.offset; });
}

ctmc_status ctmc_dist_value(const ctmc_dist *d, long long x, double *out) {
  return guarded([&] { *out = d->d.at(x); });
}

ctmc_status ctmc_dist_tail(const ctmc_dist *d, long long x, double *out) {
  return guarded([&] { *out = d->d.tail_at(x); });
}

ctmc_status ctmc_dist_mass_defect(const ctmc_dist *d, double *out) {
  return guarded([&] { *out = d->d.mass_defect; });
}

ctmc_status ctmc_dist_theta(const ctmc_dist *d, double *out) {
  return guarded([&] {
    if (!d->d.theta)
      ctmc::fail(ctmc::errc::precondition, "PreconditionFailed",
                 "distribution carries no theta");
    *out = *d->d.theta;
  });
}

ctmc_status ctmc_dist_csv(const ctmc_dist *d, char **out_csv) {
  return guarded([&] { *out_csv = dup_string(ctmc::dist_to_csv(d->d)); });
}

ctmc_status ctmc_dist_from_csv(const char *csv, ctmc_dist **out) {
  return guarded([&] { *out = new ctmc_dist{ctmc::dist_from_csv(csv)}; });
}

ctmc_status ctmc_verify_json(const ctmc_model *m, const ctmc_dist *d,
                             const char *kind, double theta_override,
                             char **out_json) {
  return guarded([&] {
    std::string k = kind == nullptr ? "stationary" : kind;
    ctmc::DistVector dist = d->d;
    if (theta_override > 0)
      dist.theta = theta_override;
    ctmc::ResidualReport rep;
    if (k == "stationary") {
      dist.kind = ctmc::DistVector::Kind::stationary;
      rep = ctmc::verify_identity_stationary(m->m, dist);
    } else if (k == "qsd") {
      dist.kind = ctmc::DistVector::Kind::qsd;
      if (!dist.theta)
        dist.theta = ctmc::theta_from_dist(m->m, dist);
      rep = ctmc::verify_identity_qsd(m->m, dist);
    } else if (k == "tail") {
      if (!m->m.absorbing.empty() && !dist.theta)
        dist.theta = ctmc::theta_from_dist(m->m, dist);
      if (!m->m.absorbing.empty())
        dist.kind = ctmc::DistVector::Kind::qsd;
      rep = ctmc::verify_tail_identity(m->m, dist);
    } else {
      ctmc::fail(ctmc::errc::invalid_argument, "InvalidArgument",
                 "kind must be stationary, qsd or tail");
    }
    json out = ctmc::to_json(rep);
    if (dist.theta && k != "stationary")
      out["theta"] = *dist.theta;
    *out_json = dup_string(out.dump(2));
  });
}

ctmc_status ctmc_fit_tail_json(const ctmc_dist *d, const char *opts_json,
                               char **out_json) {
  return guarded([&] {
    json o = parse_opts(opts_json);
    long long lo = o.value("lo", d->d.offset);
    long long hi = o.value("hi", d->d.last_state());
    std::optional<std::string> pred;
    if (o.contains("predicted_family"))
      pred = o["predicted_family"].get<std::string>();
    *out_json =
        dup_string(ctmc::to_json(ctmc::fit_tail(d->d, lo, hi, pred)).dump(2));
  });
}

ctmc_status ctmc_simulate_trajectory_csv(const ctmc_model *m,
                                         const char *opts_json,
                                         char **out_csv) {
  return guarded([&] {
    json o = parse_opts(opts_json);
    ctmc::SsaConfig cfg;
    cfg.t_end = o.at("t_end").get<double>();
    cfg.max_steps = o.value("max_steps", cfg.max_steps);
    ctmc::Trajectory t =
        ctmc::simulate_ssa(m->m, o.at("x0").get<long long>(), cfg,
                           o.at("seed").get<std::uint64_t>());
    *out_csv = dup_string(ctmc::trajectory_to_csv(t));
  });
}

ctmc_status ctmc_simulate_stationary(const ctmc_model *m,
                                     const char *opts_json, ctmc_dist **out) {
  return guarded([&] {
    json o = parse_opts(opts_json);
    ctmc::EmpiricalConfig cfg;
    cfg.t_end = o.at("t_end").get<double>();
    cfg.burn_in = o.value("burn_in", 0.0);
    cfg.replicas = o.value("replicas", 1);
    cfg.max_steps = o.value("max_steps", cfg.max_steps);
    *out = new ctmc_dist{ctmc::empirical_stationary(
        m->m, o.at("x0").get<long long>(), cfg,
        o.at("seed").get<std::uint64_t>())};
  });
}

ctmc_status ctmc_simulate_qsd(const ctmc_model *m, const char *opts_json,
                              ctmc_dist **out) {
  return guarded([&] {
    json o = parse_opts(opts_json);
    ctmc::QsdEstimatorConfig cfg;
    cfg.n_cycles = o.value("cycles", static_cast<long long>(100));
    cfg.max_steps = o.value("max_steps", cfg.max_steps);
    if (o.contains("burn_in_fraction"))
      cfg.burn_in_fraction = o["burn_in_fraction"].get<double>();
    *out = new ctmc_dist{
        ctmc::empirical_qsd(m->m, o.at("x0").get<long long>(), cfg,
                            o.at("seed").get<std::uint64_t>())};
  });
}

} // extern "C"
