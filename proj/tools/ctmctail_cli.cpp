// Command-line front end.  Links only the C API: parse -> analyze ->
// classify -> solve -> verify -> fit -> simulate, JSON/CSV on stdout,
// diagnostics on stderr.
//
// Exit codes: 0 ok, 2 parse error, 3 validation error, 4 precondition
// failure, 5 solver error, 6 simulation error, 7 bad arguments.

#include "ctmctail.h"

#include <CLI11.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

using nlohmann::json;

namespace {

struct ModelDeleter {
  void operator()(ctmc_model *m) const { ctmc_model_free(m); }
};
struct DistDeleter {
  void operator()(ctmc_dist *d) const { ctmc_dist_free(d); }
};
using ModelPtr = std::unique_ptr<ctmc_model, ModelDeleter>;
using DistPtr = std::unique_ptr<ctmc_dist, DistDeleter>;

[[noreturn]] void die(ctmc_status st) {
  std::cerr << "error (" << ctmc_last_error_tag() << "): " << ctmc_last_error()
            << "\n";
  std::exit(static_cast<int>(st));
}

void check(ctmc_status st) {
  if (st != CTMC_OK)
    die(st);
}

ModelPtr load_model(const std::string &path, const std::string &parser) {
  ctmc_model *m = nullptr;
  const char *kind = parser.empty() ? nullptr : parser.c_str();
  check(ctmc_model_parse_file(path.c_str(), kind, &m));
  return ModelPtr(m);
}

void emit(const std::string &data, const std::string &out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << data;
    if (!data.empty() && data.back() != '\n')
      std::cout << "\n";
    return;
  }
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "error: cannot write " << out_path << "\n";
    std::exit(7);
  }
  f << data;
}

std::string take_string(char *s) {
  std::string out = s == nullptr ? "" : s;
  ctmc_string_free(s);
  return out;
}

std::string dist_payload(const ctmc_dist *d, const std::string &format) {
  char *csv = nullptr;
  check(ctmc_dist_csv(d, &csv));
  std::string body = take_string(csv);
  if (format == "csv")
    return body;
  // wrap metadata + rows as JSON
  json j;
  long long off = 0;
  size_t len = 0;
  double defect = 0;
  check(ctmc_dist_offset(d, &off));
  check(ctmc_dist_len(d, &len));
  check(ctmc_dist_mass_defect(d, &defect));
  j["offset"] = off;
  j["mass_defect"] = defect;
  double theta = 0;
  if (ctmc_dist_theta(d, &theta) == CTMC_OK)
    j["theta"] = theta;
  json values = json::array(), tails = json::array();
  for (long long x = off; x < off + static_cast<long long>(len); ++x) {
    double p = 0, T = 0;
    check(ctmc_dist_value(d, x, &p));
    check(ctmc_dist_tail(d, x, &T));
    values.push_back(p);
    tails.push_back(T);
  }
  j["values"] = values;
  j["tails"] = tails;
  return j.dump(2);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(7);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Tail analysis of one-dimensional CTMCs with power-law "
               "rates: classification, stationary/QSD solvers, identity "
               "verification, tail fitting and stochastic simulation"};
  app.require_subcommand(1);

  std::string model_path, parser, out_path, format = "json";
  long long N = -1;
  double tol = 1e-10;

  auto add_model_opts = [&](CLI::App *cmd, bool with_format = true) {
    cmd->add_option("model", model_path, "model file (.model or .rxn)")
        ->required();
    cmd->add_option("--parser", parser,
                    "override parser selection (model|rxn)");
    cmd->add_option("--out", out_path, "write output to a file");
    if (with_format)
      cmd->add_option("--format", format, "output format (json|csv)");
  };

  // analyze
  auto *c_an = app.add_subcommand("analyze",
                                  "jump structure, asymptotic parameters, "
                                  "consistency checks and tail classification");
  double theta_flag = 0;
  bool solve_qsd_flag = false;
  add_model_opts(c_an, false);
  c_an->add_option("--theta", theta_flag,
                   "absorption rate for the QSD classification");
  c_an->add_flag("--solve-qsd", solve_qsd_flag,
                 "estimate theta numerically before classifying the QSD");
  c_an->add_option("--N", N, "truncation for the theta estimate");
  c_an->add_option("--tol", tol, "solver tolerance");

  // solve
  auto *c_so = app.add_subcommand("solve", "stationary distribution");
  std::string method = "truncated";
  std::vector<double> seeds;
  add_model_opts(c_so);
  c_so->add_option("--N", N, "truncation (default 1000)");
  c_so->add_option("--tol", tol, "tolerance");
  c_so->add_option("--method", method, "truncated|recursive|bdp");
  c_so->add_option("--seeds", seeds, "generating terms (recursive method)");

  // qsd
  auto *c_q = app.add_subcommand("qsd", "quasi-stationary distribution");
  std::string qsd_method = "inverse";
  add_model_opts(c_q);
  c_q->add_option("--N", N, "truncation (default 4000)");
  c_q->add_option("--tol", tol, "tolerance");
  c_q->add_option("--method", qsd_method, "inverse|power");

  // verify
  auto *c_v = app.add_subcommand(
      "verify", "identity residuals of a distribution against a model");
  std::string dist_path, verify_kind = "stationary";
  double theta_override = 0;
  add_model_opts(c_v, false);
  c_v->add_option("--dist", dist_path, "distribution CSV")->required();
  c_v->add_option("--kind", verify_kind, "stationary|qsd|tail");
  c_v->add_option("--theta", theta_override, "theta for QSD verification");

  // fit
  auto *c_f = app.add_subcommand("fit", "fit a decay family to a tail");
  std::string fit_csv, window, predicted;
  c_f->add_option("csv", fit_csv, "distribution CSV file")->required();
  c_f->add_option("--window", window, "fit window LO:HI");
  c_f->add_option("--family", predicted, "predicted family for tie-breaking");
  c_f->add_option("--out", out_path, "write output to a file");

  // simulate
  auto *c_si = app.add_subcommand("simulate", "stochastic simulation");
  std::string mode = "ssa";
  long long x0 = 0;
  double t_end = 1000, burn_in = 0;
  int replicas = 1;
  long long cycles = 200;
  std::uint64_t seed = 0;
  bool seed_given = false;
  add_model_opts(c_si);
  c_si->add_option("--mode", mode, "ssa|stationary|qsd");
  c_si->add_option("--x0", x0, "initial state")->required();
  c_si->add_option("--t-end", t_end, "simulated time horizon");
  c_si->add_option("--burn-in", burn_in, "occupancy burn-in time");
  c_si->add_option("--replicas", replicas, "independent replicas");
  c_si->add_option("--cycles", cycles, "absorption cycles (qsd mode)");
  c_si->add_option("--seed", seed, "master seed (required)")
      ->each([&](const std::string &) { seed_given = true; });

  // ref
  auto *c_r = app.add_subcommand("ref", "reference distribution");
  std::string ref_kind;
  double ref_a = 0, ref_b = 0;
  c_r->add_option("--kind", ref_kind,
                  "cmp|zeta|geometric|poisson|negative_binomial")
      ->required();
  c_r->add_option("--a", ref_a, "first parameter")->required();
  c_r->add_option("--b", ref_b, "second parameter (cmp, negative_binomial)");
  c_r->add_option("--N", N, "truncation (default 1000)");
  c_r->add_option("--out", out_path, "write output to a file");
  c_r->add_option("--format", format, "output format (json|csv)");

  CLI11_PARSE(app, argc, argv);

  if (c_an->parsed()) {
    ModelPtr m = load_model(model_path, parser);
    json opts;
    if (theta_flag > 0)
      opts["theta"] = theta_flag;
    if (solve_qsd_flag)
      opts["solve_qsd"] = true;
    if (N > 0)
      opts["N"] = N;
    opts["tol"] = tol;
    char *out = nullptr;
    check(ctmc_analyze_json(m.get(), opts.dump().c_str(), &out));
    emit(take_string(out), out_path);
  } else if (c_so->parsed()) {
    ModelPtr m = load_model(model_path, parser);
    json opts{{"N", N > 0 ? N : 1000}, {"tol", tol}, {"method", method}};
    if (!seeds.empty())
      opts["seeds"] = seeds;
    ctmc_dist *d = nullptr;
    check(ctmc_solve_stationary(m.get(), opts.dump().c_str(), &d));
    DistPtr dist(d);
    emit(dist_payload(d, format), out_path);
  } else if (c_q->parsed()) {
    ModelPtr m = load_model(model_path, parser);
    json opts{{"N", N > 0 ? N : 4000}, {"tol", tol}, {"method", qsd_method}};
    ctmc_dist *d = nullptr;
    check(ctmc_solve_qsd(m.get(), opts.dump().c_str(), &d));
    DistPtr dist(d);
    emit(dist_payload(d, format), out_path);
  } else if (c_v->parsed()) {
    ModelPtr m = load_model(model_path, parser);
    ctmc_dist *d = nullptr;
    check(ctmc_dist_from_csv(read_file(dist_path).c_str(), &d));
    DistPtr dist(d);
    char *out = nullptr;
    check(ctmc_verify_json(m.get(), d, verify_kind.c_str(), theta_override,
                           &out));
    emit(take_string(out), out_path);
  } else if (c_f->parsed()) {
    ctmc_dist *d = nullptr;
    check(ctmc_dist_from_csv(read_file(fit_csv).c_str(), &d));
    DistPtr dist(d);
    json opts;
    if (!window.empty()) {
      auto pos = window.find(':');
      if (pos == std::string::npos) {
        std::cerr << "error: --window expects LO:HI\n";
        return 7;
      }
      opts["lo"] = std::stoll(window.substr(0, pos));
      opts["hi"] = std::stoll(window.substr(pos + 1));
    }
    if (!predicted.empty())
      opts["predicted_family"] = predicted;
    char *out = nullptr;
    check(ctmc_fit_tail_json(d, opts.dump().c_str(), &out));
    emit(take_string(out), out_path);
  } else if (c_si->parsed()) {
    if (!seed_given) {
      std::cerr << "error: simulation requires --seed for reproducibility\n";
      return 7;
    }
    ModelPtr m = load_model(model_path, parser);
    if (mode == "ssa") {
      json opts{{"x0", x0}, {"t_end", t_end}, {"seed", seed}};
      char *out = nullptr;
      check(ctmc_simulate_trajectory_csv(m.get(), opts.dump().c_str(), &out));
      emit(take_string(out), out_path);
    } else if (mode == "stationary") {
      json opts{{"x0", x0},
                {"t_end", t_end},
                {"burn_in", burn_in},
                {"replicas", replicas},
                {"seed", seed}};
      ctmc_dist *d = nullptr;
      check(ctmc_simulate_stationary(m.get(), opts.dump().c_str(), &d));
      DistPtr dist(d);
      emit(dist_payload(d, format), out_path);
    } else if (mode == "qsd") {
      json opts{{"x0", x0}, {"cycles", cycles}, {"seed", seed}};
      ctmc_dist *d = nullptr;
      check(ctmc_simulate_qsd(m.get(), opts.dump().c_str(), &d));
      DistPtr dist(d);
      emit(dist_payload(d, format), out_path);
    } else {
      std::cerr << "error: unknown mode '" << mode << "'\n";
      return 7;
    }
  } else if (c_r->parsed()) {
    json spec{{"kind", ref_kind},
              {"a", ref_a},
              {"b", ref_b},
              {"N", N > 0 ? N : 1000}};
    ctmc_dist *d = nullptr;
    check(ctmc_reference_dist(spec.dump().c_str(), &d));
    DistPtr dist(d);
    emit(dist_payload(d, format), out_path);
  }
  return 0;
}
