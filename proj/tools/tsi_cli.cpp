#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tsi/harness.hpp"

namespace {

struct Flags {
  std::string problem, t_end, n_tau, n_x, fp_tol, fp_max_iter, avf_nodes, out, threads, config;
  std::vector<std::string> schemes, eps, h;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->set_help_flag("--help", "print this help");
  sub->add_option("--problem", f.problem, "henon_heiles | nls | cpd");
  sub->add_option("--scheme", f.schemes, "SE1 | SE2 | FD | ME (repeatable)");
  sub->add_option("--eps", f.eps, "scale parameter in (0, 1] (repeatable)");
  sub->add_option("--h", f.h, "step size, fractions like 1/160 allowed (repeatable)");
  sub->add_option("--t-end", f.t_end, "final time");
  sub->add_option("--n-tau", f.n_tau, "collocation points in tau (even)");
  sub->add_option("--n-x", f.n_x, "spatial grid size for nls");
  sub->add_option("--fp-tol", f.fp_tol, "fixed-point tolerance");
  sub->add_option("--fp-max-iter", f.fp_max_iter, "fixed-point iteration cap");
  sub->add_option("--avf-nodes", f.avf_nodes, "Gauss-Legendre nodes for SE2");
  sub->add_option("--out", f.out, "CSV output path (stdout if omitted)");
  sub->add_option("--config", f.config, "key = value config file");
  sub->add_option("--threads", f.threads, "worker threads");
}

tsi::ConfigMap to_map(const Flags& f) {
  tsi::ConfigMap m;
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) m[key] = {v};
  };
  put("problem", f.problem);
  put("t_end", f.t_end);
  put("n_tau", f.n_tau);
  put("n_x", f.n_x);
  put("fp_tol", f.fp_tol);
  put("fp_max_iter", f.fp_max_iter);
  put("avf_nodes", f.avf_nodes);
  put("out", f.out);
  put("threads", f.threads);
  if (!f.schemes.empty()) m["scheme"] = f.schemes;
  if (!f.eps.empty()) m["eps"] = f.eps;
  if (!f.h.empty()) m["h"] = f.h;
  return m;
}

nlohmann::json to_json(const tsi::RunConfig& c) {
  nlohmann::json j;
  j["problem"] = tsi::to_string(c.problem);
  j["experiment"] = tsi::to_string(c.experiment);
  std::vector<std::string> schemes;
  for (auto s : c.schemes) schemes.emplace_back(tsi::to_string(s));
  j["scheme"] = schemes;
  j["eps"] = c.eps;
  j["h"] = c.h;
  j["t_end"] = c.t_end;
  j["n_tau"] = c.n_tau;
  j["n_x"] = c.n_x;
  j["fp_tol"] = c.fp_tol;
  j["fp_max_iter"] = c.fp_max_iter;
  j["avf_nodes"] = c.avf_quad_nodes;
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j;
}

int run(tsi::Experiment exp, const Flags& f) {
  const tsi::ConfigMap file = f.config.empty() ? tsi::ConfigMap{} : tsi::read_config_file(f.config);
  const tsi::RunConfig cfg = tsi::parse_config(file, to_map(f), exp);
  const tsi::ResultTable rows = tsi::run_experiment(cfg);
  if (cfg.out.empty()) {
    tsi::write_csv(std::cout, rows);
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw tsi::InvalidInput("cannot write '" + cfg.out + "'");
    tsi::write_csv(out, rows);
    std::ofstream side(cfg.out + ".json", std::ios::binary);
    side << to_json(cfg).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale integrators for highly oscillatory Hamiltonian systems"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);
  Flags conv, lt, single;
  auto* c = app.add_subcommand("converge", "error vs step size at t_end");
  auto* l = app.add_subcommand("longtime", "sampled invariant drifts");
  auto* s = app.add_subcommand("single", "one run per (scheme, eps, h)");
  add_flags(c, conv);
  add_flags(l, lt);
  add_flags(s, single);
  CLI11_PARSE(app, argc, argv);
  try {
    if (c->parsed()) return run(tsi::Experiment::Convergence, conv);
    if (l->parsed()) return run(tsi::Experiment::LongTime, lt);
    return run(tsi::Experiment::Single, single);
  } catch (const tsi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
