#pragma once

// Experiment drivers behind the command-line tool: convergence sweeps,
// long-time conservation runs and single runs, written out as CSV.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tsi/diagnostics.hpp"
#include "tsi/integrators.hpp"
#include "tsi/oracles.hpp"
#include "tsi/problems.hpp"

namespace tsi {

enum class ProblemKind { HenonHeiles, Nls, Cpd };
enum class Experiment { Convergence, LongTime, Single };

inline std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::HenonHeiles: return "henon_heiles";
    case ProblemKind::Nls: return "nls";
    case ProblemKind::Cpd: return "cpd";
  }
  return "?";
}

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Convergence: return "convergence";
    case Experiment::LongTime: return "longtime";
    case Experiment::Single: return "single";
  }
  return "?";
}

inline ProblemKind parse_problem(const std::string& s) {
  if (s == "henon_heiles" || s == "hh") return ProblemKind::HenonHeiles;
  if (s == "nls") return ProblemKind::Nls;
  if (s == "cpd") return ProblemKind::Cpd;
  throw InvalidInput("problem: unknown value '" + s + "' (expected henon_heiles, nls or cpd)");
}

inline Experiment parse_experiment(const std::string& s) {
  if (s == "convergence" || s == "converge") return Experiment::Convergence;
  if (s == "longtime") return Experiment::LongTime;
  if (s == "single") return Experiment::Single;
  throw InvalidInput("experiment: unknown value '" + s + "'");
}

struct RunConfig {
  ProblemKind problem = ProblemKind::HenonHeiles;
  Experiment experiment = Experiment::Convergence;
  std::vector<Scheme> schemes;
  std::vector<double> eps;
  std::vector<double> h;
  double t_end = 1.0;
  int n_tau = 64;
  int n_x = 16;
  double fp_tol = 1e-10;
  int fp_max_iter = 200;
  int avf_quad_nodes = 4;
  std::string out;
  int threads = 1;

  void validate() const {
    if (schemes.empty()) throw InvalidInput("scheme: list must be nonempty");
    if (eps.empty()) throw InvalidInput("eps: list must be nonempty");
    if (h.empty()) throw InvalidInput("h: list must be nonempty");
    for (double e : eps) {
      if (!(e > 0.0 && e <= 1.0)) throw InvalidInput("eps: values must lie in (0, 1]");
    }
    for (double v : h) {
      if (!(v > 0.0)) throw InvalidInput("h: values must be > 0");
    }
    if (experiment == Experiment::LongTime ? !(t_end >= 0.0) : !(t_end > 0.0)) {
      throw InvalidInput("t_end must be > 0");
    }
    if (n_tau % 2 != 0) throw InvalidInput("n_tau must be even");
    if (n_tau < 4) throw InvalidInput("n_tau must be >= 4");
    if (n_x % 2 != 0 || n_x < 4) throw InvalidInput("n_x must be even and >= 4");
    if (!(fp_tol > 0.0)) throw InvalidInput("fp_tol must be > 0");
    if (fp_max_iter < 1) throw InvalidInput("fp_max_iter must be >= 1");
    if (avf_quad_nodes < 2) throw InvalidInput("avf_nodes must be >= 2");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
    if (experiment == Experiment::Convergence && h.size() < 3) {
      throw InvalidInput("h: a convergence sweep needs at least 3 step sizes");
    }
  }
};

inline RunConfig default_config(ProblemKind problem, Experiment experiment) {
  RunConfig c;
  c.problem = problem;
  c.experiment = experiment;
  c.n_tau = problem == ProblemKind::Nls ? 256 : 64;
  c.n_x = 16;
  switch (experiment) {
    case Experiment::Convergence:
      c.schemes = {Scheme::SE1, Scheme::SE2};
      c.eps = {1.0, 1e-2, 1e-4, 1e-6};
      c.h = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
      c.t_end = 1.0;
      break;
    case Experiment::LongTime:
      c.schemes = {Scheme::SE1, Scheme::SE2, Scheme::FD, Scheme::ME};
      c.eps = problem == ProblemKind::Cpd ? std::vector<double>{0.5, 0.1}
                                           : std::vector<double>{1e-1, 1e-2};
      c.h = {1.0 / 5};
      c.t_end = 1000.0;
      break;
    case Experiment::Single:
      c.schemes = {Scheme::SE2};
      c.eps = {1e-2};
      c.h = {1.0 / 20};
      c.t_end = 1.0;
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Config parsing. Keys map to lists of raw strings; list values in a file are
// comma separated, on the command line a flag may be repeated.

using ConfigMap = std::map<std::string, std::vector<std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  auto parse_one = [&](const std::string& part) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      return v;
    } catch (const std::exception&) {
      throw InvalidInput(key + ": '" + s + "' is not a number");
    }
  };
  // Accept fractions like 1/160.
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    return parse_one(trim(s.substr(0, slash))) / parse_one(trim(s.substr(slash + 1)));
  }
  return parse_one(s);
}

inline int parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidInput(key + ": '" + s + "' is not an integer");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "problem", "experiment", "scheme", "eps",      "h",   "t_end",  "n_tau",
      "n_x",     "fp_tol",     "fp_max_iter", "avf_nodes", "out", "threads"};
  return keys;
}

}  // namespace detail

/// Parses `key = value[, value...]` lines; `#` starts a comment.
inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const auto& keys = detail::known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = detail::split_list(line.substr(eq + 1));
  }
  return out;
}

inline ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Resolves a RunConfig: defaults for (problem, experiment), then `file`
/// values, then `flags` (which replace whole keys).
inline RunConfig parse_config(const ConfigMap& file, const ConfigMap& flags,
                              std::optional<Experiment> experiment = std::nullopt) {
  ConfigMap merged = file;
  for (const auto& [k, v] : flags) merged[k] = v;
  for (const auto& [k, v] : merged) {
    const auto& keys = detail::known_keys();
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw InvalidInput("unknown key '" + k + "'");
    }
  }
  auto single = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = merged.find(key);
    if (it == merged.end()) return std::nullopt;
    if (it->second.size() != 1) throw InvalidInput(key + ": expected exactly one value");
    return it->second.front();
  };

  const ProblemKind problem =
      parse_problem(single("problem").value_or("henon_heiles"));
  Experiment exp = experiment.value_or(Experiment::Convergence);
  if (!experiment) {
    if (auto e = single("experiment")) exp = parse_experiment(*e);
  }
  RunConfig c = default_config(problem, exp);

  if (auto it = merged.find("scheme"); it != merged.end()) {
    c.schemes.clear();
    for (const auto& s : it->second) c.schemes.push_back(parse_scheme(s));
  }
  if (auto it = merged.find("eps"); it != merged.end()) {
    c.eps.clear();
    for (const auto& s : it->second) c.eps.push_back(detail::parse_real("eps", s));
  }
  if (auto it = merged.find("h"); it != merged.end()) {
    c.h.clear();
    for (const auto& s : it->second) c.h.push_back(detail::parse_real("h", s));
  }
  if (auto v = single("t_end")) c.t_end = detail::parse_real("t_end", *v);
  if (auto v = single("n_tau")) c.n_tau = detail::parse_int("n_tau", *v);
  if (auto v = single("n_x")) c.n_x = detail::parse_int("n_x", *v);
  if (auto v = single("fp_tol")) c.fp_tol = detail::parse_real("fp_tol", *v);
  if (auto v = single("fp_max_iter")) c.fp_max_iter = detail::parse_int("fp_max_iter", *v);
  if (auto v = single("avf_nodes")) c.avf_quad_nodes = detail::parse_int("avf_nodes", *v);
  if (auto v = single("out")) c.out = *v;
  if (auto v = single("threads")) c.threads = detail::parse_int("threads", *v);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Problem instances

/// A problem at a given eps together with its default data and the map into
/// the variables in which errors are measured (identity except for CPD, where
/// errors are taken in (x, v)).
struct ProblemInstance {
  ProblemKind kind;
  double eps;
  ProblemSpec spec;
  StateVector u0;
  ExtraInvariant extra;  // CPD energy E(x, v); empty otherwise

  StateVector observable(const StateVector& u) const {
    if (kind != ProblemKind::Cpd) return u;
    const CpdState s = cpd_from_canonical(u, eps);
    StateVector out(4);
    out << s.x(0), s.x(1), s.v(0), s.v(1);
    return out;
  }
};

inline ProblemInstance make_instance(ProblemKind kind, double eps, int n_x) {
  switch (kind) {
    case ProblemKind::HenonHeiles:
      return {kind, eps, make_henon_heiles(), henon_heiles_u0(), {}};
    case ProblemKind::Nls:
      return {kind, eps, make_nls(n_x), nls_u0(n_x), {}};
    case ProblemKind::Cpd:
      return {kind, eps, make_cpd(eps), cpd_to_canonical(cpd_initial_state(), eps),
              [eps](const StateVector& u) { return cpd_energy(cpd_from_canonical(u, eps)); }};
  }
  throw InvalidInput("unknown problem");
}

inline SchemeConfig scheme_config(const RunConfig& c, Scheme s, double h) {
  SchemeConfig sc;
  sc.h = h;
  sc.scheme = s;
  sc.fp_tol = c.fp_tol;
  sc.fp_max_iter = c.fp_max_iter;
  sc.avf_quad_nodes = c.avf_quad_nodes;
  return sc;
}

/// Runs the scheme from well-prepared data to t_end and returns u(t_end).
inline StateVector solve_two_scale(const ProblemInstance& inst, const CollocatedField& field,
                                   const SchemeConfig& cfg, double t_end,
                                   TrajectoryStats* stats = nullptr) {
  TwoScaleState s0 = prepare_initial_data_2nd(field, inst.u0, inst.eps);
  return extract_solution(integrate(field, cfg, std::move(s0), t_end, stats), inst.spec);
}

// ---------------------------------------------------------------------------
// References

/// Below these eps the brute-force oracles are too costly or too inaccurate
/// (error amplified by 1/eps in the CPD velocity) and the scheme itself at
/// h_min / 16 is used as the reference.
inline double oracle_eps_floor(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::HenonHeiles: return 1e-4;
    case ProblemKind::Nls: return 1e-2;
    case ProblemKind::Cpd: return 1e-2;
  }
  return 1.0;
}

struct Reference {
  StateVector u;
  std::string kind;  // "rk45", "strang" or "self"
};

inline constexpr int kSelfReferenceRefinement = 16;

inline Reference reference_solution(const ProblemInstance& inst, const CollocatedField& field,
                                    const RunConfig& c, Scheme scheme, double h_min) {
  if (inst.eps >= oracle_eps_floor(inst.kind)) {
    if (inst.kind == ProblemKind::Nls) {
      // Step count rounded up so that t_end / dt is an integer.
      const double dt0 = std::min(inst.eps, h_min) / 100.0;
      const double steps = std::ceil(c.t_end / dt0 - 1e-9);
      return {strang_splitting_nls(inst.u0, inst.eps, c.t_end / steps, c.t_end, c.n_x),
              "strang"};
    }
    OdeTolerance tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    return {rk_adaptive(inst.spec, inst.u0, inst.eps, c.t_end, tol), "rk45"};
  }
  SchemeConfig sc = scheme_config(c, scheme, h_min / kSelfReferenceRefinement);
  return {solve_two_scale(inst, field, sc, c.t_end), "self"};
}

// ---------------------------------------------------------------------------
// Result table

struct ResultRow {
  std::string experiment, problem, scheme;
  double eps = 0.0, h = 0.0, t = 0.0;
  std::optional<double> err, slope, err_H, err_I, err_M, err_E;
  double fp_iter_mean = 0.0;
  std::string status = "ok";
};

using ResultTable = std::vector<ResultRow>;

inline const char* csv_header() {
  return "experiment,problem,scheme,eps,h,t,err,slope,err_H,err_I,err_M,err_E,fp_iter_mean,status";
}

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt_real(*v) : std::string{};
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace detail

inline void write_csv(std::ostream& os, const ResultTable& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.problem << ',' << r.scheme << ','
       << detail::fmt_real(r.eps) << ',' << detail::fmt_real(r.h) << ','
       << detail::fmt_real(r.t) << ',' << detail::fmt_opt(r.err) << ','
       << detail::fmt_opt(r.slope) << ',' << detail::fmt_opt(r.err_H) << ','
       << detail::fmt_opt(r.err_I) << ',' << detail::fmt_opt(r.err_M) << ','
       << detail::fmt_opt(r.err_E) << ',' << detail::fmt_real(r.fp_iter_mean) << ','
       << detail::csv_escape(r.status) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sweeps

namespace detail {

/// Runs task(i) for i in [0, n) on `threads` workers; results land in slot i.
template <class Task>
auto run_cells(std::size_t n, int threads, Task&& task) {
  using Result = decltype(task(std::size_t{}));
  std::vector<Result> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = task(i);
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

inline std::string status_of(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return std::string("fp_nonconvergence: ") + e.what();
  if (dynamic_cast<const DivergenceError*>(&e)) return std::string("blowup: ") + e.what();
  if (dynamic_cast<const DomainError*>(&e)) return std::string("domain_error: ") + e.what();
  return std::string("error: ") + e.what();
}

}  // namespace detail

/// Error at t_end against a reference for every (scheme, eps, h), plus the
/// per-(scheme, eps) log-log slope.
inline ResultTable run_convergence(const RunConfig& c) {
  c.validate();
  struct Group {
    Scheme scheme;
    double eps;
  };
  std::vector<Group> groups;
  for (Scheme s : c.schemes)
    for (double e : c.eps) groups.push_back({s, e});
  const double h_min = *std::min_element(c.h.begin(), c.h.end());

  auto results = detail::run_cells(groups.size(), c.threads, [&](std::size_t gi) {
    const Group g = groups[gi];
    ResultTable rows;
    auto base_row = [&](double h) {
      ResultRow r;
      r.experiment = "convergence";
      r.problem = to_string(c.problem);
      r.scheme = std::string(to_string(g.scheme));
      r.eps = g.eps;
      r.h = h;
      r.t = c.t_end;
      return r;
    };
    try {
      const ProblemInstance inst = make_instance(c.problem, g.eps, c.n_x);
      const CollocatedField field(inst.spec, TauGrid(c.n_tau));
      const Reference ref = reference_solution(inst, field, c, g.scheme, h_min);
      const StateVector ref_obs = inst.observable(ref.u);
      std::vector<double> hs, errs;
      for (double h : c.h) {
        ResultRow r = base_row(h);
        try {
          TrajectoryStats stats;
          const StateVector u =
              solve_two_scale(inst, field, scheme_config(c, g.scheme, h), c.t_end, &stats);
          r.err = relative_solution_error(inst.observable(u), ref_obs);
          r.fp_iter_mean = stats.mean_fp_iterations();
          r.status = "ok ref=" + ref.kind;
          if (*r.err > 0.0) {
            hs.push_back(h);
            errs.push_back(*r.err);
          }
        } catch (const std::exception& e) {
          r.status = detail::status_of(e);
        }
        rows.push_back(r);
      }
      if (hs.size() >= 3) {
        const double slope = slope_fit(hs, errs);
        for (auto& r : rows)
          if (r.err) r.slope = slope;
      }
    } catch (const std::exception& e) {
      for (double h : c.h) {
        ResultRow r = base_row(h);
        r.status = detail::status_of(e);
        rows.push_back(r);
      }
    }
    return rows;
  });
  ResultTable out;
  for (auto& rows : results) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

/// Sampled conservation errors for every (scheme, eps, h). A trajectory that
/// blows up is truncated at the failing step and flagged.
inline ResultTable run_longtime(const RunConfig& c) {
  c.validate();
  struct Cell {
    Scheme scheme;
    double eps, h;
  };
  std::vector<Cell> cells;
  for (Scheme s : c.schemes)
    for (double e : c.eps)
      for (double h : c.h) cells.push_back({s, e, h});

  auto results = detail::run_cells(cells.size(), c.threads, [&](std::size_t ci) {
    const Cell cell = cells[ci];
    ResultTable rows;
    ResultRow base;
    base.experiment = "longtime";
    base.problem = to_string(c.problem);
    base.scheme = std::string(to_string(cell.scheme));
    base.eps = cell.eps;
    base.h = cell.h;
    try {
      const ProblemInstance inst = make_instance(c.problem, cell.eps, c.n_x);
      const CollocatedField field(inst.spec, TauGrid(c.n_tau));
      const long total = step_count(c.t_end, cell.h);
      const long stride = sampling_stride(total);
      Trajectory first{{0.0, inst.u0}};
      TrajectoryStats stats;
      auto record = [&](const TwoScaleState& s) {
        first.resize(1);
        first.emplace_back(s.t, extract_solution(s, inst.spec));
        const ConservationRecord rec =
            conservation_series(first, inst.spec, cell.eps, inst.extra).back();
        ResultRow r = base;
        r.t = s.t;
        r.err_H = rec.err_H;
        r.err_I = rec.err_I;
        r.err_M = rec.err_M;
        r.err_E = rec.err_E;
        r.fp_iter_mean = stats.mean_fp_iterations();
        if (!std::isfinite(rec.err_H) || !std::isfinite(rec.err_M)) {
          r.status = "blowup: non-finite invariants";
          rows.push_back(r);
          throw DivergenceError("non-finite invariants", 0, s.step);
        }
        rows.push_back(r);
      };
      try {
        integrate(field, scheme_config(c, cell.scheme, cell.h),
                  prepare_initial_data_2nd(field, inst.u0, cell.eps), c.t_end,
                  [&](const TwoScaleState& s) {
                    if (s.step % stride == 0 || s.step == total) record(s);
                  },
                  &stats);
      } catch (const std::exception& e) {
        if (rows.empty() || rows.back().status == "ok") {
          ResultRow r = base;
          r.t = rows.empty() ? 0.0 : rows.back().t;
          r.status = detail::status_of(e);
          rows.push_back(r);
        }
      }
    } catch (const std::exception& e) {
      ResultRow r = base;
      r.status = detail::status_of(e);
      rows.push_back(r);
    }
    return rows;
  });
  ResultTable out;
  for (auto& rows : results) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

/// One row per (scheme, eps, h): solution error against the reference at
/// t_end together with the invariant drifts there.
inline ResultTable run_single(const RunConfig& c) {
  c.validate();
  struct Cell {
    Scheme scheme;
    double eps, h;
  };
  std::vector<Cell> cells;
  for (Scheme s : c.schemes)
    for (double e : c.eps)
      for (double h : c.h) cells.push_back({s, e, h});

  auto results = detail::run_cells(cells.size(), c.threads, [&](std::size_t ci) {
    const Cell cell = cells[ci];
    ResultRow r;
    r.experiment = "single";
    r.problem = to_string(c.problem);
    r.scheme = std::string(to_string(cell.scheme));
    r.eps = cell.eps;
    r.h = cell.h;
    r.t = c.t_end;
    try {
      const ProblemInstance inst = make_instance(c.problem, cell.eps, c.n_x);
      const CollocatedField field(inst.spec, TauGrid(c.n_tau));
      TrajectoryStats stats;
      const StateVector u =
          solve_two_scale(inst, field, scheme_config(c, cell.scheme, cell.h), c.t_end, &stats);
      const Reference ref = reference_solution(inst, field, c, cell.scheme, cell.h);
      r.err = relative_solution_error(inst.observable(u), inst.observable(ref.u));
      const ConservationRecord rec =
          conservation_series({{0.0, inst.u0}, {c.t_end, u}}, inst.spec, cell.eps, inst.extra)
              .back();
      r.err_H = rec.err_H;
      r.err_I = rec.err_I;
      r.err_M = rec.err_M;
      r.err_E = rec.err_E;
      r.fp_iter_mean = stats.mean_fp_iterations();
      r.status = "ok ref=" + ref.kind;
    } catch (const std::exception& e) {
      r.status = detail::status_of(e);
    }
    return r;
  });
  return results;
}

inline ResultTable run_experiment(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::Convergence: return run_convergence(c);
    case Experiment::LongTime: return run_longtime(c);
    case Experiment::Single: return run_single(c);
  }
  throw InvalidInput("unknown experiment");
}

}  // namespace tsi
