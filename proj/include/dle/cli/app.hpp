#pragma once

// Command implementations behind tools/dle.cpp: JSON config parsing, the
// solve / compare / sweep / gen-problem commands and their report files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "dle/dle.hpp"

namespace dle::cli {

using json = nlohmann::ordered_json;

struct OutputSpec {
  std::filesystem::path dir = "out";
  bool write_factor = false;
};

struct SweepSpec {
  std::string axis = "m";  ///< m | h | p
  std::vector<double> values;
  bool oracle = true;
};

struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  OutputSpec output;
  SweepSpec sweep;
  json echo;  ///< the effective configuration, for reports
};

/// Scalar overrides from the command line.
struct Overrides {
  std::optional<std::string> method;
  std::optional<long long> m_max;
  std::optional<double> tol;
  std::optional<double> h;
  std::optional<int> bdf_order;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out;
};

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError("config: '" + prefix_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    const std::string name = field(key);
    if constexpr (std::is_same_v<T, json>) {
      if (!v.is_object()) throw ConfigError("config: field '" + name + "' must be an object");
      out = v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config: field '" + name + "' must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        throw ConfigError("config: field '" + name + "' must be an integer");
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<long long>() < 0) {
          throw ConfigError("config: field '" + name + "' must be nonnegative");
        }
      }
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("config: field '" + name + "' must be a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) throw ConfigError("config: field '" + name + "' must be an array");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number()) {
          throw ConfigError("config: field '" + name + "' must contain numbers");
        }
        out.push_back(e.get<double>());
      }
    } else {
      if (!v.is_string()) throw ConfigError("config: field '" + name + "' must be a string");
      out = T(v.get<std::string>());
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        throw ConfigError("config: unknown field '" + field(it.key().c_str()) + "'");
      }
    }
  }

  std::string field(const std::string& key) const { return prefix_ + "." + key; }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

template <class F>
auto with_field(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: field '" + name + "': " + e.what());
  }
}

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  return format_double(x);
}

inline json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace detail

inline json echo_problem(const ProblemSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == ProblemKind::convdiff) j["n0"] = p.n0;
  if (p.kind == ProblemKind::heat_fem || p.kind == ProblemKind::diagonal) j["n"] = p.n;
  j["s"] = p.s;
  j["seed"] = p.seed;
  if (p.kind == ProblemKind::heat_fem) {
    j["dt"] = p.dt;
    j["alpha"] = p.alpha;
  }
  j["t0"] = p.t0;
  j["tf"] = p.tf;
  j["h"] = p.h;
  if (!p.a_path.empty()) j["a_path"] = p.a_path.string();
  if (!p.b_path.empty()) j["b_path"] = p.b_path.string();
  if (!p.x0_path.empty()) j["x0_path"] = p.x0_path.string();
  return j;
}

inline json echo_solver(const SolverConfig& s) {
  json j;
  j["method"] = to_string(s.method);
  j["krylov"] = to_string(s.krylov);
  j["m_max"] = s.m_max;
  j["tol"] = s.tol;
  j["bdf_order"] = s.bdf_order;
  j["bdf_start"] = s.bdf_start == BdfStart::exact_flow ? "exact_flow" : "lower_order";
  j["quadrature_order"] = s.quadrature_order;
  j["max_panel_stiffness"] = s.max_panel_stiffness;
  j["dtol"] = s.dtol;
  j["probe_stride"] = s.probe_stride;
  j["rank_tol"] = s.rank_tol;
  return j;
}

/// Parse a JSON config; relative paths are taken relative to `base_dir`.
inline RunConfig parse_config(const json& root, const std::filesystem::path& base_dir,
                              const Overrides& ov = {}) {
  RunConfig rc;
  detail::ConfigReader top(root, "config");
  json problem = json::object();
  json solver = json::object();
  json output = json::object();
  json sweep = json::object();
  top.read("problem", problem);
  top.read("solver", solver);
  top.read("output", output);
  top.read("sweep", sweep);
  top.finish();

  {
    detail::ConfigReader r(problem, "problem");
    std::string kind = "convdiff";
    long long n0 = rc.problem.n0, n = rc.problem.n, s = rc.problem.s;
    std::string a_path, b_path, x0_path;
    r.read("kind", kind);
    r.read("n0", n0);
    r.read("n", n);
    r.read("s", s);
    r.read("seed", rc.problem.seed);
    r.read("dt", rc.problem.dt);
    r.read("alpha", rc.problem.alpha);
    r.read("t0", rc.problem.t0);
    r.read("tf", rc.problem.tf);
    r.read("h", rc.problem.h);
    r.read("a_path", a_path);
    r.read("b_path", b_path);
    r.read("x0_path", x0_path);
    r.finish();
    rc.problem.kind = detail::with_field("problem.kind", [&] { return parse_problem_kind(kind); });
    rc.problem.n0 = n0;
    rc.problem.n = n;
    rc.problem.s = s;
    rc.problem.a_path = detail::resolve(base_dir, a_path);
    rc.problem.b_path = detail::resolve(base_dir, b_path);
    rc.problem.x0_path = detail::resolve(base_dir, x0_path);
  }
  {
    detail::ConfigReader r(solver, "solver");
    std::string method = "eba-exp", krylov = "extended", start = "exact_flow";
    long long m_max = rc.solver.m_max, stride = rc.solver.probe_stride;
    r.read("method", method);
    r.read("krylov", krylov);
    r.read("m_max", m_max);
    r.read("tol", rc.solver.tol);
    r.read("bdf_order", rc.solver.bdf_order);
    r.read("bdf_start", start);
    r.read("quadrature_order", rc.solver.quadrature_order);
    r.read("max_panel_stiffness", rc.solver.max_panel_stiffness);
    r.read("dtol", rc.solver.dtol);
    r.read("probe_stride", stride);
    r.read("rank_tol", rc.solver.rank_tol);
    r.finish();
    rc.solver.method = detail::with_field("solver.method", [&] { return parse_method(method); });
    if (krylov == "extended") {
      rc.solver.krylov = KrylovVariant::extended;
    } else if (krylov == "block") {
      rc.solver.krylov = KrylovVariant::block;
    } else {
      throw ConfigError("config: field 'solver.krylov' must be 'block' or 'extended'");
    }
    if (start == "exact_flow") {
      rc.solver.bdf_start = BdfStart::exact_flow;
    } else if (start == "lower_order") {
      rc.solver.bdf_start = BdfStart::lower_order;
    } else {
      throw ConfigError("config: field 'solver.bdf_start' must be 'exact_flow' or 'lower_order'");
    }
    rc.solver.m_max = m_max;
    rc.solver.probe_stride = stride;
  }
  {
    detail::ConfigReader r(output, "output");
    std::string dir = rc.output.dir.string();
    r.read("dir", dir);
    r.read("write_factor", rc.output.write_factor);
    r.finish();
    rc.output.dir = dir;
  }
  {
    detail::ConfigReader r(sweep, "sweep");
    r.read("axis", rc.sweep.axis);
    r.read("values", rc.sweep.values);
    r.read("oracle", rc.sweep.oracle);
    r.finish();
    if (rc.sweep.axis != "m" && rc.sweep.axis != "h" && rc.sweep.axis != "p") {
      throw ConfigError("config: field 'sweep.axis' must be one of m, h, p");
    }
  }

  if (ov.method) rc.solver.method = parse_method(*ov.method);
  if (ov.m_max) rc.solver.m_max = *ov.m_max;
  if (ov.tol) rc.solver.tol = *ov.tol;
  if (ov.h) rc.problem.h = *ov.h;
  if (ov.bdf_order) rc.solver.bdf_order = *ov.bdf_order;
  if (ov.seed) rc.problem.seed = *ov.seed;
  if (ov.out) rc.output.dir = *ov.out;

  detail::with_field("problem", [&] {
    rc.problem.validate();
    return 0;
  });
  detail::with_field("solver", [&] {
    rc.solver.validate();
    return 0;
  });

  rc.echo["problem"] = echo_problem(rc.problem);
  rc.echo["solver"] = echo_solver(rc.solver);
  rc.echo["output"] = {{"dir", rc.output.dir.string()}, {"write_factor", rc.output.write_factor}};
  return rc;
}

inline RunConfig load_config(const std::filesystem::path& path, const Overrides& ov = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(root, path.parent_path(), ov);
}

// ---------------------------------------------------------------------------
// Report helpers

inline json iterations_json(const Trajectory& t) {
  json arr = json::array();
  for (const IterationRecord& r : t.iterations) {
    arr.push_back({{"m", r.m},
                   {"dim", r.dim},
                   {"max_residual", r.max_residual},
                   {"final_residual", r.final_residual},
                   {"full_grid", r.full_grid},
                   {"deflated", r.deflated}});
  }
  return arr;
}

/// Rank of the truncated factor at every node.
inline std::vector<Index> node_ranks(const Trajectory& t, double dtol) {
  std::vector<Index> ranks;
  ranks.reserve(t.small.size());
  for (const Matrix& g : t.small) {
    if (g.size() == 0) {
      ranks.push_back(0);
      continue;
    }
    const SymEig e = sym_eig(g);
    Index r = 0;
    while (r < e.values.size() && e.values(r) > dtol) ++r;
    ranks.push_back(r);
  }
  return ranks;
}

inline std::string solve_csv(const Trajectory& t, const std::vector<Index>& ranks) {
  std::ostringstream out;
  out << "t,residual_frobenius,rank\n";
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    out << detail::fmt(t.times[k]) << ',' << detail::fmt(t.residuals[k]) << ',' << ranks[k]
        << '\n';
  }
  return out.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline TimeGrid grid_of(const ProblemSpec& p) { return TimeGrid(p.t0, p.tf, p.h); }

inline SymLowRank initial_factor(const Problem& p) { return SymLowRank{p.z0}; }

// ---------------------------------------------------------------------------
// Commands. Each returns the process exit status.

inline int cmd_solve(const RunConfig& rc, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(rc.output.dir);
  const auto t_start = std::chrono::steady_clock::now();
  const Problem prob = build_problem(rc.problem);
  const double t_setup = seconds_since(t_start);
  const TimeGrid grid = grid_of(rc.problem);
  SolverConfig cfg = rc.solver;
  cfg.observer = [&](const IterationRecord& r) {
    log << "m=" << r.m << " dim=" << r.dim << " residual=" << r.max_residual
        << (r.full_grid ? " (all nodes)" : " (probe nodes)") << '\n';
  };
  const auto t_solve = std::chrono::steady_clock::now();
  const Trajectory traj = solve(prob.op, prob.b, initial_factor(prob), grid, cfg);
  const double solve_seconds = seconds_since(t_solve);

  const std::vector<Index> ranks = node_ranks(traj, cfg.dtol);
  atomic_write(rc.output.dir / "solve.csv", solve_csv(traj, ranks));
  if (rc.output.write_factor) {
    const SymLowRank z = traj.factor(traj.small.size() - 1, cfg.dtol);
    write_matrix_market(z.z, rc.output.dir / "factor_Z.mtx");
  }

  json rep;
  rep["command"] = "solve";
  rep["config"] = rc.echo;
  rep["n"] = prob.size();
  rep["method"] = to_string(traj.method);
  rep["converged"] = traj.converged;
  rep["breakdown"] = traj.breakdown;
  rep["m"] = traj.m;
  rep["dim"] = traj.dim();
  rep["max_residual"] = traj.max_residual();
  rep["final_residual"] = traj.residuals.back();
  rep["final_rank"] = ranks.back();
  rep["iterations"] = iterations_json(traj);
  json nodes = json::array();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    nodes.push_back({{"t", traj.times[k]}, {"residual", traj.residuals[k]}, {"rank", ranks[k]}});
  }
  rep["nodes"] = std::move(nodes);
  rep["timings"] = {{"setup_seconds", t_setup}, {"solve_seconds", solve_seconds}};
  atomic_write(rc.output.dir / "report.json", rep.dump(2) + "\n");
  log << (traj.converged ? "converged" : "NOT converged") << " at m=" << traj.m
      << ", max residual " << traj.max_residual() << '\n';
  return traj.converged ? 0 : 1;
}

namespace detail {

// ||V1 G1 V1^T - V2 G2 V2^T||_F in an orthonormal basis Q = [V1, W] of
// range([V1, V2]); C2 = Q^T V2 is computed once per pair of bases.
class LowRankDistance {
 public:
  LowRankDistance(const Matrix& v1, const Matrix& v2) : k1_(v1.cols()) {
    const Matrix rest = v2 - v1 * (v1.transpose() * v2);
    const ThinQr w = qr_thin(rest, 1e-12, v2.norm());
    c2_.resize(k1_ + w.rank, v2.cols());
    c2_.topRows(k1_) = v1.transpose() * v2;
    c2_.bottomRows(w.rank) = w.q.transpose() * v2;
  }

  double operator()(const Matrix& g1, const Matrix& g2) const {
    Matrix d = c2_ * g2 * c2_.transpose();
    d.topLeftCorner(k1_, k1_) -= g1;
    return d.norm();
  }

 private:
  Index k1_;
  Matrix c2_;
};

inline double lifted_x11(const Matrix& v, const Matrix& g) {
  if (v.cols() == 0) return 0.0;
  const Vector r = v.row(0).transpose();
  return r.dot(g * r);
}

}  // namespace detail

inline int cmd_compare(const RunConfig& rc, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(rc.output.dir);
  const Problem prob = build_problem(rc.problem);
  const TimeGrid grid = grid_of(rc.problem);
  SolverConfig cfg = rc.solver;
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory te = solve_eba_exp(prob.op, prob.b, initial_factor(prob), grid, cfg);
  const double exp_seconds = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const Trajectory tb = solve_eba_bdf(prob.op, prob.b, initial_factor(prob), grid, cfg);
  const double bdf_seconds = seconds_since(t1);

  std::optional<DenseTrajectory> ref;
  std::string oracle_note = "dense integral oracle";
  if (prob.size() <= kIntegralOracleMaxN) {
    const Matrix z0 = prob.z0;
    const Matrix x0 = z0.cols() > 0 ? Matrix(z0 * z0.transpose()) : Matrix();
    ref = dense_reference_integral(prob.dense_a(), prob.b, x0, grid, 8);
  } else {
    oracle_note = "refused: n = " + std::to_string(prob.size()) + " exceeds oracle limit " +
                  std::to_string(kIntegralOracleMaxN);
    log << "oracle " << oracle_note << '\n';
  }

  const Matrix ve = te.basis_matrix();
  const Matrix vb = tb.basis_matrix();
  const detail::LowRankDistance distance(ve, vb);
  std::ostringstream csv;
  csv << "t,x11_exp,x11_bdf,x11_ref,rel_diff_exp,rel_diff_bdf,rel_diff_exp_bdf\n";
  double final_exp = std::numeric_limits<double>::quiet_NaN();
  double final_bdf = final_exp;
  for (std::size_t k = 0; k < te.times.size(); ++k) {
    const double x11e = detail::lifted_x11(ve, te.small[k]);
    const double x11b = detail::lifted_x11(vb, tb.small[k]);
    double x11r = std::numeric_limits<double>::quiet_NaN();
    double de = x11r, db = x11r;
    const double norm_e = te.small[k].norm();
    double scale = norm_e;
    if (ref) {
      const Matrix& xr = ref->x[k];
      x11r = xr(0);
      const double nr = xr.norm();
      const Matrix xe = te.dense(k);
      const Matrix xb = tb.dense(k);
      de = nr > 0.0 ? (xe - xr).norm() / nr : (xe - xr).norm();
      db = nr > 0.0 ? (xb - xr).norm() / nr : (xb - xr).norm();
      scale = nr;
    }
    const double dist = distance(te.small[k], tb.small[k]);
    const double deb = scale > 0.0 ? dist / scale : dist;
    csv << detail::fmt(te.times[k]) << ',' << detail::fmt(x11e) << ',' << detail::fmt(x11b) << ','
        << detail::fmt(x11r) << ',' << detail::fmt(de) << ',' << detail::fmt(db) << ','
        << detail::fmt(deb) << '\n';
    final_exp = de;
    final_bdf = db;
  }
  atomic_write(rc.output.dir / "compare.csv", csv.str());

  json rep;
  rep["command"] = "compare";
  rep["config"] = rc.echo;
  rep["n"] = prob.size();
  rep["oracle"] = oracle_note;
  rep["eba_exp"] = {{"converged", te.converged}, {"m", te.m},
                    {"max_residual", te.max_residual()}, {"seconds", exp_seconds},
                    {"final_rel_diff", detail::num(final_exp)}};
  rep["eba_bdf"] = {{"converged", tb.converged}, {"m", tb.m},
                    {"max_residual", tb.max_residual()}, {"seconds", bdf_seconds},
                    {"bdf_order", cfg.bdf_order}, {"final_rel_diff", detail::num(final_bdf)}};
  atomic_write(rc.output.dir / "report.json", rep.dump(2) + "\n");
  log << "eba-exp m=" << te.m << " rel diff " << final_exp << "; eba-bdf m=" << tb.m
      << " rel diff " << final_bdf << '\n';
  return te.converged && tb.converged ? 0 : 1;
}

struct SweepPoint {
  double axis_value = 0.0;
  double residual = 0.0;  ///< at tf
  double error = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  Index m = 0;
  bool ok = false;
};

inline std::string sweep_csv(const std::vector<SweepPoint>& pts) {
  std::ostringstream out;
  out << "axis_value,residual,error,bound_stable\n";
  for (const SweepPoint& p : pts) {
    out << detail::fmt(p.axis_value) << ',' << detail::fmt(p.residual) << ','
        << detail::fmt(p.error) << ',' << detail::fmt(p.bound) << '\n';
  }
  return out.str();
}

inline int cmd_sweep(const RunConfig& rc, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(rc.output.dir);
  const SweepSpec& sw = rc.sweep;
  std::vector<SweepPoint> points;
  if (sw.values.empty()) {
    atomic_write(rc.output.dir / "sweep.csv", sweep_csv(points));
    json rep{{"command", "sweep"}, {"config", rc.echo}, {"axis", sw.axis}, {"points", json::array()}};
    atomic_write(rc.output.dir / "report.json", rep.dump(2) + "\n");
    return 0;
  }
  if (sw.axis == "p" && rc.solver.method != Method::eba_bdf) {
    throw DomainError("sweep axis 'p' requires method eba-bdf");
  }
  const Problem prob = build_problem(rc.problem);
  const Index n = prob.size();

  // mu2(A) for the stable-case bound, when it can be computed.
  std::optional<double> mu2;
  std::optional<Matrix> dense_a;
  if (n <= kIntegralOracleMaxN) {
    dense_a = prob.dense_a();
    mu2 = log_norm_mu2(*dense_a);
  } else if (prob.a_sparse) {
    mu2 = log_norm_mu2(*prob.a_sparse);
  }

  // Reference X(tf) on the finest grid of the sweep.
  std::optional<Matrix> x_ref;
  if (sw.oracle && dense_a) {
    double h_ref = rc.problem.h;
    if (sw.axis == "h") {
      for (double v : sw.values) h_ref = std::min(h_ref, v);
    }
    const TimeGrid fine(rc.problem.t0, rc.problem.tf, h_ref);
    const Matrix x0 =
        prob.z0.cols() > 0 ? Matrix(prob.z0 * prob.z0.transpose()) : Matrix();
    x_ref = dense_reference_integral(*dense_a, prob.b, x0, fine, 8, {fine.steps()}).x.front();
  } else if (sw.oracle) {
    log << "oracle refused: n = " << n << " exceeds oracle limit " << kIntegralOracleMaxN << '\n';
  }

  json jpoints = json::array();
  for (double value : sw.values) {
    SolverConfig cfg = rc.solver;
    ProblemSpec ps = rc.problem;
    if (sw.axis == "m") {
      if (value < 1 || value != std::floor(value)) throw DomainError("sweep: m values must be positive integers");
      cfg.m_max = static_cast<Index>(value);
      cfg.tol = std::numeric_limits<double>::min();  // run exactly to m
    } else if (sw.axis == "h") {
      ps.h = value;
    } else {
      cfg.bdf_order = static_cast<int>(value);
      if (cfg.bdf_order != value) throw DomainError("sweep: p values must be 1, 2 or 3");
    }
    const TimeGrid grid = grid_of(ps);
    const Trajectory t = solve(prob.op, prob.b, initial_factor(prob), grid, cfg);
    SweepPoint pt;
    pt.axis_value = value;
    pt.residual = t.residuals.back();
    pt.m = t.m;
    pt.ok = sw.axis == "m" ? true : t.converged;
    if (x_ref) {
      const Matrix diff = t.dense(t.small.size() - 1) - *x_ref;
      pt.error = spec_norm_2(diff);
    }
    if (mu2 && *mu2 < 0.0) {
      double gsup = 0.0;
      const Index d = t.coupling.cols();
      for (const Matrix& g : t.small) {
        if (d > 0 && g.size() > 0) gsup = std::max(gsup, spec_norm_2(g.bottomRows(d)));
      }
      pt.bound = error_bound_stable(*mu2, spec_norm_2(t.coupling), gsup, grid.t0(), grid.tf());
    }
    log << sw.axis << "=" << value << " residual=" << pt.residual << " error=" << pt.error
        << " bound=" << pt.bound << '\n';
    jpoints.push_back({{"axis_value", value}, {"m", pt.m}, {"converged", t.converged},
                       {"residual", detail::num(pt.residual)}, {"error", detail::num(pt.error)},
                       {"bound_stable", detail::num(pt.bound)}});
    points.push_back(pt);
  }
  atomic_write(rc.output.dir / "sweep.csv", sweep_csv(points));
  json rep{{"command", "sweep"}, {"config", rc.echo}, {"axis", sw.axis}, {"n", n},
           {"mu2", mu2 ? detail::num(*mu2) : json(nullptr)}, {"points", jpoints}};
  atomic_write(rc.output.dir / "report.json", rep.dump(2) + "\n");
  const bool all_ok =
      std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.ok; });
  return all_ok ? 0 : 1;
}

inline int cmd_gen_problem(const RunConfig& rc, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(rc.output.dir);
  const ProblemSpec& ps = rc.problem;
  const Problem prob = build_problem(ps);
  if (ps.kind == ProblemKind::heat_fem) {
    const HeatFem fem = gen_heat_fem(ps.n, ps.dt, ps.alpha);
    write_matrix_market(fem.mass, rc.output.dir / "M.mtx");
    write_matrix_market(fem.stiffness, rc.output.dir / "K.mtx");
  } else if (prob.a_sparse) {
    write_matrix_market(*prob.a_sparse, rc.output.dir / "A.mtx");
  }
  write_matrix_market(prob.b, rc.output.dir / "B.mtx");
  json rep{{"command", "gen-problem"}, {"problem", echo_problem(ps)}, {"n", prob.size()}};
  atomic_write(rc.output.dir / "problem.json", rep.dump(2) + "\n");
  log << "wrote problem of size " << prob.size() << " to " << rc.output.dir.string() << '\n';
  return 0;
}

}  // namespace dle::cli
