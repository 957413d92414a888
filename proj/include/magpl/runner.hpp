#pragma once

// Experiment orchestration: runs one configured experiment, writes its CSV
// tables and JSON summaries atomically into a run directory, and derives
// long-format plot tables.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "magpl/config.hpp"
#include "magpl/cvec_ineq.hpp"
#include "magpl/field.hpp"
#include "magpl/instanton.hpp"
#include "magpl/mountain_pass.hpp"

namespace magpl {

namespace fs = std::filesystem;

/// An acceptance-tagged check; a failing one makes the run exit nonzero.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Numeric table written as CSV (17 significant digits).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != header.size()) throw std::logic_error("Table: row width differs from header");
    rows.push_back(std::move(row));
  }

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("Table: no column '" + name + "'");
  }
};

struct RunRecord {
  int schema_version = kSchemaVersion;
  RunConfig config;
  std::string run_dir;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> artifacts;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CheckResult> checks;
  std::map<std::string, Table> tables;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string s = "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_double(row[i]);
    s += "\n";
  }
  return s;
}

/// Writes to a temporary sibling and renames it over `path`.
inline void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// --out, then MAGPL_OUT, then the config's output_dir.
inline fs::path resolve_output_root(const std::optional<std::string>& cli_out, const RunConfig& c) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv("MAGPL_OUT"); env && *env) return env;
  return c.output_dir;
}

namespace detail {

inline nlohmann::json checks_json(const std::vector<CheckResult>& checks) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return a;
}

inline ComplexField initial_profile(const Grid& g, const std::string& kind, double width) {
  return ComplexField::sample(g, [&](const Vec3& x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / width;
    return cplx{kind == "sech" ? 1.0 / std::cosh(r) : std::exp(-r * r), 0.0};
  });
}

/// Seeded pair (a, b) in C^dim mixing scales and the degenerate configurations
/// (collinear, equal modulus, zero) where the bounds are tight.
inline std::pair<CVec, CVec> random_pair(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto vec = [&](double scale) {
    std::vector<cplx> c(dim);
    for (auto& z : c) z = scale * cplx{g(rng), g(rng)};
    return c;
  };
  const double sa = std::pow(10.0, -2.0 + 4.0 * u(rng));
  const double sb = std::pow(10.0, -2.0 + 4.0 * u(rng));
  std::vector<cplx> a = vec(sa);
  const double kind = u(rng);
  std::vector<cplx> b;
  if (kind < 0.1) {
    const double rho = 3.0 * g(rng);
    for (const auto& z : a) b.push_back(rho * z);
  } else if (kind < 0.15) {
    const cplx ph = std::polar(1.0, 2.0 * std::numbers::pi * u(rng));
    for (const auto& z : a) b.push_back(ph * z);
  } else if (kind < 0.17) {
    b.assign(dim, cplx{});
  } else {
    b = vec(sb);
  }
  return {CVec(std::move(a)), CVec(std::move(b))};
}

inline void run_ineq_sweep(RunRecord& rec) {
  const auto& cfg = rec.config.ineq_sweep;
  Table t{{"p", "trials", "monotone_min_scaled", "monotone_violations", "simon_max_ratio", "simon_failures",
           "vi_max_ratio", "vi_failures", "p2_equality_slack"},
          {}};
  std::size_t mono_bad = 0, simon_bad = 0, vi_bad = 0;
  double eq_slack = 0.0;
  bool has_p2 = false;
  for (std::size_t ip = 0; ip < cfg.p_values.size(); ++ip) {
    const double p = cfg.p_values[ip];
    std::seed_seq seq{static_cast<std::uint64_t>(rec.config.seed), static_cast<std::uint64_t>(ip)};
    std::mt19937_64 rng(seq);
    double mono_min = std::numeric_limits<double>::infinity(), simon_ratio = 0.0, vi_ratio = 0.0, slack = 0.0;
    std::size_t mv = 0, sf = 0, vf = 0;
    for (int k = 0; k < cfg.trials; ++k) {
      const auto [a, b] = random_pair(rng, cfg.dimension);
      const double m = monotone_form(a, b, p);
      const double scale = (std::pow(norm(a), p - 1.0) + std::pow(norm(b), p - 1.0)) * (norm(a) + norm(b));
      if (scale > 0.0) {
        mono_min = std::min(mono_min, m / scale);
        if (m < -kIneqTolerance * scale) ++mv;
      }
      const IneqReport s = simon_check(a, b, p);
      if (!s.holds) ++sf;
      if (s.rhs > 0.0) simon_ratio = std::max(simon_ratio, s.lhs / s.rhs);
      if (p >= 2.0) {
        const IneqReport v = vi_check(a, b, p);
        if (!v.holds) ++vf;
        if (v.rhs > 0.0) vi_ratio = std::max(vi_ratio, v.lhs / v.rhs);
      }
      if (p == 2.0 && s.lhs > 0.0) slack = std::max(slack, std::abs(s.rhs - s.lhs) / s.lhs);
    }
    mono_bad += mv;
    simon_bad += sf;
    vi_bad += vf;
    if (p == 2.0) {
      has_p2 = true;
      eq_slack = std::max(eq_slack, slack);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.add({p, double(cfg.trials), mono_min, double(mv), simon_ratio, double(sf), p >= 2.0 ? vi_ratio : nan, double(vf),
           p == 2.0 ? slack : nan});
  }
  rec.tables["ineq_sweep"] = std::move(t);
  rec.checks.push_back({"monotone_form nonnegative", mono_bad == 0, std::to_string(mono_bad) + " violations"});
  rec.checks.push_back({"simon_check holds", simon_bad == 0, std::to_string(simon_bad) + " failures"});
  rec.checks.push_back({"vi_check holds", vi_bad == 0, std::to_string(vi_bad) + " failures"});
  if (has_p2)
    rec.checks.push_back({"p = 2 equality", eq_slack < 1e-12, "max relative slack " + format_double(eq_slack)});
  rec.summary["monotone_violations"] = mono_bad;
  rec.summary["simon_failures"] = simon_bad;
  rec.summary["vi_failures"] = vi_bad;
}

inline void run_instanton_rates(RunRecord& rec) {
  const auto& cfg = rec.config.instanton_rates;
  const std::vector<double> eps = geometric_sweep(cfg.eps_hi, cfg.eps_lo, cfg.eps_count);
  Table ident{{"p", "N", "gradient_pp", "critical_mass", "S_pow", "max_pairwise_rel"}, {}};
  Table rates{{"p", "N", "q", "epsilon", "value", "log_epsilon", "log_value", "fitted_exponent", "predicted_exponent"}, {}};
  Table fits{{"p", "N", "q", "kind", "predicted_exponent", "fitted_exponent", "relative_error", "log_case", "r_squared"}, {}};
  bool ident_ok = true, rates_ok = true;
  double worst_ident = 0.0, worst_rate = 0.0;
  for (const auto& [p, n] : cfg.pairs) {
    const int ni = static_cast<int>(n);
    const SobolevIdentities s = sobolev_identities(p, n);
    const double rel = std::max({std::abs(s.gradient_pp - s.critical_mass), std::abs(s.gradient_pp - s.S_pow),
                                 std::abs(s.critical_mass - s.S_pow)}) /
                       s.S_pow;
    worst_ident = std::max(worst_ident, rel);
    ident_ok = ident_ok && rel <= 1e-6;
    ident.add({p, n, s.gradient_pp, s.critical_mass, s.S_pow, rel});

    const double ps = critical_exponent(p, n);
    for (double q : {p, 0.5 * (p + ps), n * (p - 1.0) / (n - p)}) {
      const RateCheck rc = lemma23_rates(q, p, ni, eps, cfg.delta_psi);
      const double tol = rc.log_case ? 0.10 : 0.05;
      worst_rate = std::max(worst_rate, rc.relative_error() / tol);
      rates_ok = rates_ok && rc.relative_error() <= tol;
      for (std::size_t i = 0; i < eps.size(); ++i)
        rates.add({p, n, q, eps[i], rc.fit.values[i], std::log(eps[i]), std::log(rc.fit.values[i]), rc.fit.exponent,
                   rc.predicted});
      fits.add({p, n, q, 0.0, rc.predicted, rc.fit.exponent, rc.relative_error(), rc.log_case ? 1.0 : 0.0, rc.fit.r_squared});
    }
    const RateCheck ge = gradient_excess_rates(p, ni, eps, cfg.delta_psi);
    worst_rate = std::max(worst_rate, ge.relative_error() / 0.10);
    rates_ok = rates_ok && ge.relative_error() <= 0.10;
    fits.add({p, n, std::numeric_limits<double>::quiet_NaN(), 1.0, ge.predicted, ge.fit.exponent, ge.relative_error(), 0.0,
              ge.fit.r_squared});
  }
  rec.tables["identities"] = std::move(ident);
  rec.tables["rates"] = std::move(rates);
  rec.tables["rate_fits"] = std::move(fits);
  rec.checks.push_back({"Sobolev identities agree", ident_ok, "worst relative gap " + format_double(worst_ident)});
  rec.checks.push_back({"rate exponents match prediction", rates_ok,
                        "worst error / tolerance " + format_double(worst_rate)});
  rec.summary["worst_identity_gap"] = worst_ident;
  rec.summary["worst_rate_error_over_tolerance"] = worst_rate;
}

inline void run_certify(RunRecord& rec) {
  const RunConfig& c = rec.config;
  const ProblemParams& pp = c.problem;
  const NonlinearityModel nl = c.nonlinearity.build(pp);
  const InstantonSpec spec{1.0, {}, pp.p, static_cast<int>(pp.n_math), c.certify.delta_psi};
  CertifyOptions opt;
  opt.points_per_epsilon = c.certify.points_per_epsilon;
  opt.box_factor = c.certify.box_factor;
  opt.sigma_policy = c.certify.sigma_policy;
  opt.c_small = c.certify.c_small;
  const ThresholdReport rep = certify_cA_below_cP(c.certify.epsilons, c.potentials, nl, pp, spec, opt);

  Table t{{"epsilon", "lambda", "t_star", "ray_max", "closed_form_bound", "c_P", "margin", "grid_points"}, {}};
  bool dominated = true;
  for (const auto& e : rep.epsilon_evidence) {
    t.add({e.epsilon, e.lambda, e.t_star, e.ray_max, e.closed_form_bound, rep.c_P, rep.c_P - e.ray_max, double(e.grid_points)});
    dominated = dominated && e.ray_max <= e.closed_form_bound * (1.0 + 1e-12);
  }
  rec.tables["certify"] = std::move(t);
  const double smallest = rep.margin_at_smallest_epsilon();
  rec.checks.push_back({"margin positive at smallest epsilon", smallest > 0.0, "c_P - ray max = " + format_double(smallest)});
  rec.checks.push_back({"c_A estimate positive", rep.c_A_positive, "c_A_est = " + format_double(rep.c_A_est)});
  if (nl.enabled)
    rec.checks.push_back({"ray max below closed form", dominated, "max_t J(t u) <= sup_t (t^p D1/p - t^p* D2/p*)"});

  auto& s = rec.summary;
  s["S_est"] = rep.S_est;
  s["K_sup"] = rep.K_sup;
  s["c_P"] = rep.c_P;
  s["c_A_est"] = rep.c_A_est;
  s["margin"] = rep.margin;
  s["margin_at_smallest_epsilon"] = smallest;
  s["regime"] = rep.regime.label;
  s["lambda_from_sigma"] = rep.lambda_from_sigma;
  s["sigma"] = rep.sigma;
  s["deficit_exponent"] = rep.deficit_exponent ? nlohmann::json(*rep.deficit_exponent) : nlohmann::json(nullptr);

  if (c.certify.pure_critical_check) {
    PotentialPreset flat = c.potentials;
    flat.kernel = KernelKind::constant;
    const ThresholdReport crit =
        certify_cA_below_cP(c.certify.epsilons, flat, NonlinearityModel::none(pp), pp, spec, opt);
    Table pc{{"epsilon", "ray_max", "closed_form", "c_P", "relative_gap"}, {}};
    double gap_small = std::numeric_limits<double>::quiet_NaN(), eps_small = std::numeric_limits<double>::infinity();
    for (const auto& e : crit.epsilon_evidence) {
      const double gap = std::abs(e.closed_form_bound - crit.c_P) / crit.c_P;
      pc.add({e.epsilon, e.ray_max, e.closed_form_bound, crit.c_P, gap});
      if (e.epsilon < eps_small) {
        eps_small = e.epsilon;
        gap_small = gap;
      }
    }
    rec.tables["certify_pure_critical"] = std::move(pc);
    rec.checks.push_back({"pure critical ray max within 5% of c_P", gap_small <= 0.05,
                          "relative gap at smallest epsilon " + format_double(gap_small)});
    s["pure_critical_gap"] = gap_small;
  }
}

inline Table field_table(const ComplexField& u) {
  const Grid& g = u.grid;
  static const char* axes[] = {"x", "y", "z"};
  Table t;
  const int d = g.geometry == Geometry::radial ? 1 : g.dimension;
  for (int j = 0; j < d; ++j) t.header.emplace_back(g.geometry == Geometry::radial ? "r" : axes[j]);
  for (const char* h : {"re", "im", "abs"}) t.header.emplace_back(h);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 x = g.coordinates(i);
    std::vector<double> row(x.begin(), x.begin() + d);
    row.push_back(u.values[i].real());
    row.push_back(u.values[i].imag());
    row.push_back(std::abs(u.values[i]));
    t.add(std::move(row));
  }
  return t;
}

inline GeometryReport geometry_for(const RunConfig& c, const ComplexField& v0, const PotentialSet& pots,
                                   const NonlinearityModel& nl) {
  return verify_geometry(v0, c.geometry.radii, c.geometry.t_values, pots, nl, c.problem, c.geometry.directions, c.seed);
}

inline void record_geometry(RunRecord& rec, const GeometryReport& g) {
  Table s{{"radius", "alpha", "positive"}, {}};
  for (const auto& x : g.spheres) s.add({x.radius, x.alpha, x.positive ? 1.0 : 0.0});
  rec.tables["geometry_spheres"] = std::move(s);
  rec.checks.push_back({"mountain-pass geometry", g.passed,
                        g.passed ? "alpha > 0 on a sphere and J(t v0) < 0 beyond it" : "geometry not verified"});
  rec.summary["geometry_passed"] = g.passed;
  rec.summary["largest_positive_radius"] =
      g.largest_positive_radius ? nlohmann::json(*g.largest_positive_radius) : nlohmann::json(nullptr);
  rec.summary["first_negative_t"] = g.first_negative_t ? nlohmann::json(*g.first_negative_t) : nlohmann::json(nullptr);
}

inline void run_geometry(RunRecord& rec) {
  const RunConfig& c = rec.config;
  const Grid g = c.grid.build(c.problem.n, c.problem.n_math);
  const PotentialSet pots = c.potentials.sample(g);
  const NonlinearityModel nl = c.nonlinearity.build(c.problem);
  const ComplexField v0 = initial_profile(g, c.geometry.initial, c.geometry.width);
  const GeometryReport rep = geometry_for(c, v0, pots, nl);
  record_geometry(rec, rep);
  Table ray{{"t", "energy"}, {}};
  for (double t : c.geometry.t_values) ray.add({t, energy(scaled(v0, t), pots, nl, c.problem).total});
  rec.tables["geometry_ray"] = std::move(ray);
}

inline void run_solve(RunRecord& rec) {
  const RunConfig& c = rec.config;
  const ProblemParams& pp = c.problem;
  const Grid g = c.grid.build(pp.n, pp.n_math);
  const PotentialSet pots = c.potentials.sample(g);
  const NonlinearityModel nl = c.nonlinearity.build(pp);
  const ComplexField v0 = initial_profile(g, c.solve.initial, c.solve.width);
  const GeometryReport geo = geometry_for(c, v0, pots, nl);
  record_geometry(rec, geo);
  if (!geo.passed) return;

  SolveOptions opt;
  opt.path_nodes = c.solve.path_nodes;
  opt.tol = c.solve.tol;
  opt.max_iter = c.solve.max_iter;
  opt.reparam_every = c.solve.reparam_every;
  opt.reflection_symmetric = c.solve.reflection_symmetric;
  const MountainPassResult res = mountain_pass_solve(v0, pots, nl, pp, opt);
  const double c_P = threshold_cP(sobolev_constant(pp.p, pp.n_math), pots.K_sup, pp);

  Table log{{"iter", "level", "residual", "step_size", "max_index"}, {}};
  bool monotone = true;
  for (std::size_t i = 0; i < res.log.size(); ++i) {
    const auto& e = res.log[i];
    log.add({double(e.iter), e.level, e.residual, e.step_size, double(e.max_index)});
    if (i > 0 && e.level > res.log[i - 1].level) monotone = false;
  }
  rec.tables["convergence_log"] = std::move(log);
  rec.tables["field"] = field_table(res.u);
  Table path{{"node", "energy"}, {}};
  for (std::size_t i = 0; i < res.path.energies.size(); ++i) path.add({double(i), res.path.energies[i]});
  rec.tables["path_energies"] = std::move(path);

  const bool endpoints = res.path.nodes.front().values == res.start.values && res.path.nodes.back().values == res.end.values;
  std::mt19937_64 rng(c.seed);
  double worst_dir = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ComplexField v = random_mode(g, rng);
    worst_dir = std::max(worst_dir, std::abs(gateaux(res.u, v, pots, nl, pp)) / discrete_l2(v));
  }
  const PSReport ps = ps_diagnostics(res.iterates, pots, pp);
  Table pst{{"index", "norm", "level", "bound_slack", "violated"}, {}};
  for (std::size_t i = 0; i < ps.entries.size(); ++i) {
    const auto& e = ps.entries[i];
    pst.add({double(i), e.norm, e.level, e.rhs - e.lhs, e.violated ? 1.0 : 0.0});
  }
  rec.tables["ps_diagnostics"] = std::move(pst);

  rec.checks.push_back({"converged", res.converged, "residual " + format_double(res.residual)});
  rec.checks.push_back({"level in (0, c_P)", res.level > 0.0 && res.level < c_P,
                        "level " + format_double(res.level) + ", c_P " + format_double(c_P)});
  rec.checks.push_back({"endpoints fixed", endpoints, ""});
  rec.checks.push_back({"level nonincreasing", monotone, ""});
  if (res.converged)
    rec.checks.push_back({"directional derivatives below tol", worst_dir <= opt.tol,
                          "max |<J'(u), v>| / ||v|| = " + format_double(worst_dir)});
  rec.checks.push_back({"Palais-Smale bound", ps.violations == 0, std::to_string(ps.violations) + " violations"});

  auto& s = rec.summary;
  s["level"] = res.level;
  s["residual"] = res.residual;
  s["converged"] = res.converged;
  s["stalled"] = res.stalled;
  s["iterations"] = res.log.size();
  s["t0"] = res.t0;
  s["c_P"] = c_P;
  s["max_abs_u"] = [&] {
    double m = 0.0;
    for (const auto& z : res.u.values) m = std::max(m, std::abs(z));
    return m;
  }();
}

struct PlotSpec {
  Experiment experiment;
  const char* source;
  const char* output;
  std::vector<std::string> columns;
};

inline const std::vector<PlotSpec>& plot_specs() {
  static const std::vector<PlotSpec> specs{
      {Experiment::ineq_sweep, "ineq_sweep", "plot_ineq", {"p", "simon_max_ratio", "vi_max_ratio"}},
      {Experiment::instanton_rates,
       "rates",
       "plot_rates",
       {"p", "N", "q", "epsilon", "value", "log_epsilon", "log_value", "fitted_exponent"}},
      {Experiment::certify, "certify", "plot_certify", {"epsilon", "ray_max", "c_P", "margin"}},
      {Experiment::solve, "convergence_log", "plot_convergence", {"iter", "level", "residual"}},
      {Experiment::geometry, "geometry_spheres", "plot_geometry", {"radius", "alpha"}},
  };
  return specs;
}

}  // namespace detail

/// Long-format plot tables derived from the run's tables.
inline std::map<std::string, Table> plot_tables(const RunRecord& rec) {
  std::map<std::string, Table> out;
  for (const auto& spec : detail::plot_specs()) {
    if (spec.experiment != rec.config.experiment) continue;
    const auto it = rec.tables.find(spec.source);
    if (it == rec.tables.end()) {
      if (rec.passed()) throw std::runtime_error(std::string("emit_plot_data: missing table ") + spec.source);
      continue;  // the run stopped early; its failing checks already say why
    }
    Table t;
    t.header = spec.columns;
    std::vector<std::size_t> idx;
    for (const auto& c : spec.columns) idx.push_back(it->second.column(c));
    for (const auto& row : it->second.rows) {
      std::vector<double> r;
      for (std::size_t i : idx) r.push_back(row[i]);
      t.add(std::move(r));
    }
    out[spec.output] = std::move(t);
  }
  return out;
}

/// Writes the plot tables into the run directory; returns their paths.
inline std::vector<std::string> emit_plot_data(const RunRecord& rec) {
  std::vector<std::string> paths;
  for (const auto& [name, t] : plot_tables(rec)) {
    const fs::path p = fs::path(rec.run_dir) / (name + ".csv");
    write_atomic(p, to_csv(t));
    paths.push_back(p.string());
  }
  return paths;
}

/// Runs the experiment in `<root>/<experiment>` and writes config.json, one CSV
/// per table, summary.json (deterministic), the plot tables and record.json
/// (with timestamps and artifact paths).
inline RunRecord run(const RunConfig& config, const fs::path& root) {
  RunRecord rec;
  rec.config = config;
  rec.started_utc = utc_now();
  const fs::path dir = root / experiment_name(config.experiment);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create run directory " + dir.string() + ": " + ec.message());
  rec.run_dir = dir.string();

  auto emit = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    write_atomic(p, content);
    rec.artifacts.push_back(p.string());
  };
  emit("config.json", write_config(config));

  switch (config.experiment) {
    case Experiment::ineq_sweep:
      detail::run_ineq_sweep(rec);
      break;
    case Experiment::instanton_rates:
      detail::run_instanton_rates(rec);
      break;
    case Experiment::certify:
      detail::run_certify(rec);
      break;
    case Experiment::solve:
      detail::run_solve(rec);
      break;
    case Experiment::geometry:
      detail::run_geometry(rec);
      break;
  }

  for (const auto& [name, t] : rec.tables) emit(name + ".csv", to_csv(t));
  nlohmann::json summary = {{"schema_version", kSchemaVersion},
                            {"experiment", config.experiment},
                            {"seed", config.seed},
                            {"passed", rec.passed()},
                            {"metrics", rec.summary},
                            {"checks", detail::checks_json(rec.checks)}};
  emit("summary.json", summary.dump(2) + "\n");
  for (auto& p : emit_plot_data(rec)) rec.artifacts.push_back(std::move(p));

  rec.finished_utc = utc_now();
  rec.artifacts.push_back((dir / "record.json").string());
  nlohmann::json record = {{"schema_version", kSchemaVersion},
                           {"config", to_json(config)},
                           {"started_utc", rec.started_utc},
                           {"finished_utc", rec.finished_utc},
                           {"threads", config.threads},
                           {"artifacts", rec.artifacts},
                           {"passed", rec.passed()},
                           {"metrics", rec.summary}};
  write_atomic(dir / "record.json", record.dump(2) + "\n");
  return rec;
}

}  // namespace magpl
