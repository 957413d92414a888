#pragma once

// Run configuration: a JSON document with one section per concern and one per
// experiment. Every field has a default, unknown keys are rejected, and
// write_config emits every field so that parse(write(c)) == c.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "magpl/field.hpp"
#include "magpl/rate_fit.hpp"

namespace magpl {

inline constexpr int kSchemaVersion = 1;

enum class Experiment { ineq_sweep, instanton_rates, certify, solve, geometry };

NLOHMANN_JSON_SERIALIZE_ENUM(Experiment, {{Experiment::ineq_sweep, "ineq-sweep"},
                                          {Experiment::instanton_rates, "instanton-rates"},
                                          {Experiment::certify, "certify"},
                                          {Experiment::solve, "solve"},
                                          {Experiment::geometry, "geometry"}})

inline std::string experiment_name(Experiment e) { return nlohmann::json(e).get<std::string>(); }

inline Experiment experiment_from_name(const std::string& s) {
  for (Experiment e : {Experiment::ineq_sweep, Experiment::instanton_rates, Experiment::certify, Experiment::solve,
                       Experiment::geometry})
    if (experiment_name(e) == s) return e;
  throw std::invalid_argument("unknown experiment '" + s +
                              "' (expected ineq-sweep, instanton-rates, certify, solve or geometry)");
}

struct GridConfig {
  std::string geometry = "cartesian";  // cartesian | radial (radial dimension = N_math)
  double half_width = 10.0;
  int points = 200;

  [[nodiscard]] Grid build(int dimension, double n_math) const {
    if (geometry == "radial") return Grid::radial(half_width, points, n_math);
    return Grid::cartesian(dimension, half_width, points);
  }
  bool operator==(const GridConfig&) const = default;
};

struct NonlinearityConfig {
  std::string model = "power";  // power | none
  std::string weight = "flat";  // flat | gaussian
  double width = 1.0;

  [[nodiscard]] NonlinearityModel build(const ProblemParams& pp) const {
    if (model == "none") return NonlinearityModel::none(pp);
    return NonlinearityModel::power(pp, weight == "gaussian" ? WeightKind::gaussian : WeightKind::flat, width);
  }
  bool operator==(const NonlinearityConfig&) const = default;
};

struct IneqSweepConfig {
  std::vector<double> p_values{1.3, 1.5, 2.0, 2.7, 3.5};
  int trials = 100000;
  int dimension = 3;
  bool operator==(const IneqSweepConfig&) const = default;
};

struct RatesConfig {
  std::vector<std::array<double, 2>> pairs{{2.0, 3.0}, {2.0, 4.0}, {2.0, 5.0}, {1.5, 3.0}};  // (p, N)
  double eps_hi = 0.1;
  double eps_lo = 1e-3;
  int eps_count = 8;
  double delta_psi = 1.0;
  bool operator==(const RatesConfig&) const = default;
};

struct CertifyConfig {
  std::vector<double> epsilons = geometric_sweep(0.1, 0.01, 5);
  double delta_psi = 0.5;
  double points_per_epsilon = 256.0;
  double box_factor = 1.05;
  bool sigma_policy = true;
  double c_small = 1.0;
  bool pure_critical_check = true;  // also run f = 0, K = K_sup and compare with c_P
  bool operator==(const CertifyConfig&) const = default;
};

struct SolveConfig {
  std::string initial = "gaussian";  // gaussian | sech
  double width = 1.0;
  int path_nodes = 33;
  double tol = 1e-6;
  int max_iter = 2000;
  int reparam_every = 10;
  bool reflection_symmetric = true;
  bool operator==(const SolveConfig&) const = default;
};

struct GeometryConfig {
  std::string initial = "gaussian";
  double width = 1.0;
  std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  std::vector<double> t_values = geometric_sweep(0.1, 20.0, 40);
  int directions = 16;
  bool operator==(const GeometryConfig&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::solve;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "runs";
  ProblemParams problem;
  GridConfig grid;
  PotentialPreset potentials;
  NonlinearityConfig nonlinearity;
  IneqSweepConfig ineq_sweep;
  RatesConfig instanton_rates;
  CertifyConfig certify;
  SolveConfig solve;
  GeometryConfig geometry;

  bool operator==(const RunConfig&) const = default;
};

/// Rejected configuration; `violations` lists every problem found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> v) : std::runtime_error(join(v)), violations(std::move(v)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config";
    for (const auto& x : v) s += "\n  - " + x;
    return s;
  }
};

namespace detail {

using json = nlohmann::json;

template <class T>
void read_field(const json& j, const char* section, const char* key, T& out, std::vector<std::string>& errs) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    errs.push_back(std::string(section) + "." + key + ": " + e.what());
  }
}

inline void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> known,
                           std::vector<std::string>& errs) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) errs.push_back(std::string(section) + ": unknown key '" + it.key() + "'");
  }
}

template <class Enum>
struct EnumNames;

template <>
struct EnumNames<MagneticKind> {
  static constexpr std::array<std::pair<MagneticKind, const char*>, 3> v{
      {{MagneticKind::zero, "zero"}, {MagneticKind::constant, "constant"}, {MagneticKind::symmetric, "symmetric"}}};
};
template <>
struct EnumNames<ElectricKind> {
  static constexpr std::array<std::pair<ElectricKind, const char*>, 2> v{
      {{ElectricKind::constant, "constant"}, {ElectricKind::well, "well"}}};
};
template <>
struct EnumNames<KernelKind> {
  static constexpr std::array<std::pair<KernelKind, const char*>, 2> v{
      {{KernelKind::constant, "constant"}, {KernelKind::flat_core, "flat_core"}}};
};

template <class Enum>
std::string enum_name(Enum e) {
  for (const auto& [k, n] : EnumNames<Enum>::v)
    if (k == e) return n;
  return "?";
}

template <class Enum>
void read_enum(const json& j, const char* section, const char* key, Enum& out, std::vector<std::string>& errs) {
  std::string s;
  if (!j.contains(key)) return;
  read_field(j, section, key, s, errs);
  for (const auto& [k, n] : EnumNames<Enum>::v)
    if (s == n) {
      out = k;
      return;
    }
  std::string names;
  for (const auto& [k, n] : EnumNames<Enum>::v) names += std::string(names.empty() ? "" : ", ") + n;
  errs.push_back(std::string(section) + "." + key + ": '" + s + "' is not one of " + names);
}

inline const json& section_or_empty(const json& j, const char* key, std::vector<std::string>& errs) {
  static const json empty = json::object();
  const auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) {
    errs.push_back(std::string(key) + ": must be an object");
    return empty;
  }
  return *it;
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  const auto& pp = c.problem;
  const auto& pr = c.potentials;
  json j;
  j["schema_version"] = c.schema_version;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  j["problem"] = {{"p", pp.p}, {"dimension", pp.n}, {"N_math", pp.n_math}, {"theta", pp.theta},
                  {"k", pp.k}, {"q", pp.q},         {"lambda", pp.lambda}};
  j["grid"] = {{"geometry", c.grid.geometry}, {"half_width", c.grid.half_width}, {"points", c.grid.points}};
  j["potentials"] = {{"magnetic", detail::enum_name(pr.magnetic)},
                     {"A0", pr.A0},
                     {"B", pr.B},
                     {"electric", detail::enum_name(pr.electric)},
                     {"V0", pr.V0},
                     {"V_amp", pr.V_amp},
                     {"kernel", detail::enum_name(pr.kernel)},
                     {"K_sup", pr.K_sup},
                     {"tau", pr.tau},
                     {"ell", pr.ell},
                     {"delta_K", pr.delta_K}};
  j["nonlinearity"] = {{"model", c.nonlinearity.model}, {"weight", c.nonlinearity.weight}, {"width", c.nonlinearity.width}};
  j["ineq_sweep"] = {{"p_values", c.ineq_sweep.p_values}, {"trials", c.ineq_sweep.trials}, {"dimension", c.ineq_sweep.dimension}};
  j["instanton_rates"] = {{"pairs", c.instanton_rates.pairs},
                          {"eps_hi", c.instanton_rates.eps_hi},
                          {"eps_lo", c.instanton_rates.eps_lo},
                          {"eps_count", c.instanton_rates.eps_count},
                          {"delta_psi", c.instanton_rates.delta_psi}};
  j["certify"] = {{"epsilons", c.certify.epsilons},
                  {"delta_psi", c.certify.delta_psi},
                  {"points_per_epsilon", c.certify.points_per_epsilon},
                  {"box_factor", c.certify.box_factor},
                  {"sigma_policy", c.certify.sigma_policy},
                  {"c_small", c.certify.c_small},
                  {"pure_critical_check", c.certify.pure_critical_check}};
  j["solve"] = {{"initial", c.solve.initial},
                {"width", c.solve.width},
                {"path_nodes", c.solve.path_nodes},
                {"tol", c.solve.tol},
                {"max_iter", c.solve.max_iter},
                {"reparam_every", c.solve.reparam_every},
                {"reflection_symmetric", c.solve.reflection_symmetric}};
  j["geometry"] = {{"initial", c.geometry.initial},
                   {"width", c.geometry.width},
                   {"radii", c.geometry.radii},
                   {"t_values", c.geometry.t_values},
                   {"directions", c.geometry.directions}};
  return j;
}

/// Everything wrong with a structurally parsed config, each message naming the
/// hypothesis it breaks where there is one.
inline std::vector<std::string> config_violations(const RunConfig& c) {
  std::vector<std::string> v;
  if (c.schema_version != kSchemaVersion)
    v.push_back("schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
                std::to_string(kSchemaVersion) + ")");
  if (c.threads < 1) v.emplace_back("threads must be >= 1");
  const bool field_run =
      c.experiment == Experiment::certify || c.experiment == Experiment::solve || c.experiment == Experiment::geometry;
  if (field_run) {
    for (auto& s : c.problem.violations()) v.push_back(std::move(s));
    const auto& pp = c.problem;
    const auto& pr = c.potentials;
    if (pp.p > 1.0 && pp.p < pp.n_math)
      if (auto t = tau_violation(pr.tau, pp.p, pp.n_math)) v.push_back(*t);
    if (!(pr.V0 > 0.0)) v.emplace_back("V0 must be positive: hypothesis (V)");
    if (pr.V_amp < 0.0) v.emplace_back("V_amp must be nonnegative: hypothesis (V)");
    if (!(pr.K_sup > 0.0)) v.emplace_back("K_sup must be positive: hypothesis (K)");
    if (!(pr.ell > 0.0) || !(pr.delta_K > 0.0)) v.emplace_back("ell and delta_K must be positive: hypothesis (K)");
    if (c.nonlinearity.model != "power" && c.nonlinearity.model != "none")
      v.emplace_back("nonlinearity.model must be power or none");
    if (c.nonlinearity.weight != "flat" && c.nonlinearity.weight != "gaussian")
      v.emplace_back("nonlinearity.weight must be flat or gaussian");
    if (!(c.nonlinearity.width > 0.0)) v.emplace_back("nonlinearity.width must be positive");
  }
  if (c.experiment == Experiment::solve || c.experiment == Experiment::geometry) {
    if (c.grid.geometry != "cartesian" && c.grid.geometry != "radial") v.emplace_back("grid.geometry must be cartesian or radial");
    if (c.grid.points < 3) v.emplace_back("grid.points must be >= 3");
    if (!(c.grid.half_width > 0.0)) v.emplace_back("grid.half_width must be positive");
    const std::string& init = c.experiment == Experiment::solve ? c.solve.initial : c.geometry.initial;
    const double width = c.experiment == Experiment::solve ? c.solve.width : c.geometry.width;
    if (init != "gaussian" && init != "sech") v.emplace_back("initial must be gaussian or sech");
    if (!(width > 0.0)) v.emplace_back("initial width must be positive");
  }
  switch (c.experiment) {
    case Experiment::ineq_sweep:
      if (c.ineq_sweep.p_values.empty()) v.emplace_back("ineq_sweep.p_values must not be empty");
      for (double p : c.ineq_sweep.p_values)
        if (!(p > 1.0)) v.emplace_back("ineq_sweep.p_values must all exceed 1");
      if (c.ineq_sweep.trials < 1) v.emplace_back("ineq_sweep.trials must be >= 1");
      if (c.ineq_sweep.dimension < 1) v.emplace_back("ineq_sweep.dimension must be >= 1");
      break;
    case Experiment::instanton_rates: {
      const auto& r = c.instanton_rates;
      if (r.pairs.empty()) v.emplace_back("instanton_rates.pairs must not be empty");
      for (const auto& [p, n] : r.pairs)
        if (!(p > 1.0) || !(p < n) || n != std::floor(n)) v.emplace_back("instanton_rates.pairs need 1 < p < N with N integral");
      if (!(r.eps_lo > 0.0) || !(r.eps_hi < 1.0) || !(r.eps_hi / r.eps_lo >= 100.0 * (1.0 - 1e-12)))
        v.emplace_back("instanton_rates: eps range must lie in (0,1) and span two decades");
      if (r.eps_count < 5) v.emplace_back("instanton_rates.eps_count must be >= 5");
      if (!(r.delta_psi > 0.0)) v.emplace_back("instanton_rates.delta_psi must be positive");
      break;
    }
    case Experiment::certify:
      if (c.certify.epsilons.empty()) v.emplace_back("certify.epsilons must not be empty");
      for (double e : c.certify.epsilons)
        if (!(e > 0.0) || !(e < 1.0)) v.emplace_back("certify.epsilons must lie in (0,1)");
      if (c.problem.n_math != std::floor(c.problem.n_math)) v.emplace_back("certify needs an integral N_math");
      if (!(c.certify.delta_psi > 0.0) || !(c.certify.points_per_epsilon > 0.0) || !(c.certify.box_factor >= 1.0))
        v.emplace_back("certify: delta_psi and points_per_epsilon must be positive, box_factor >= 1");
      if (!(c.certify.c_small > 0.0)) v.emplace_back("certify.c_small must be positive");
      break;
    case Experiment::solve:
      if (c.solve.path_nodes < 3) v.emplace_back("solve.path_nodes must be >= 3");
      if (!(c.solve.tol > 0.0)) v.emplace_back("solve.tol must be positive");
      if (c.solve.max_iter < 1) v.emplace_back("solve.max_iter must be >= 1");
      if (c.solve.reflection_symmetric && (c.grid.geometry != "cartesian" || c.grid.points % 2 != 0))
        v.emplace_back("solve.reflection_symmetric needs a cartesian grid with an even number of points");
      break;
    case Experiment::geometry:
      if (c.geometry.radii.empty() || c.geometry.t_values.empty()) v.emplace_back("geometry: radii and t_values must not be empty");
      if (c.geometry.directions < 1) v.emplace_back("geometry.directions must be >= 1");
      break;
  }
  return v;
}

/// Parses and validates; throws ConfigError listing every violation.
inline RunConfig parse_config_json(const nlohmann::json& j) {
  using detail::read_field;
  std::vector<std::string> errs;
  if (!j.is_object()) throw ConfigError({"config root must be an object"});
  RunConfig c;
  detail::reject_unknown(j, "config",
                         {"schema_version", "experiment", "seed", "threads", "output_dir", "problem", "grid", "potentials",
                          "nonlinearity", "ineq_sweep", "instanton_rates", "certify", "solve", "geometry"},
                         errs);
  read_field(j, "config", "schema_version", c.schema_version, errs);
  if (!j.contains("experiment")) {
    errs.emplace_back("config: missing 'experiment'");
  } else {
    std::string name;
    read_field(j, "config", "experiment", name, errs);
    try {
      c.experiment = experiment_from_name(name);
    } catch (const std::invalid_argument& e) {
      errs.emplace_back(e.what());
    }
  }
  read_field(j, "config", "seed", c.seed, errs);
  read_field(j, "config", "threads", c.threads, errs);
  read_field(j, "config", "output_dir", c.output_dir, errs);

  const auto& pj = detail::section_or_empty(j, "problem", errs);
  detail::reject_unknown(pj, "problem", {"p", "dimension", "N_math", "theta", "k", "q", "lambda"}, errs);
  read_field(pj, "problem", "p", c.problem.p, errs);
  read_field(pj, "problem", "dimension", c.problem.n, errs);
  read_field(pj, "problem", "N_math", c.problem.n_math, errs);
  read_field(pj, "problem", "theta", c.problem.theta, errs);
  read_field(pj, "problem", "k", c.problem.k, errs);
  read_field(pj, "problem", "q", c.problem.q, errs);
  read_field(pj, "problem", "lambda", c.problem.lambda, errs);

  const auto& gj = detail::section_or_empty(j, "grid", errs);
  detail::reject_unknown(gj, "grid", {"geometry", "half_width", "points"}, errs);
  read_field(gj, "grid", "geometry", c.grid.geometry, errs);
  read_field(gj, "grid", "half_width", c.grid.half_width, errs);
  read_field(gj, "grid", "points", c.grid.points, errs);

  const auto& vj = detail::section_or_empty(j, "potentials", errs);
  detail::reject_unknown(vj, "potentials",
                         {"magnetic", "A0", "B", "electric", "V0", "V_amp", "kernel", "K_sup", "tau", "ell", "delta_K"}, errs);
  detail::read_enum(vj, "potentials", "magnetic", c.potentials.magnetic, errs);
  read_field(vj, "potentials", "A0", c.potentials.A0, errs);
  read_field(vj, "potentials", "B", c.potentials.B, errs);
  detail::read_enum(vj, "potentials", "electric", c.potentials.electric, errs);
  read_field(vj, "potentials", "V0", c.potentials.V0, errs);
  read_field(vj, "potentials", "V_amp", c.potentials.V_amp, errs);
  detail::read_enum(vj, "potentials", "kernel", c.potentials.kernel, errs);
  read_field(vj, "potentials", "K_sup", c.potentials.K_sup, errs);
  read_field(vj, "potentials", "tau", c.potentials.tau, errs);
  read_field(vj, "potentials", "ell", c.potentials.ell, errs);
  read_field(vj, "potentials", "delta_K", c.potentials.delta_K, errs);

  const auto& nj = detail::section_or_empty(j, "nonlinearity", errs);
  detail::reject_unknown(nj, "nonlinearity", {"model", "weight", "width"}, errs);
  read_field(nj, "nonlinearity", "model", c.nonlinearity.model, errs);
  read_field(nj, "nonlinearity", "weight", c.nonlinearity.weight, errs);
  read_field(nj, "nonlinearity", "width", c.nonlinearity.width, errs);

  const auto& ij = detail::section_or_empty(j, "ineq_sweep", errs);
  detail::reject_unknown(ij, "ineq_sweep", {"p_values", "trials", "dimension"}, errs);
  read_field(ij, "ineq_sweep", "p_values", c.ineq_sweep.p_values, errs);
  read_field(ij, "ineq_sweep", "trials", c.ineq_sweep.trials, errs);
  read_field(ij, "ineq_sweep", "dimension", c.ineq_sweep.dimension, errs);

  const auto& rj = detail::section_or_empty(j, "instanton_rates", errs);
  detail::reject_unknown(rj, "instanton_rates", {"pairs", "eps_hi", "eps_lo", "eps_count", "delta_psi"}, errs);
  read_field(rj, "instanton_rates", "pairs", c.instanton_rates.pairs, errs);
  read_field(rj, "instanton_rates", "eps_hi", c.instanton_rates.eps_hi, errs);
  read_field(rj, "instanton_rates", "eps_lo", c.instanton_rates.eps_lo, errs);
  read_field(rj, "instanton_rates", "eps_count", c.instanton_rates.eps_count, errs);
  read_field(rj, "instanton_rates", "delta_psi", c.instanton_rates.delta_psi, errs);

  const auto& cj = detail::section_or_empty(j, "certify", errs);
  detail::reject_unknown(cj, "certify",
                         {"epsilons", "delta_psi", "points_per_epsilon", "box_factor", "sigma_policy", "c_small",
                          "pure_critical_check"},
                         errs);
  read_field(cj, "certify", "epsilons", c.certify.epsilons, errs);
  read_field(cj, "certify", "delta_psi", c.certify.delta_psi, errs);
  read_field(cj, "certify", "points_per_epsilon", c.certify.points_per_epsilon, errs);
  read_field(cj, "certify", "box_factor", c.certify.box_factor, errs);
  read_field(cj, "certify", "sigma_policy", c.certify.sigma_policy, errs);
  read_field(cj, "certify", "c_small", c.certify.c_small, errs);
  read_field(cj, "certify", "pure_critical_check", c.certify.pure_critical_check, errs);

  const auto& sj = detail::section_or_empty(j, "solve", errs);
  detail::reject_unknown(sj, "solve",
                         {"initial", "width", "path_nodes", "tol", "max_iter", "reparam_every", "reflection_symmetric"}, errs);
  read_field(sj, "solve", "initial", c.solve.initial, errs);
  read_field(sj, "solve", "width", c.solve.width, errs);
  read_field(sj, "solve", "path_nodes", c.solve.path_nodes, errs);
  read_field(sj, "solve", "tol", c.solve.tol, errs);
  read_field(sj, "solve", "max_iter", c.solve.max_iter, errs);
  read_field(sj, "solve", "reparam_every", c.solve.reparam_every, errs);
  read_field(sj, "solve", "reflection_symmetric", c.solve.reflection_symmetric, errs);

  const auto& oj = detail::section_or_empty(j, "geometry", errs);
  detail::reject_unknown(oj, "geometry", {"initial", "width", "radii", "t_values", "directions"}, errs);
  read_field(oj, "geometry", "initial", c.geometry.initial, errs);
  read_field(oj, "geometry", "width", c.geometry.width, errs);
  read_field(oj, "geometry", "radii", c.geometry.radii, errs);
  read_field(oj, "geometry", "t_values", c.geometry.t_values, errs);
  read_field(oj, "geometry", "directions", c.geometry.directions, errs);

  if (errs.empty()) errs = config_violations(c);
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({origin + ": malformed JSON: " + e.what()});
  }
  return parse_config_json(j);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

inline std::string write_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace magpl
