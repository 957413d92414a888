#pragma once

// Rays, thresholds and the mountain-pass path solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magpl/cvec_ineq.hpp"
#include "magpl/field.hpp"
#include "magpl/instanton.hpp"
#include "magpl/rate_fit.hpp"

namespace magpl {

// ---------------------------------------------------------------------------
// The ray t -> J_A(t u)

/// Scalar reduction of J_A along a ray: everything but F is a monomial in t.
class RayProfile {
 public:
  RayProfile(const ComplexField& u, const PotentialSet& pots, const NonlinearityModel& nl, const ProblemParams& pp)
      : nl_(nl), p_(pp.p), ps_(pp.p_star()) {
    const EnergyBreakdown e = energy(u, pots, nl_, pp);
    a_ = e.norm_p();
    b_ = e.critical;
    const Grid& g = u.grid;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = std::abs(u.values[i]);
      if (m == 0.0) continue;
      const double w = g.weight(i);
      if (w == 0.0) continue;
      const double wx = nl_.weight_at(g.coordinates(i));
      if (nl_.enabled && nl_.kind == NonlinearityKind::power_weighted) {
        c_ += w * wx * std::pow(m, nl_.q);
      } else {
        samples_.push_back({w, wx, std::pow(m, p_)});
      }
    }
    if (nl_.enabled && nl_.kind == NonlinearityKind::power_weighted) c_ *= nl_.lambda;
  }

  [[nodiscard]] double norm_p() const { return a_; }
  [[nodiscard]] double critical_mass() const { return b_; }

  [[nodiscard]] double value(double t) const {
    if (t == 0.0) return 0.0;
    return std::pow(t, p_) * a_ / p_ - std::pow(t, ps_) * b_ / ps_ - subcritical(t) / p_;
  }

  /// d/dt J_A(t u) = <J'_A(t u), u>
  [[nodiscard]] double derivative(double t) const {
    if (t == 0.0) return 0.0;
    return std::pow(t, p_ - 1.0) * a_ - std::pow(t, ps_ - 1.0) * b_ - subcritical_derivative(t);
  }

 private:
  struct Sample {
    double w, wx, mp;
  };

  [[nodiscard]] double subcritical(double t) const {
    if (!nl_.enabled) return 0.0;
    if (nl_.kind == NonlinearityKind::power_weighted) return c_ * std::pow(t, nl_.q);
    double s = 0.0;
    const double tp = std::pow(t, p_);
    for (const auto& x : samples_) s += x.w * nl_.F(x.wx, tp * x.mp);
    return s;
  }

  [[nodiscard]] double subcritical_derivative(double t) const {
    if (!nl_.enabled) return 0.0;
    if (nl_.kind == NonlinearityKind::power_weighted) return c_ * (nl_.q / p_) * std::pow(t, nl_.q - 1.0);
    double s = 0.0;
    const double tp = std::pow(t, p_);
    for (const auto& x : samples_) s += x.w * nl_.f(x.wx, tp * x.mp) * std::pow(t, p_ - 1.0) * x.mp;
    return s;
  }

  NonlinearityModel nl_;
  double p_, ps_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::vector<Sample> samples_;
};

struct TMaxResult {
  double t_star = 0.0;
  double value_at_max = 0.0;
  double bracket_lo = 0.0;  // B1
  double bracket_hi = 0.0;  // B2
  double stationarity_residual = 0.0;
  double stationarity_scale = 1.0;
  bool audit_passed = false;
  double norm_p = 0.0;         // ||u||^p
  double critical_mass = 0.0;  // int K |u|^{p*}
};

/// Maximizes phi(t) = J_A(t u) over t > 0: geometric scan of phi' over
/// [1e-6, 1e6], bisection of every sign change, the largest local maximum kept.
inline TMaxResult fit_tmax(const ComplexField& u, const PotentialSet& pots, const NonlinearityModel& nl,
                           const ProblemParams& pp) {
  const RayProfile ray(u, pots, nl, pp);
  if (!(ray.norm_p() > 0.0)) throw std::invalid_argument("fit_tmax: u must be nonzero");
  constexpr double lo = 1e-6;
  constexpr int per_decade = 8;
  const int steps = 12 * per_decade;  // up to 1e6
  std::optional<TMaxResult> best;
  double prev_t = lo, prev_d = ray.derivative(lo);
  for (int j = 1; j <= steps; ++j) {
    const double t = lo * std::pow(10.0, double(j) / per_decade);
    const double d = ray.derivative(t);
    if (prev_d > 0.0 && d <= 0.0) {
      double a = prev_t, b = t;
      for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
        const double mid = 0.5 * (a + b);
        (ray.derivative(mid) > 0.0 ? a : b) = mid;
      }
      const double ts = 0.5 * (a + b);
      const double v = ray.value(ts);
      if (!best || v > best->value_at_max) {
        TMaxResult r;
        r.t_star = ts;
        r.value_at_max = v;
        r.bracket_lo = prev_t;
        r.bracket_hi = t;
        best = r;
      }
    }
    prev_t = t;
    prev_d = d;
  }
  if (!best) throw std::runtime_error("fit_tmax: degenerate ray, no sign change of phi' in [1e-6, 1e6]");
  TMaxResult r = *best;
  r.norm_p = ray.norm_p();
  r.critical_mass = ray.critical_mass();
  r.stationarity_residual = std::abs(gateaux(scaled(u, r.t_star), u, pots, nl, pp));
  r.stationarity_scale = std::pow(r.t_star, pp.p - 1.0) * ray.norm_p();
  r.audit_passed = true;
  const double t_audit = 3.0 * r.t_star;
  for (int j = 0; j <= 1000; ++j) {
    const double t = t_audit * j / 1000.0;
    if (ray.value(t) > r.value_at_max + 1e-12 * std::max(1.0, std::abs(r.value_at_max))) r.audit_passed = false;
  }
  return r;
}

/// First t > t_star (geometric steps of 1.1) with J_A(t u) < 0.
inline double negative_energy_scale(const ComplexField& u, const PotentialSet& pots, const NonlinearityModel& nl,
                                    const ProblemParams& pp, double t_star) {
  const RayProfile ray(u, pots, nl, pp);
  double t = t_star;
  for (int j = 0; j < 400; ++j) {
    t *= 1.1;
    if (ray.value(t) < 0.0) return t;
  }
  throw std::runtime_error("negative_energy_scale: J_A(t u) stays nonnegative");
}

// ---------------------------------------------------------------------------
// Thresholds

inline double threshold_cP(double S, double K_sup, const ProblemParams& pp) {
  if (!(S > 0.0) || !(K_sup > 0.0)) throw std::invalid_argument("threshold_cP: S and K_sup must be positive");
  const double n = pp.n_math;
  return std::pow(S, n / pp.p) / (n * std::pow(K_sup, n / pp.p_star()));
}

/// Open window for sigma in lambda = eps^{-sigma}; empty when a fixed lambda > 0 suffices.
struct LambdaRegime {
  bool needs_large_lambda = false;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  std::string label;

  [[nodiscard]] double sigma_mid() const { return 0.5 * (std::max(sigma_lo, 0.0) + sigma_hi); }
};

inline LambdaRegime lambda_regime(double p, double n, double q) {
  const double nu = std::min(2.0, p);
  const double qc = n * (p - 1.0) / (n - p);
  const double high = n - (n - p) / p * q;  // exponent of ||w_eps||_q^q for q > q_c
  LambdaRegime r;
  if (n > p * p) {
    r.label = "N > p^2";
    if (p > 2.0) {
      r.needs_large_lambda = true;
      r.sigma_lo = high - 2.0;
      r.sigma_hi = high;
    }
  } else if (n == p * p) {
    r.label = "N = p^2";
    if (p > 2.0) {
      r.needs_large_lambda = true;
      r.sigma_lo = p * p - 2.0 - (p - 1.0) * q;
      r.sigma_hi = p * p - (p - 1.0) * q;
    }
  } else {
    r.needs_large_lambda = true;
    const double base = (n - p) / (p - 1.0);
    if (std::abs(q - qc) <= 1e-12 * qc) {
      r.label = "N < p^2, q = N(p-1)/(N-p)";
      r.sigma_lo = n / p - nu / p * base;
      r.sigma_hi = n / p;
    } else if (q < qc) {
      r.label = "N < p^2, q < N(p-1)/(N-p)";
      r.sigma_lo = base * (q - nu) / p;
      r.sigma_hi = base * q / p;
    } else {
      r.label = "N < p^2, q > N(p-1)/(N-p)";
      r.sigma_lo = high - nu * base / p;
      r.sigma_hi = high;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Test functions u_eps = e^{i theta} w_eps, theta(x) = -A(0).x

/// Largest radius below which |A(x) - A(0)|^2 < c at every node.
inline double smallness_radius(const VectorField& A, double c) {
  const Grid& g = A.grid;
  const Vec3 a0 = A.values[g.origin_node()];
  double limit = g.geometry == Geometry::radial ? g.half_width : g.half_width;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += (A.values[i][j] - a0[j]) * (A.values[i][j] - a0[j]);
    if (!(s < c)) limit = std::min(limit, g.radius(i));
  }
  return limit;
}

inline ComplexField build_test_function(const PotentialSet& pots, const InstantonSpec& spec, double c_small = 1.0) {
  spec.validate();
  const Grid& g = pots.A.grid;
  if (g.geometry == Geometry::radial && std::abs(g.radial_dim - spec.n) > 0.0)
    throw std::invalid_argument("build_test_function: radial grid dimension differs from the instanton dimension");
  if (g.geometry == Geometry::cartesian && g.dimension != spec.n)
    throw std::invalid_argument("build_test_function: grid dimension differs from the instanton dimension");
  const double delta_A = smallness_radius(pots.A, c_small);
  if (!(delta_A > g.spacing)) throw std::runtime_error("build_test_function: A too rough near 0 (delta_A <= h)");
  if (!(spec.delta_psi < std::min(delta_A, pots.delta_K)))
    throw std::invalid_argument("build_test_function: delta_psi must be below min(delta_A, delta_K)");
  const Vec3 a0 = g.geometry == Geometry::radial ? Vec3{0.0, 0.0, 0.0} : pots.A.values[g.origin_node()];
  const double normalizer = bump_normalizer(spec);
  return ComplexField::sample(g, [&](const Vec3& x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double w = bump_radial(r, spec, normalizer);
    const double theta = -(a0[0] * x[0] + a0[1] * x[1] + a0[2] * x[2]);
    return theta == 0.0 ? cplx{w, 0.0} : std::polar(w, theta);
  });
}

// ---------------------------------------------------------------------------
// Certification sweep

struct RayEvidence {
  double epsilon = 0.0;
  double ray_max = 0.0;
  double t_star = 0.0;
  double lambda = 0.0;
  double norm_p = 0.0;
  double critical_mass = 0.0;
  double closed_form_bound = 0.0;  // tmax_closed_form(||u||^p, int K|u|^{p*})
  int grid_points = 0;
};

struct ThresholdReport {
  double S_est = 0.0;
  double K_sup = 0.0;
  double c_P = 0.0;
  double c_A_est = 0.0;
  double margin = 0.0;
  std::vector<RayEvidence> epsilon_evidence;
  LambdaRegime regime;
  bool lambda_from_sigma = false;
  double sigma = 0.0;
  bool c_A_positive = false;
  std::optional<double> deficit_exponent;  // fit of c_P - ray_max over eps, when all deficits are positive

  [[nodiscard]] double margin_at_smallest_epsilon() const {
    const auto it = std::min_element(epsilon_evidence.begin(), epsilon_evidence.end(),
                                     [](const RayEvidence& a, const RayEvidence& b) { return a.epsilon < b.epsilon; });
    return it == epsilon_evidence.end() ? std::numeric_limits<double>::quiet_NaN() : c_P - it->ray_max;
  }
};

struct CertifyOptions {
  double points_per_epsilon = 256.0;  // radial grid spacing h = eps / points_per_epsilon
  double box_factor = 1.05;           // grid radius = box_factor * delta_psi
  int max_points = 2000001;
  bool sigma_policy = true;           // lambda = eps^{-sigma} when the regime needs large lambda
  double c_small = 1.0;
};

inline ThresholdReport certify_cA_below_cP(const std::vector<double>& eps_list, const PotentialPreset& preset,
                                           const NonlinearityModel& nl, const ProblemParams& pp,
                                           const InstantonSpec& spec, const CertifyOptions& opt = {}) {
  if (eps_list.empty()) throw std::invalid_argument("certify: epsilon list is empty");
  if (std::abs(pp.n_math - spec.n) > 0.0) throw std::invalid_argument("certify: instanton dimension must equal N_math");
  ThresholdReport rep;
  rep.S_est = sobolev_constant(pp.p, pp.n_math);
  rep.K_sup = preset.K_sup;
  rep.c_P = threshold_cP(rep.S_est, rep.K_sup, pp);
  rep.regime = lambda_regime(pp.p, pp.n_math, pp.q);
  rep.lambda_from_sigma = opt.sigma_policy && rep.regime.needs_large_lambda && nl.enabled;
  rep.sigma = rep.lambda_from_sigma ? rep.regime.sigma_mid() : 0.0;
  for (double eps : eps_list) {
    const double radius = opt.box_factor * spec.delta_psi;
    const double n_real = std::ceil(radius * opt.points_per_epsilon / eps) + 1.0;
    const int n = static_cast<int>(std::min<double>(n_real, opt.max_points));
    const Grid g = Grid::radial(radius, n, pp.n_math);
    const PotentialSet pots = preset.sample(g);
    NonlinearityModel model = nl;
    if (rep.lambda_from_sigma) model.lambda = std::pow(eps, -rep.sigma);
    const ComplexField u = build_test_function(pots, spec.with_epsilon(eps), opt.c_small);
    const TMaxResult t = fit_tmax(u, pots, model, pp);
    RayEvidence ev;
    ev.epsilon = eps;
    ev.ray_max = t.value_at_max;
    ev.t_star = t.t_star;
    ev.lambda = model.enabled ? model.lambda : 0.0;
    ev.norm_p = t.norm_p;
    ev.critical_mass = t.critical_mass;
    ev.closed_form_bound = tmax_closed_form(t.norm_p, t.critical_mass, pp.p, pp.n_math).value;
    ev.grid_points = n;
    rep.epsilon_evidence.push_back(ev);
  }
  rep.c_A_est = std::numeric_limits<double>::infinity();
  for (const auto& ev : rep.epsilon_evidence) rep.c_A_est = std::min(rep.c_A_est, ev.ray_max);
  rep.margin = rep.c_P - rep.c_A_est;
  rep.c_A_positive = rep.c_A_est > 0.0;
  if (rep.epsilon_evidence.size() >= 3) {
    std::vector<double> e, d;
    for (const auto& ev : rep.epsilon_evidence) {
      e.push_back(ev.epsilon);
      d.push_back(rep.c_P - ev.ray_max);
    }
    if (std::all_of(d.begin(), d.end(), [](double x) { return x > 0.0; })) rep.deficit_exponent = fit_power_law(e, d).exponent;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Mountain-pass geometry

/// Seeded smooth directions compatible with the Dirichlet boundary.
inline ComplexField random_mode(const Grid& g, std::mt19937_64& rng, int max_mode = 4) {
  std::uniform_int_distribution<int> mode(1, max_mode);
  std::normal_distribution<double> coef;
  const int terms = 3;
  std::vector<std::array<int, 3>> ks(terms);
  std::vector<cplx> cs(terms);
  for (int t = 0; t < terms; ++t) {
    for (int j = 0; j < 3; ++j) ks[t][j] = mode(rng);
    const double re = coef(rng), im = coef(rng);
    cs[t] = cplx{re, im};
  }
  const double L = g.half_width;
  return ComplexField::sample(g, [&](const Vec3& x) {
    cplx s{};
    for (int t = 0; t < terms; ++t) {
      double v = 1.0;
      if (g.geometry == Geometry::radial) {
        v = std::cos((ks[t][0] - 0.5) * std::numbers::pi * x[0] / L);
      } else {
        for (int j = 0; j < g.dimension; ++j) v *= std::sin(ks[t][j] * std::numbers::pi * (x[j] + L) / (2.0 * L));
      }
      s += cs[t] * v;
    }
    return s;
  });
}

struct SphereSample {
  double radius = 0.0;
  double alpha = 0.0;  // min of J_A over the sampled directions with ||u|| = R
  bool positive = false;
};

struct GeometryReport {
  double energy_at_zero = 0.0;
  std::vector<SphereSample> spheres;
  std::optional<double> largest_positive_radius;
  std::optional<double> first_negative_t;  // smallest t with J(t v0) < 0 and ||t v0|| > R
  bool passed = false;
};

inline GeometryReport verify_geometry(const ComplexField& v0, const std::vector<double>& radii,
                                      const std::vector<double>& t_grid, const PotentialSet& pots,
                                      const NonlinearityModel& nl, const ProblemParams& pp, int n_directions = 16,
                                      std::uint64_t seed = 1) {
  const double nv = energy_norm(v0, pots, pp);
  if (!(nv > 0.0)) throw std::invalid_argument("verify_geometry: v0 must be nonzero");
  GeometryReport rep;
  rep.energy_at_zero = energy(ComplexField::zeros(v0.grid), pots, nl, pp).total;
  std::mt19937_64 rng(seed);
  std::vector<ComplexField> dirs{scaled(v0, 1.0 / nv)};
  for (int d = 1; d < n_directions; ++d) {
    ComplexField u = random_mode(v0.grid, rng);
    const double nu = energy_norm(u, pots, pp);
    if (nu > 0.0) dirs.push_back(scaled(u, 1.0 / nu));
  }
  for (double R : radii) {
    SphereSample s;
    s.radius = R;
    s.alpha = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) s.alpha = std::min(s.alpha, energy(scaled(d, R), pots, nl, pp).total);
    s.positive = s.alpha > 0.0;
    if (s.positive && (!rep.largest_positive_radius || R > *rep.largest_positive_radius)) rep.largest_positive_radius = R;
    rep.spheres.push_back(s);
  }
  if (rep.largest_positive_radius) {
    for (double t : t_grid) {
      if (t * nv > *rep.largest_positive_radius && energy(scaled(v0, t), pots, nl, pp).total < 0.0) {
        if (!rep.first_negative_t || t < *rep.first_negative_t) rep.first_negative_t = t;
      }
    }
  }
  rep.passed = rep.energy_at_zero == 0.0 && rep.largest_positive_radius.has_value() && rep.first_negative_t.has_value();
  return rep;
}

// ---------------------------------------------------------------------------
// Path solver

struct PathState {
  std::vector<ComplexField> nodes;
  std::vector<double> energies;
  std::size_t max_index = 0;
  double gradient_norm_at_max = 0.0;
};

struct SolveLogEntry {
  int iter = 0;
  double level = 0.0;
  double residual = 0.0;
  double step_size = 0.0;
  std::size_t max_index = 0;
};

struct SolveOptions {
  int path_nodes = 33;
  double tol = 1e-6;
  int max_iter = 2000;
  int reparam_every = 10;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int cg_max_iter = 2000;
  double cg_tol = 1e-13;
  bool record_iterates = true;
  // Restrict the path to fields invariant under x -> -x. Centered differences
  // decouple the even and odd sublattices of each axis, so on the full space a
  // bump living on one sublattice has half the level of a smooth bump and the
  // smooth bump is not a mountain-pass point. With an even number of nodes per
  // axis the reflection swaps the sublattices and restores the coupling.
  bool reflection_symmetric = false;
  int stall_limit = 50;  // iterations without a level decrease before giving up
};

struct MountainPassResult {
  ComplexField u;
  double level = 0.0;
  double residual = 0.0;
  bool converged = false;
  bool stalled = false;
  PathState path;
  ComplexField start;  // first node (0)
  ComplexField end;    // last node (t0 v0)
  double t0 = 0.0;
  std::vector<SolveLogEntry> log;
  std::vector<std::pair<ComplexField, double>> iterates;  // (max node, level) per accepted iteration
};

namespace detail {

/// <a, b>_M = Re sum w (a conj b + grad a . conj grad b) with the centered
/// differences of the energy, the Sobolev metric used to precondition the
/// gradient.
inline ComplexField metric_apply(const ComplexField& x, const std::vector<double>& w) {
  const Grid& g = x.grid;
  std::vector<cplx> out(x.size(), cplx{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] += w[i] * x.values[i];
    for (int j = 0; j < g.dimension; ++j) {
      const Stencil st = derivative_stencil(g, i, j);
      const cplx d = apply_stencil(st, x.values);
      for (int m = 0; m < st.count; ++m) out[st.e[m].node] += st.e[m].coeff * w[i] * d;
    }
  }
  ComplexField r = ComplexField::zeros(g);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!g.is_boundary(i)) r.values[i] = out[i];
  return r;
}

/// Node index of the mirror image of `node` under x -> -x (cartesian grids).
inline std::size_t mirror_node(const Grid& g, std::size_t node) {
  std::size_t out = 0;
  for (int j = 0; j < g.dimension; ++j)
    out += static_cast<std::size_t>(g.points_per_axis - 1 - g.axis_index(node, j)) * g.stride(j);
  return out;
}

/// (x + x o R) / 2, exactly invariant under the reflection.
inline ComplexField symmetrize(const ComplexField& x) {
  ComplexField out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t m = mirror_node(x.grid, i);
    if (m < i) continue;
    const cplx v = 0.5 * (x.values[i] + x.values[m]);
    out.values[i] = v;
    out.values[m] = v;
  }
  return out;
}

/// Throws unless the energy is invariant under u -> u o R.
inline void require_reflection_invariant(const PotentialSet& pots, const NonlinearityModel& nl) {
  const Grid& g = pots.V.grid;
  if (g.geometry != Geometry::cartesian)
    throw std::invalid_argument("mountain_pass_solve: reflection symmetry needs a cartesian grid");
  if (g.points_per_axis % 2 != 0)
    throw std::invalid_argument("mountain_pass_solve: reflection symmetry needs an even number of points per axis");
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t m = mirror_node(g, i);
    bool ok = close(pots.V.values[i], pots.V.values[m]) && close(pots.K.values[i], pots.K.values[m]) &&
              close(nl.weight_at(g.coordinates(i)), nl.weight_at(g.coordinates(m)));
    for (int j = 0; j < g.dimension; ++j) ok = ok && close(pots.A.values[i][j], -pots.A.values[m][j]);
    if (!ok)
      throw std::invalid_argument("mountain_pass_solve: potentials are not invariant under x -> -x (node " +
                                  std::to_string(i) + ")");
  }
}

inline double real_dot(const ComplexField& a, const ComplexField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i].real() * b.values[i].real() + a.values[i].imag() * b.values[i].imag();
  return s;
}

/// Solves metric_apply(z) = rhs on free nodes by conjugate gradients.
inline ComplexField metric_solve(const ComplexField& rhs, const std::vector<double>& w, int max_iter, double tol) {
  ComplexField z = ComplexField::zeros(rhs.grid);
  ComplexField r = rhs;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (rhs.grid.is_boundary(i)) r.values[i] = 0.0;
  ComplexField d = r;
  double rr = real_dot(r, r);
  const double stop = tol * tol * std::max(rr, 1e-300);
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    const ComplexField Md = metric_apply(d, w);
    const double alpha = rr / real_dot(d, Md);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z.values[i] += alpha * d.values[i];
      r.values[i] -= alpha * Md.values[i];
    }
    const double rr_new = real_dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] = r.values[i] + beta * d.values[i];
  }
  return z;
}

inline ComplexField lerp(const ComplexField& a, const ComplexField& b, double s) {
  ComplexField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = a.values[i] + s * (b.values[i] - a.values[i]);
  return out;
}

inline ComplexField difference(const ComplexField& a, const ComplexField& b) { return axpy(-1.0, b, a); }

struct Problem {
  const PotentialSet& pots;
  const NonlinearityModel& nl;
  const ProblemParams& pp;
  std::vector<double> w;

  [[nodiscard]] double E(const ComplexField& u) const { return energy(u, pots, nl, pp).total; }
  [[nodiscard]] double slope(const ComplexField& u, const ComplexField& dir) const { return gateaux(u, dir, pots, nl, pp); }
};

/// Maximizer of E on the segment [a, b]: (s, point, value). E is sampled at
/// `samples` + 1 equispaced points; the slope along b - a is then solved in the
/// bracket around the best sample by the Illinois variant of regula falsi.
inline std::tuple<double, ComplexField, double> segment_max(const Problem& pr, const ComplexField& a, const ComplexField& b,
                                                            int samples = 8) {
  const ComplexField dir = difference(b, a);
  int best = 0;
  double best_e = -std::numeric_limits<double>::infinity();
  for (int m = 0; m <= samples; ++m) {
    const double e = m == 0 ? pr.E(a) : (m == samples ? pr.E(b) : pr.E(lerp(a, b, double(m) / samples)));
    if (e > best_e) {
      best_e = e;
      best = m;
    }
  }
  double lo = std::max(0, best - 1) / double(samples);
  double hi = std::min(samples, best + 1) / double(samples);
  double fa = pr.slope(lerp(a, b, lo), dir);
  double fb = pr.slope(lerp(a, b, hi), dir);
  if (fa <= 0.0 || fb >= 0.0) {
    // Endpoint maximum (or a flat bracket): keep the best sample.
    const double s = double(best) / samples;
    return {s, lerp(a, b, s), best_e};
  }
  int side = 0;
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    s = (lo * fb - hi * fa) / (fb - fa);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double fs = pr.slope(lerp(a, b, s), dir);
    if (fs == 0.0) break;
    if (fs > 0.0) {
      lo = s;
      fa = fs;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      hi = s;
      fb = fs;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
    if (std::abs(fs) <= 1e-15 * (std::abs(fa) + std::abs(fb))) break;
  }
  ComplexField pt = lerp(a, b, s);
  const double v = pr.E(pt);
  if (v < best_e) {
    const double sb = double(best) / samples;
    return {sb, lerp(a, b, sb), best_e};
  }
  return {s, std::move(pt), v};
}

inline std::size_t interior_argmax(const std::vector<double>& en) {
  std::size_t m = 1;
  for (std::size_t j = 1; j + 1 < en.size(); ++j)
    if (en[j] > en[m]) m = j;
  return m;
}

}  // namespace detail

/// Mountain-pass path deformation from 0 to t0 v0.
///
/// The level is the maximum of J_A over the polyline through the nodes; the
/// maximizer P lies on some segment [j, j+1]. Each iteration moves the endpoint
/// of that segment carrying the larger weight in P. The move follows the
/// minimum-norm element of the weighted metric-preconditioned gradients of the
/// active segment maxima touching that node; at an interior segment maximum
/// the gradient has no component along the segment. A move is accepted when the maximum over the two segments it
/// touches satisfies the Armijo condition against the current level, so the
/// level never increases. Endpoints of the path never move. Every
/// `reparam_every` iterations the nodes are resampled to equal metric arclength
/// when that does not raise the level.
inline MountainPassResult mountain_pass_solve(const ComplexField& v0, const PotentialSet& pots,
                                              const NonlinearityModel& nl, const ProblemParams& pp,
                                              const SolveOptions& opt = {}) {
  if (opt.path_nodes < 3) throw std::invalid_argument("mountain_pass_solve: path_nodes must be >= 3");
  const Grid& g = v0.grid;
  detail::Problem pr{pots, nl, pp, node_weights(g)};
  if (opt.reflection_symmetric) detail::require_reflection_invariant(pots, nl);
  const ComplexField v0s = opt.reflection_symmetric ? detail::symmetrize(v0) : v0;
  const TMaxResult tm = fit_tmax(v0s, pots, nl, pp);
  const double t0 = negative_energy_scale(v0s, pots, nl, pp, tm.t_star);

  MountainPassResult res;
  res.t0 = t0;
  res.start = ComplexField::zeros(g);
  res.end = scaled(v0s, t0);
  const int n_nodes = opt.path_nodes;
  std::vector<ComplexField> nodes;
  for (int j = 0; j < n_nodes; ++j) nodes.push_back(j + 1 == n_nodes ? res.end : scaled(v0s, t0 * j / (n_nodes - 1)));

  struct SegMax {
    double s = 0.0;
    double e = 0.0;
  };
  auto seg_max = [&](const std::vector<ComplexField>& ns, std::size_t j) {
    const auto [s, pt, e] = detail::segment_max(pr, ns[j], ns[j + 1]);
    return SegMax{s, e};
  };
  auto all_segments = [&](const std::vector<ComplexField>& ns) {
    std::vector<SegMax> out;
    for (std::size_t j = 0; j + 1 < ns.size(); ++j) out.push_back(seg_max(ns, j));
    return out;
  };
  auto top = [](const std::vector<SegMax>& segs) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].e > segs[j].e) j = i;
    return j;
  };
  auto metric_norm = [&](const ComplexField& x) {
    return std::sqrt(std::max(detail::real_dot(x, detail::metric_apply(x, pr.w)), 0.0));
  };

  std::vector<SegMax> segs = all_segments(nodes);

  auto resample = [&](double level) {
    std::vector<double> cum{0.0};
    for (std::size_t j = 1; j < nodes.size(); ++j) cum.push_back(cum.back() + metric_norm(detail::difference(nodes[j], nodes[j - 1])));
    if (!(cum.back() > 0.0)) return;
    std::vector<ComplexField> nn{nodes.front()};
    for (int k = 1; k + 1 < n_nodes; ++k) {
      const double target = cum.back() * k / (n_nodes - 1);
      std::size_t j = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
      j = std::clamp<std::size_t>(j, 1, nodes.size() - 1);
      const double a = cum[j - 1], b = cum[j];
      nn.push_back(detail::lerp(nodes[j - 1], nodes[j], b > a ? std::clamp((target - a) / (b - a), 0.0, 1.0) : 0.0));
    }
    nn.push_back(nodes.back());
    std::vector<SegMax> ns = all_segments(nn);
    if (ns[top(ns)].e <= level) {
      nodes = std::move(nn);
      segs = std::move(ns);
    }
  };

  double step = opt.initial_step;
  double residual = std::numeric_limits<double>::infinity();
  ComplexField best_point = nodes.front();
  double level = 0.0;
  std::size_t mover = 1;
  int stall = 0;
  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    const std::size_t j = top(segs);
    const double sj = segs[j].s;
    level = segs[j].e;
    best_point = detail::lerp(nodes[j], nodes[j + 1], sj);
    const ComplexField G = discrete_gradient(best_point, pots, nl, pp);
    residual = discrete_l2(G);
    const std::size_t nearest = sj < 0.5 ? j : j + 1;
    if (opt.record_iterates) res.iterates.emplace_back(best_point, level);
    res.log.push_back({iter, level, residual, iter == 0 ? 0.0 : step, nearest});
    if (residual < opt.tol) {
      res.converged = true;
      break;
    }
    if (iter == opt.max_iter) break;

    // The node to move and its weight in the maximizer.
    std::size_t k = nearest;
    k = std::clamp<std::size_t>(k, 1, nodes.size() - 2);
    double weight = k == j ? 1.0 - sj : (k == j + 1 ? sj : 0.0);
    if (weight < 0.5) {
      const std::size_t other = k == j ? j + 1 : j;
      if (other >= 1 && other + 1 < nodes.size()) {
        k = other;
        weight = k == j ? 1.0 - sj : sj;
      }
    }
    mover = k;

    // Each segment maximum touching node k moves with weight w times the
    // gradient at its maximizer. Descend along the minimum-norm element of
    // the hull of the active ones, which lowers ties together.
    const double act_tol = 1e-9 * std::max(1.0, std::abs(level));
    std::vector<ComplexField> vs;
    for (std::size_t i : {k - 1, k}) {
      if (segs[i].e < level - act_tol) continue;
      const double w_i = i == k - 1 ? segs[i].s : 1.0 - segs[i].s;
      if (!(w_i > 0.0)) continue;
      const ComplexField Gi = i == j ? G : discrete_gradient(detail::lerp(nodes[i], nodes[i + 1], segs[i].s), pots, nl, pp);
      vs.push_back(scaled(detail::metric_solve(scaled(Gi, g.cell_volume()), pr.w, opt.cg_max_iter, opt.cg_tol), w_i));
    }
    if (vs.empty()) break;
    ComplexField v = vs.front();
    if (vs.size() == 2) {
      const ComplexField diff = detail::difference(vs[0], vs[1]);
      const ComplexField Mdiff = detail::metric_apply(diff, pr.w);
      const double dd = detail::real_dot(diff, Mdiff);
      const double lam = dd > 0.0 ? std::clamp(-detail::real_dot(vs[1], Mdiff) / dd, 0.0, 1.0) : 0.5;
      v = axpy(lam, vs[0], scaled(vs[1], 1.0 - lam));
    }
    if (opt.reflection_symmetric) v = detail::symmetrize(v);
    const double decrease = detail::real_dot(v, detail::metric_apply(v, pr.w));
    if (!(decrease > 0.0)) break;
    const ComplexField d = scaled(v, -1.0);
    // Trust region: a node moves at most the length of its shorter segment.
    const double reach = std::min(metric_norm(detail::difference(nodes[k], nodes[k - 1])),
                                  metric_norm(detail::difference(nodes[k + 1], nodes[k])));
    const double s_cap = reach / std::sqrt(decrease);

    bool accepted = false;
    double s = std::min(step * 2.0, s_cap);
    for (int bt = 0; bt < 60; ++bt, s *= opt.backtrack) {
      const ComplexField saved = nodes[k];
      nodes[k] = axpy(s, d, saved);
      const SegMax left = seg_max(nodes, k - 1);
      const SegMax right = seg_max(nodes, k);
      if (std::max(left.e, right.e) <= level - opt.armijo_c1 * s * decrease) {
        segs[k - 1] = left;
        segs[k] = right;
        accepted = true;
        step = s;
        break;
      }
      nodes[k] = saved;
    }
    if (!accepted) break;
    // Energy rounding stops the Armijo test from seeing real progress.
    stall = segs[top(segs)].e < level ? 0 : stall + 1;
    if (stall >= opt.stall_limit) {
      res.stalled = true;
      break;
    }
    if (opt.reparam_every > 0 && (iter + 1) % opt.reparam_every == 0) resample(segs[top(segs)].e);
  }

  res.u = best_point;
  res.level = level;
  res.residual = residual;
  res.path.nodes = nodes;
  for (const auto& x : nodes) res.path.energies.push_back(pr.E(x));
  res.path.max_index = mover;
  res.path.gradient_norm_at_max = residual;
  return res;
}

// ---------------------------------------------------------------------------
// Palais-Smale diagnostics

struct PSEntry {
  double norm = 0.0;   // ||u_n||
  double level = 0.0;  // c
  double lhs = 0.0;    // ||u_n||^p
  double rhs = 0.0;    // (c + 1 + ||u_n||) / (1/p - 1/theta)
  bool violated = false;
};

struct PSReport {
  std::vector<PSEntry> entries;
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
};

/// Checks ||u_n||^p <= (c + 1 + ||u_n||) / (1/p - 1/theta) along (||u_n||, c) pairs.
inline PSReport ps_diagnostics_norms(const std::vector<std::pair<double, double>>& norms_levels, const ProblemParams& pp) {
  const double gap = 1.0 / pp.p - 1.0 / pp.theta;
  if (!(gap > 0.0)) throw std::invalid_argument("ps_diagnostics: theta must exceed p: hypothesis (f_2)");
  PSReport rep;
  for (const auto& [nrm, c] : norms_levels) {
    PSEntry e;
    e.norm = nrm;
    e.level = c;
    e.lhs = std::pow(nrm, pp.p);
    e.rhs = (c + 1.0 + nrm) / gap;
    e.violated = e.lhs > e.rhs;
    rep.min_slack = std::min(rep.min_slack, e.rhs - e.lhs);
    if (e.violated) ++rep.violations;
    rep.entries.push_back(e);
  }
  return rep;
}

inline PSReport ps_diagnostics(const std::vector<std::pair<ComplexField, double>>& iterates, const PotentialSet& pots,
                               const ProblemParams& pp) {
  std::vector<std::pair<double, double>> nl;
  for (const auto& [u, c] : iterates) nl.emplace_back(energy_norm(u, pots, pp), c);
  return ps_diagnostics_norms(nl, pp);
}

}  // namespace magpl
