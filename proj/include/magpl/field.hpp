#pragma once

// Discrete magnetic p-Laplacian energy on a structured grid, its exact
// directional derivative and discrete gradient, and the pointwise structural
// checks (diamagnetic inequality, product rule, gauge covariance, hypotheses).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magpl/grid.hpp"
#include "magpl/quadrature.hpp"

namespace magpl {

// ---------------------------------------------------------------------------
// Exponents

struct ProblemParams {
  double p = 2.0;
  int n = 1;            // grid dimension
  double n_math = 4.0;  // dimension entering p*
  double theta = 3.0;
  double k = 3.5;
  double q = 3.0;
  double lambda = 1.0;

  [[nodiscard]] double p_star() const { return n_math * p / (n_math - p); }

  /// Violations, each naming the hypothesis it breaks. Empty when valid.
  [[nodiscard]] std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (!(p > 1.0) || !(p < n_math)) {
      out.emplace_back("p must satisfy 1 < p < N_math");
      return out;
    }
    const double ps = p_star();
    if (!(theta > p && theta < ps)) out.emplace_back("theta must lie in (p,p*): hypothesis (f_2)");
    if (!(k > p && k < ps)) out.emplace_back("k must lie in (p,p*): hypothesis (f_1)");
    if (!(q > p && q < k)) out.emplace_back("q must lie in (p,k): hypothesis (f_3)");
    if (!(lambda > 0.0)) out.emplace_back("lambda must be positive: hypothesis (f_3)");
    if (n < 1 || n > 3) out.emplace_back("grid dimension must be 1, 2 or 3");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (!v.empty()) throw std::invalid_argument(v.front());
  }

  bool operator==(const ProblemParams&) const = default;
};

/// Open interval for tau in hypothesis (K).
inline std::pair<double, double> tau_window(double p, double n_math) {
  const double lo = n_math > p * p ? p : (n_math - p) / (p - 1.0);
  return {lo, n_math / (p - 1.0)};
}

inline std::optional<std::string> tau_violation(double tau, double p, double n_math) {
  const auto [lo, hi] = tau_window(p, n_math);
  if (tau > lo && tau < hi) return std::nullopt;
  char buf[160];
  std::snprintf(buf, sizeof buf, "tau must lie in (%.6g, %.6g): hypothesis (K)", lo, hi);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Potentials

/// Sampled A, V, K. On radial grids A holds two components: the radial part
/// a_r (entering d/dr + i a_r) and the transverse magnitude a_t, so that
/// |grad_A u|^2 = |u' + i a_r u|^2 + a_t^2 |u|^2.
struct PotentialSet {
  VectorField A;
  ScalarField V;
  double V0 = 1.0;
  ScalarField K;
  double K_sup = 1.0;
  double tau = 3.0;
  double delta_K = 1.0;
};

enum class MagneticKind { zero, constant, symmetric };
enum class ElectricKind { constant, well };
enum class KernelKind { constant, flat_core };

struct PotentialPreset {
  MagneticKind magnetic = MagneticKind::zero;
  Vec3 A0{0.0, 0.0, 0.0};
  double B = 0.0;
  ElectricKind electric = ElectricKind::constant;
  double V0 = 1.0;
  double V_amp = 0.0;
  KernelKind kernel = KernelKind::flat_core;
  double K_sup = 1.0;
  double tau = 3.0;
  double ell = 1.0;
  double delta_K = 1.0;

  bool operator==(const PotentialPreset&) const = default;

  [[nodiscard]] double kernel_value(double r) const {
    if (kernel == KernelKind::constant) return K_sup;
    return K_sup / (1.0 + std::pow(r / ell, tau));
  }

  /// Smallest C with |K(x) - K(0)| <= C |x|^tau (closed form of the preset).
  [[nodiscard]] double flatness_constant() const {
    return kernel == KernelKind::constant ? 0.0 : K_sup / std::pow(ell, tau);
  }

  [[nodiscard]] PotentialSet sample(const Grid& g) const {
    if (!(V0 > 0.0)) throw std::invalid_argument("V0 must be positive: hypothesis (V)");
    if (V_amp < 0.0) throw std::invalid_argument("V_amp must be nonnegative: hypothesis (V)");
    if (!(K_sup > 0.0)) throw std::invalid_argument("K_sup must be positive: hypothesis (K)");
    if (!(ell > 0.0) || !(delta_K > 0.0)) throw std::invalid_argument("ell and delta_K must be positive: hypothesis (K)");
    PotentialSet s;
    s.V0 = V0;
    s.K_sup = K_sup;
    s.tau = tau;
    s.delta_K = delta_K;
    const bool radial = g.geometry == Geometry::radial;
    s.A = VectorField::sample(g, [&](const Vec3& x) -> Vec3 {
      switch (magnetic) {
        case MagneticKind::zero:
          return {0.0, 0.0, 0.0};
        case MagneticKind::constant:
          // A constant field is removed exactly by the linear gauge used for
          // test functions; radial runs store the reduced field.
          return radial ? Vec3{0.0, 0.0, 0.0} : A0;
        case MagneticKind::symmetric:
          if (radial) return {0.0, 0.5 * B * x[0], 0.0};
          if (g.dimension < 2) throw std::invalid_argument("symmetric magnetic preset needs dimension >= 2");
          return {-0.5 * B * x[1], 0.5 * B * x[0], 0.0};
      }
      return {0.0, 0.0, 0.0};
    });
    s.V = ScalarField::sample(g, [&](const Vec3& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return electric == ElectricKind::constant ? V0 : V0 + V_amp * r2 / (1.0 + r2);
    });
    s.K = ScalarField::sample(g, [&](const Vec3& x) {
      return kernel_value(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    });
    return s;
  }
};

// ---------------------------------------------------------------------------
// Nonlinearity f(x, t), t = |u|^p, and its primitive F(x, t) = int_0^t f(x, s) ds.

enum class NonlinearityKind { power_weighted, user_tabulated };
enum class WeightKind { flat, gaussian };

struct NonlinearityModel {
  NonlinearityKind kind = NonlinearityKind::power_weighted;
  double lambda = 1.0;
  double p = 2.0;
  double q = 3.0;
  double k = 3.5;
  WeightKind weight = WeightKind::flat;
  double weight_width = 1.0;
  bool enabled = true;  // false gives f = 0
  // user_tabulated: f(x, t) = w(x) g(t), g piecewise linear on (table_t, table_g)
  // and g(t_last) (t / t_last)^tail beyond the table.
  std::vector<double> table_t;
  std::vector<double> table_g;
  double tail = 0.0;

  static NonlinearityModel power(const ProblemParams& pp, WeightKind w = WeightKind::flat, double width = 1.0) {
    NonlinearityModel m;
    m.kind = NonlinearityKind::power_weighted;
    m.lambda = pp.lambda;
    m.p = pp.p;
    m.q = pp.q;
    m.k = pp.k;
    m.weight = w;
    m.weight_width = width;
    return m;
  }

  static NonlinearityModel none(const ProblemParams& pp) {
    NonlinearityModel m = power(pp);
    m.enabled = false;
    return m;
  }

  static NonlinearityModel tabulated(const ProblemParams& pp, std::vector<double> ts, std::vector<double> gs, double tail,
                                     WeightKind w = WeightKind::flat, double width = 1.0) {
    NonlinearityModel m = power(pp, w, width);
    m.kind = NonlinearityKind::user_tabulated;
    m.table_t = std::move(ts);
    m.table_g = std::move(gs);
    m.tail = tail;
    m.validate();
    return m;
  }

  void validate() const {
    if (!(weight_width > 0.0)) throw std::invalid_argument("weight width must be positive");
    if (kind != NonlinearityKind::user_tabulated) return;
    if (table_t.size() < 2 || table_t.size() != table_g.size())
      throw std::invalid_argument("tabulated nonlinearity needs >= 2 matching (t, g) samples");
    if (table_t.front() != 0.0 || table_g.front() != 0.0)
      throw std::invalid_argument("tabulated nonlinearity must start at (0, 0): hypothesis (f_0)");
    for (std::size_t i = 1; i < table_t.size(); ++i)
      if (!(table_t[i] > table_t[i - 1])) throw std::invalid_argument("tabulated t values must increase");
    for (double gv : table_g)
      if (!(gv >= 0.0) || !std::isfinite(gv)) throw std::invalid_argument("tabulated f must be finite and >= 0: hypothesis (f_0)");
    if (tail < 0.0 || tail > (k - p) / p)
      throw std::invalid_argument("tabulated tail exponent must lie in [0, (k-p)/p]: hypothesis (f_1)");
  }

  [[nodiscard]] double weight_at(const Vec3& x) const {
    if (weight == WeightKind::flat) return 1.0;
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return std::exp(-0.5 * r2 / (weight_width * weight_width));
  }

  [[nodiscard]] ScalarField sample_weight(const Grid& g) const {
    return ScalarField::sample(g, [&](const Vec3& x) { return weight_at(x); });
  }

  /// f for weight value w.
  [[nodiscard]] double f(double w, double t) const {
    if (!enabled || t <= 0.0) return 0.0;
    if (kind == NonlinearityKind::power_weighted) return lambda * (q / p) * w * std::pow(t, (q - p) / p);
    return w * table_value(t);
  }

  [[nodiscard]] double F(double w, double t) const {
    if (!enabled || t <= 0.0) return 0.0;
    if (kind == NonlinearityKind::power_weighted) return lambda * w * std::pow(t, q / p);
    return w * table_primitive(t);
  }

  /// f(x, |z|^p) |z|^{p-2}, the coefficient multiplying z in the derivative;
  /// 0 at z = 0.
  [[nodiscard]] double derivative_coefficient(double w, double modulus) const {
    if (!enabled || modulus <= 0.0) return 0.0;
    if (kind == NonlinearityKind::power_weighted) return lambda * (q / p) * w * std::pow(modulus, q - 2.0);
    return f(w, std::pow(modulus, p)) * std::pow(modulus, p - 2.0);
  }

  /// Weights of the growth bound f <= h1 + h2 t^{(k-p)/p}, per unit of w.
  [[nodiscard]] std::pair<double, double> growth_weights() const {
    if (!enabled) return {0.0, 0.0};
    if (kind == NonlinearityKind::power_weighted) {
      const double c = lambda * q / p;
      return {c, c};
    }
    const double e = (k - p) / p;
    double c = 0.0;
    for (std::size_t i = 0; i < table_t.size(); ++i)
      c = std::max(c, table_g[i] / (1.0 + std::pow(table_t[i], e)));
    c = std::max(c, table_g.back() / std::pow(table_t.back(), tail));
    return {c, c};
  }

 private:
  [[nodiscard]] double table_value(double t) const {
    const double tl = table_t.back();
    if (t >= tl) return table_g.back() * std::pow(t / tl, tail);
    const auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - table_t.begin());
    const double a = table_t[j - 1], b = table_t[j];
    return table_g[j - 1] + (table_g[j] - table_g[j - 1]) * (t - a) / (b - a);
  }

  [[nodiscard]] double table_primitive(double t) const {
    double s = 0.0;
    for (std::size_t j = 1; j < table_t.size(); ++j) {
      const double a = table_t[j - 1], b = std::min(table_t[j], t);
      if (b <= a) break;
      const double gb = table_g[j - 1] + (table_g[j] - table_g[j - 1]) * (b - a) / (table_t[j] - a);
      s += 0.5 * (table_g[j - 1] + gb) * (b - a);
    }
    const double tl = table_t.back();
    if (t > tl) s += table_g.back() * tl / (tail + 1.0) * (std::pow(t / tl, tail + 1.0) - 1.0);
    return s;
  }
};

/// max_t |F(t) - int_0^t f| / max(F(t), tiny) over n_samples of (0, t_max],
/// the integral by composite Gauss-Legendre.
inline double primitive_consistency(const NonlinearityModel& nl, double t_max, int n_samples = 64) {
  const auto [gx, gw] = gauss_legendre(20);
  double worst = 0.0;
  for (int s = 1; s <= n_samples; ++s) {
    const double t = t_max * s / n_samples;
    std::vector<double> edges{0.0};
    for (double b : nl.table_t)
      if (b > 0.0 && b < t) edges.push_back(b);
    for (int j = 1; j <= 16; ++j) edges.push_back(t * std::pow(2.0, j - 16));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    double integral = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double mid = 0.5 * (edges[e] + edges[e + 1]), half = 0.5 * (edges[e + 1] - edges[e]);
      for (std::size_t i = 0; i < gx.size(); ++i) integral += half * gw[i] * nl.f(1.0, mid + half * gx[i]);
    }
    const double exact = nl.F(1.0, t);
    worst = std::max(worst, std::abs(exact - integral) / std::max(std::abs(exact), 1e-300));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Difference stencils

struct StencilEntry {
  std::size_t node = 0;
  double coeff = 0.0;
};

/// d/dx_axis at `node`: centered inside, one-sided on the box faces; on radial
/// grids the derivative vanishes at r = 0 by symmetry.
struct Stencil {
  StencilEntry e[2];
  int count = 0;
};

inline Stencil derivative_stencil(const Grid& g, std::size_t node, int axis) {
  Stencil s;
  const int a = g.axis_index(node, axis);
  const std::size_t st = g.stride(axis);
  const int last = g.points_per_axis - 1;
  const double h = g.spacing;
  if (a == 0) {
    if (g.geometry == Geometry::radial) return s;
    s.e[0] = {node + st, 1.0 / h};
    s.e[1] = {node, -1.0 / h};
  } else if (a == last) {
    s.e[0] = {node, 1.0 / h};
    s.e[1] = {node - st, -1.0 / h};
  } else {
    s.e[0] = {node + st, 0.5 / h};
    s.e[1] = {node - st, -0.5 / h};
  }
  s.count = 2;
  return s;
}

template <class T>
T apply_stencil(const Stencil& s, const std::vector<T>& v) {
  T out{};
  for (int m = 0; m < s.count; ++m) out += s.e[m].coeff * v[s.e[m].node];
  return out;
}

/// Number of magnetic-gradient components stored per node.
inline int gradient_components(const Grid& g) { return g.geometry == Geometry::radial ? 2 : g.dimension; }

inline void require_potential_grid(const ComplexField& u, const VectorField& A) {
  require_same_grid(u.grid, A.grid, "magnetic potential");
}

/// D_A u at one node.
inline CVec3 magnetic_gradient_at(const ComplexField& u, const VectorField& A, std::size_t i) {
  const Grid& g = u.grid;
  CVec3 d{cplx{}, cplx{}, cplx{}};
  const cplx I{0.0, 1.0};
  if (g.geometry == Geometry::radial) {
    d[0] = apply_stencil(derivative_stencil(g, i, 0), u.values) + I * A.values[i][0] * u.values[i];
    d[1] = I * A.values[i][1] * u.values[i];
    return d;
  }
  for (int j = 0; j < g.dimension; ++j)
    d[j] = apply_stencil(derivative_stencil(g, i, j), u.values) + I * A.values[i][j] * u.values[i];
  return d;
}

inline ComplexVectorField magnetic_gradient(const ComplexField& u, const VectorField& A) {
  require_potential_grid(u, A);
  ComplexVectorField out{u.grid, std::vector<CVec3>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) out.values[i] = magnetic_gradient_at(u, A, i);
  return out;
}

inline double cvec3_norm(const CVec3& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])); }

/// Plain gradient of a real field.
inline Vec3 real_gradient_at(const Grid& g, const std::vector<double>& v, std::size_t i) {
  Vec3 d{0.0, 0.0, 0.0};
  for (int j = 0; j < g.dimension; ++j) d[j] = apply_stencil(derivative_stencil(g, i, j), v);
  return d;
}

inline std::vector<double> node_weights(const Grid& g) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = g.weight(i);
  return w;
}

// ---------------------------------------------------------------------------
// Energy

struct EnergyBreakdown {
  double magnetic_kinetic = 0.0;  // sum w |D_A u|^p
  double electric = 0.0;          // sum w V |u|^p
  double critical = 0.0;          // sum w K |u|^{p*}
  double subcritical = 0.0;       // sum w F(x, |u|^p)
  double total = 0.0;
  double p = 2.0;
  double p_star = 4.0;

  [[nodiscard]] double norm_p() const { return magnetic_kinetic + electric; }
  [[nodiscard]] double recombined() const {
    return magnetic_kinetic / p + electric / p - critical / p_star - subcritical / p;
  }
};

namespace detail {

inline void require_field_shapes(const ComplexField& u, const PotentialSet& pots) {
  require_same_grid(u.grid, pots.A.grid, "potential A");
  require_same_grid(u.grid, pots.V.grid, "potential V");
  require_same_grid(u.grid, pots.K.grid, "potential K");
}

inline void require_finite(double v, const char* op, const char* what, const Grid& g, std::size_t node) {
  if (std::isfinite(v)) return;
  const Vec3 x = g.coordinates(node);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s: non-finite %s at node %zu (x = %.6g, %.6g, %.6g)", op, what, node, x[0], x[1], x[2]);
  throw std::runtime_error(buf);
}

/// |z|^{s} z with 0 at z = 0.
inline cplx power_scaled(cplx z, double modulus, double s) { return modulus > 0.0 ? std::pow(modulus, s) * z : cplx{}; }

}  // namespace detail

inline EnergyBreakdown energy(const ComplexField& u, const PotentialSet& pots, const NonlinearityModel& nl,
                              const ProblemParams& pp) {
  detail::require_field_shapes(u, pots);
  const Grid& g = u.grid;
  const double p = pp.p, ps = pp.p_star();
  EnergyBreakdown e;
  e.p = p;
  e.p_star = ps;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.weight(i);
    const double m = std::abs(u.values[i]);
    const double grad = std::pow(cvec3_norm(magnetic_gradient_at(u, pots.A, i)), p);
    const double mp = std::pow(m, p);
    const double crit = pots.K.values[i] * std::pow(m, ps);
    const double sub = nl.F(nl.weight_at(g.coordinates(i)), mp);
    detail::require_finite(grad, "energy", "kinetic density", g, i);
    detail::require_finite(crit, "energy", "critical density", g, i);
    detail::require_finite(sub, "energy", "subcritical density", g, i);
    e.magnetic_kinetic += w * grad;
    e.electric += w * pots.V.values[i] * mp;
    e.critical += w * crit;
    e.subcritical += w * sub;
  }
  e.total = e.recombined();
  return e;
}

inline double energy_norm(const ComplexField& u, const PotentialSet& pots, const ProblemParams& pp) {
  detail::require_field_shapes(u, pots);
  const Grid& g = u.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.weight(i);
    s += w * std::pow(cvec3_norm(magnetic_gradient_at(u, pots.A, i)), pp.p);
    s += w * pots.V.values[i] * std::pow(std::abs(u.values[i]), pp.p);
  }
  return std::pow(s, 1.0 / pp.p);
}

/// <J'_A(u), v> = r_{A,p}(u, v) - Re(int K |u|^{p*-2} u conj v + int f(x,|u|^p) |u|^{p-2} u conj v),
/// r_{A,p}(u, v) = Re int |D_A u|^{p-2} D_A u . conj(D_A v) + V |u|^{p-2} u conj v.
inline double gateaux(const ComplexField& u, const ComplexField& v, const PotentialSet& pots,
                      const NonlinearityModel& nl, const ProblemParams& pp) {
  detail::require_field_shapes(u, pots);
  require_same_grid(u.grid, v.grid, "gateaux direction");
  const Grid& g = u.grid;
  const double p = pp.p, ps = pp.p_star();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.weight(i);
    const CVec3 du = magnetic_gradient_at(u, pots.A, i);
    const CVec3 dv = magnetic_gradient_at(v, pots.A, i);
    const double gm = cvec3_norm(du);
    double r = 0.0;
    if (gm > 0.0) {
      const double c = std::pow(gm, p - 2.0);
      for (int j = 0; j < 3; ++j) r += c * (du[j] * std::conj(dv[j])).real();
    }
    const double m = std::abs(u.values[i]);
    const double uv = (u.values[i] * std::conj(v.values[i])).real();
    double local = 0.0;
    if (m > 0.0) {
      local += pots.V.values[i] * std::pow(m, p - 2.0) * uv;
      local -= pots.K.values[i] * std::pow(m, ps - 2.0) * uv;
      local -= nl.derivative_coefficient(nl.weight_at(g.coordinates(i)), m) * uv;
    }
    s += w * (r + local);
  }
  return s;
}

/// The field g with discrete_inner(g, v) = gateaux(u, v) for every v vanishing
/// on the Dirichlet boundary; assembled as the adjoint of the discrete energy
/// derivative. Boundary entries are 0.
inline ComplexField discrete_gradient(const ComplexField& u, const PotentialSet& pots, const NonlinearityModel& nl,
                                      const ProblemParams& pp) {
  detail::require_field_shapes(u, pots);
  const Grid& g = u.grid;
  const double p = pp.p, ps = pp.p_star();
  const cplx I{0.0, 1.0};
  std::vector<cplx> G(u.size(), cplx{});
  const int comps = gradient_components(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = g.weight(i);
    const CVec3 du = magnetic_gradient_at(u, pots.A, i);
    const double gm = cvec3_norm(du);
    if (gm > 0.0) {
      const double c = w * std::pow(gm, p - 2.0);
      for (int j = 0; j < comps; ++j) {
        const cplx xi = c * du[j];
        const bool has_derivative = !(g.geometry == Geometry::radial && j == 1);
        if (has_derivative) {
          const Stencil st = derivative_stencil(g, i, j);
          for (int m = 0; m < st.count; ++m) G[st.e[m].node] += st.e[m].coeff * xi;
        }
        G[i] += -I * pots.A.values[i][j] * xi;
      }
    }
    const double m = std::abs(u.values[i]);
    if (m > 0.0) {
      const double coef = pots.V.values[i] * std::pow(m, p - 2.0) - pots.K.values[i] * std::pow(m, ps - 2.0) -
                          nl.derivative_coefficient(nl.weight_at(g.coordinates(i)), m);
      G[i] += w * coef * u.values[i];
    }
  }
  ComplexField out = ComplexField::zeros(g);
  const double inv = 1.0 / g.cell_volume();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.is_boundary(i)) continue;
    out.values[i] = G[i] * inv;
    detail::require_finite(out.values[i].real() + out.values[i].imag(), "discrete_gradient", "value", g, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural checks

/// max over interior nodes of |grad |u|| - |D_A u|.
inline double diamagnetic_check(const ComplexField& u, const VectorField& A) {
  require_potential_grid(u, A);
  const Grid& g = u.grid;
  std::vector<double> mod(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) mod[i] = std::abs(u.values[i]);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.is_boundary(i)) continue;
    const Vec3 dm = real_gradient_at(g, mod, i);
    const double lhs = std::sqrt(dm[0] * dm[0] + dm[1] * dm[1] + dm[2] * dm[2]);
    worst = std::max(worst, lhs - cvec3_norm(magnetic_gradient_at(u, A, i)));
  }
  return worst;
}

/// max over interior nodes and components of |D_A(u eta) - u grad(eta) - eta D_A u|.
inline double product_rule_residual(const ComplexField& u, const ScalarField& eta, const VectorField& A) {
  require_potential_grid(u, A);
  require_same_grid(u.grid, eta.grid, "product_rule_residual");
  const Grid& g = u.grid;
  ComplexField ue = u;
  for (std::size_t i = 0; i < u.size(); ++i) ue.values[i] = u.values[i] * eta.values[i];
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.is_boundary(i)) continue;
    const CVec3 lhs = magnetic_gradient_at(ue, A, i);
    const CVec3 du = magnetic_gradient_at(u, A, i);
    const Vec3 de = real_gradient_at(g, eta.values, i);
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(lhs[j] - (u.values[i] * de[j] + eta.values[i] * du[j])));
  }
  return worst;
}

struct GaugeResult {
  ComplexField u;
  PotentialSet pots;
  double energy_residual = 0.0;
};

/// u' = e^{-i phi} u, A' = A + grad phi (centered differences).
inline GaugeResult gauge_transform(const ComplexField& u, const PotentialSet& pots, const ScalarField& phi,
                                   const NonlinearityModel& nl, const ProblemParams& pp) {
  detail::require_field_shapes(u, pots);
  require_same_grid(u.grid, phi.grid, "gauge_transform");
  const Grid& g = u.grid;
  GaugeResult r{u, pots, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    r.u.values[i] = std::polar(1.0, -phi.values[i]) * u.values[i];
    const Vec3 d = real_gradient_at(g, phi.values, i);
    for (int j = 0; j < g.dimension; ++j) r.pots.A.values[i][j] += d[j];
  }
  r.energy_residual = std::abs(energy(r.u, r.pots, nl, pp).total - energy(u, pots, nl, pp).total);
  return r;
}

// ---------------------------------------------------------------------------
// Hypothesis report

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // signed margin of the worst sample (negative = violated)
  double worst_x = 0.0;
  double worst_t = 0.0;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double flatness_constant = 0.0;  // fitted C in |K(x)-K(0)| <= C |x|^tau on B_{delta_K}

  [[nodiscard]] bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
  }
  [[nodiscard]] const HypothesisCheck& find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no hypothesis check named " + name);
  }
};

namespace detail {

inline void record(HypothesisCheck& c, double margin, double scale, double x, double t) {
  if (margin < c.worst) {
    c.worst = margin;
    c.worst_x = x;
    c.worst_t = t;
  }
  if (margin < -1e-12 * std::max(1.0, scale)) c.passed = false;
}

}  // namespace detail

/// Samples hypotheses (f_0)-(f_3), (V), (K) on the grid nodes of `pots` and
/// n_t values of t in [0, t_max].
inline HypothesisReport hypothesis_report(const NonlinearityModel& nl, const PotentialSet& pots, const ProblemParams& pp,
                                          double t_max = 10.0, int n_t = 101) {
  const Grid& g = pots.V.grid;
  HypothesisReport rep;
  HypothesisCheck f0, f1, f2, f3, hv, hk;
  f0.name = "(f_0)";
  f1.name = "(f_1)";
  f2.name = "(f_2)";
  f3.name = "(f_3)";
  hv.name = "(V)";
  hk.name = "(K)";
  f1.note = "pointwise bound sampled; global summability of h1, h2 is not verifiable on a truncated box";
  const double e1 = (pp.k - pp.p) / pp.p;
  const auto [c1, c2] = nl.growth_weights();
  const double ps = pp.p_star();
  (void)ps;

  std::vector<double> ts(n_t);
  for (int j = 0; j < n_t; ++j) ts[j] = t_max * j / (n_t - 1);

  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.coordinates(i);
    const double r = g.radius(i);
    const double w = nl.weight_at(x);
    for (double t : ts) {
      const double fv = nl.f(w, t), Fv = nl.F(w, t);
      detail::record(f0, fv, fv, r, t);
      if (t == 0.0) {
        detail::record(f0, -std::abs(fv), 1.0, r, t);
        continue;
      }
      const double bound = c1 * w + c2 * w * std::pow(t, e1);
      detail::record(f1, bound - fv, bound, r, t);
      const double lhs = pp.theta / pp.p * Fv;
      detail::record(f2, fv * t - lhs, fv * t, r, t);
      if (!(Fv > 0.0)) {
        f2.passed = false;
        detail::record(f2, Fv, 1.0, r, t);
      }
      const double lower = pp.lambda * std::pow(t, pp.q / pp.p);
      detail::record(f3, Fv - lower, std::max(Fv, lower), r, t);
    }
    detail::record(hv, pots.V.values[i] - pots.V0, pots.V0, r, 0.0);
  }
  if (!(pots.V0 > 0.0)) {
    hv.passed = false;
    hv.note = "V0 must be positive";
  }

  // (K): 0 <= K <= K_sup = K(0), tau window, flatness constant on B_{delta_K}.
  const std::size_t o = g.origin_node();
  const double k0 = pots.K.values[o];
  if (g.radius(o) > 0.0) hk.note = "grid has no node at the origin; K(0) taken at the nearest node";
  if (std::abs(k0 - pots.K_sup) > 1e-12 * pots.K_sup) {
    hk.passed = false;
    hk.note = "K(0) differs from K_sup";
  }
  double cflat = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double kv = pots.K.values[i];
    detail::record(hk, kv, 1.0, g.radius(i), 0.0);
    detail::record(hk, pots.K_sup - kv, pots.K_sup, g.radius(i), 0.0);
    const double r = g.radius(i);
    if (r > 0.0 && r <= pots.delta_K) cflat = std::max(cflat, std::abs(kv - k0) / std::pow(r, pots.tau));
  }
  if (const auto tv = tau_violation(pots.tau, pp.p, pp.n_math)) {
    hk.passed = false;
    hk.note = *tv;
  }
  rep.flatness_constant = cflat;
  rep.checks = {f0, f1, f2, f3, hv, hk};
  return rep;
}

// ---------------------------------------------------------------------------
// Tail mass

/// For each R: fraction of sum w |u|^s lying in |x| > R.
inline std::vector<std::pair<double, double>> tail_mass(const ComplexField& u, const std::vector<double>& radii,
                                                        double exponent) {
  for (std::size_t j = 1; j < radii.size(); ++j)
    if (!(radii[j] > radii[j - 1])) throw std::invalid_argument("tail_mass: radii must increase");
  const Grid& g = u.grid;
  std::vector<double> outside(radii.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = g.weight(i) * std::pow(std::abs(u.values[i]), exponent);
    total += m;
    const double r = g.radius(i);
    for (std::size_t j = 0; j < radii.size(); ++j)
      if (r > radii[j]) outside[j] += m;
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 0; j < radii.size(); ++j)
    out.emplace_back(radii[j], total > 0.0 ? std::clamp(outside[j] / total, 0.0, 1.0) : 0.0);
  return out;
}

}  // namespace magpl
