#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace magpl {

/// Gauss-Legendre nodes/weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  std::vector<double> x(order), w(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[order - 1 - i] = z;
    w[i] = w[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre rule on [0, r_max] for radial integrals
/// int_0^R g(r) dr. Panels are log-spaced between r_min and r_max, with a
/// single leading panel on [0, r_min] and user breakpoints honoured exactly.
struct RadialQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Algebraic decay rate of the profiles this rule is meant for
  /// (profile ~ r^{-tail_exponent}); 0 for compactly supported integrands.
  double tail_exponent = 0.0;
  /// Settings retained so the rule can be refined.
  double r_min = 0.0;
  double r_max = 0.0;
  int panels_per_decade = 0;
  int order = 0;
  std::vector<double> breakpoints;

  [[nodiscard]] double upper_limit() const { return r_max; }

  template <class F>
  [[nodiscard]] double integrate(F&& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * g(nodes[i]);
    return s;
  }

  /// Same construction with twice the panel density.
  [[nodiscard]] RadialQuadrature refined() const {
    return build(r_min, r_max, 2 * panels_per_decade, order, breakpoints, tail_exponent);
  }

  static RadialQuadrature build(double r_min, double r_max, int panels_per_decade, int order,
                                std::vector<double> breaks = {}, double tail_exponent = 0.0) {
    if (!(r_min > 0.0) || !(r_max > r_min))
      throw std::invalid_argument("RadialQuadrature: need 0 < r_min < r_max");
    if (panels_per_decade < 1 || order < 2)
      throw std::invalid_argument("RadialQuadrature: need panels_per_decade >= 1 and order >= 2");
    RadialQuadrature q;
    q.r_min = r_min;
    q.r_max = r_max;
    q.panels_per_decade = panels_per_decade;
    q.order = order;
    q.breakpoints = breaks;
    q.tail_exponent = tail_exponent;

    std::vector<double> edges{0.0, r_min};
    const double decades = std::log10(r_max / r_min);
    const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade)));
    for (int i = 1; i <= panels; ++i) edges.push_back(r_min * std::pow(r_max / r_min, double(i) / panels));
    edges.back() = r_max;
    for (double b : breaks)
      if (b > 0.0 && b < r_max) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(std::abs(a), 1e-300); }),
                edges.end());

    const auto [gx, gw] = gauss_legendre(order);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = edges[e], b = edges[e + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int k = 0; k < order; ++k) {
        q.nodes.push_back(mid + half * gx[k]);
        q.weights.push_back(half * gw[k]);
      }
    }
    return q;
  }

  /// Rule on [0, R] for a compactly supported integrand with features at
  /// scale `feature` and kinks at `breaks`.
  static RadialQuadrature compact(double feature, double support, std::vector<double> breaks = {},
                                  int panels_per_decade = 8, int order = 16) {
    const double r_min = std::min(feature * 1e-3, support * 1e-3);
    return build(r_min, support, panels_per_decade, order, std::move(breaks), 0.0);
  }

  /// Rule for an integrand on [0, inf) whose profile decays like
  /// r^{-decay}. The cut-off radius is chosen so that the algebraic tail of
  /// r^{N-1}|profile|^q beyond it is below rel_tail of the scale-one mass.
  static RadialQuadrature algebraic(double scale, double decay, double q, double n, double rel_tail = 1e-14,
                                    int panels_per_decade = 8, int order = 16) {
    const double net = q * decay - n;  // integrand ~ r^{-(net+1)}
    if (!(net > 0.0)) throw std::domain_error("RadialQuadrature: integrand is not integrable at infinity");
    const double r_max = scale * std::pow(10.0, std::min(-std::log10(rel_tail) / net + 1.0, 60.0));
    return build(scale * 1e-3, r_max, panels_per_decade, order, {}, decay);
  }
};

/// Surface area of the unit sphere in R^N.
inline double sphere_area(double n) {
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

}  // namespace magpl
