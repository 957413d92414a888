#pragma once

// Talenti instantons U_eps(x) = eps^{-(N-p)/p} U((x-x0)/eps), the C^1 cutoff
// psi, the normalized bump w_eps = psi U_eps / ||psi U_eps||_{p*}, and the
// radial quadratures that measure them.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpl/quadrature.hpp"
#include "magpl/rate_fit.hpp"

namespace magpl {

inline void require_instanton_exponents(double p, double n) {
  if (!(p > 1.0) || !(p < n)) throw std::invalid_argument("instanton: need 1 < p < N");
}

inline double critical_exponent(double p, double n) { return n * p / (n - p); }

/// c_{p,N} = (N^{1/p} ((N-p)/(p-1))^{(p-1)/p})^{(N-p)/p}
inline double talenti_constant(double p, double n) {
  require_instanton_exponents(p, n);
  const double base = std::pow(n, 1.0 / p) * std::pow((n - p) / (p - 1.0), (p - 1.0) / p);
  return std::pow(base, (n - p) / p);
}

/// U(r) = c (1 + r^{p/(p-1)})^{-(N-p)/p}
inline double talenti_profile(double r, double p, double n) {
  return talenti_constant(p, n) * std::pow(1.0 + std::pow(r, p / (p - 1.0)), -(n - p) / p);
}

/// U'(r) = -c (N-p)/(p-1) r^{1/(p-1)} (1 + r^{p/(p-1)})^{-N/p}
inline double talenti_derivative(double r, double p, double n) {
  return -talenti_constant(p, n) * (n - p) / (p - 1.0) * std::pow(r, 1.0 / (p - 1.0)) *
         std::pow(1.0 + std::pow(r, p / (p - 1.0)), -n / p);
}

struct InstantonSpec {
  double epsilon = 1.0;
  std::vector<double> center;  // empty means the origin
  double p = 2.0;
  int n = 3;
  double delta_psi = 1.0;

  void validate() const {
    require_instanton_exponents(p, n);
    if (!(epsilon > 0.0)) throw std::invalid_argument("InstantonSpec: epsilon must be positive");
    if (!(delta_psi > 0.0)) throw std::invalid_argument("InstantonSpec: delta_psi must be positive");
    for (double c : center)
      if (!std::isfinite(c)) throw std::invalid_argument("InstantonSpec: center must be finite");
  }

  [[nodiscard]] InstantonSpec with_epsilon(double eps) const {
    InstantonSpec s = *this;
    s.epsilon = eps;
    return s;
  }

  [[nodiscard]] double distance(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double c = k < center.size() ? center[k] : 0.0;
      s += (x[k] - c) * (x[k] - c);
    }
    return std::sqrt(s);
  }
};

/// U_eps as a function of r = |x - x0|.
inline double instanton_radial(double r, const InstantonSpec& s) {
  return std::pow(s.epsilon, -(s.n - s.p) / s.p) * talenti_profile(r / s.epsilon, s.p, s.n);
}

inline double instanton_radial_derivative(double r, const InstantonSpec& s) {
  return std::pow(s.epsilon, -s.n / s.p) * talenti_derivative(r / s.epsilon, s.p, s.n);
}

inline double instanton_value(std::span<const double> x, const InstantonSpec& s) {
  s.validate();
  return instanton_radial(s.distance(x), s);
}

/// psi(r) = 1 - t^2 (3 - 2t), t = clamp(2r/delta - 1, 0, 1).
inline double cutoff_radial(double r, double delta) {
  const double t = std::clamp(2.0 * r / delta - 1.0, 0.0, 1.0);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

inline double cutoff_radial_derivative(double r, double delta) {
  const double t = 2.0 * r / delta - 1.0;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -6.0 * t * (1.0 - t) * 2.0 / delta;
}

inline double cutoff_value(std::span<const double> x, const InstantonSpec& s) {
  s.validate();
  return cutoff_radial(s.distance(x), s.delta_psi);
}

/// Rule adapted to psi U_eps: log panels down to eps/1000 and breaks at the
/// kinks of psi''.
inline RadialQuadrature bump_quadrature(const InstantonSpec& s, int panels_per_decade = 8, int order = 16) {
  return RadialQuadrature::compact(s.epsilon, s.delta_psi, {s.delta_psi / 2.0}, panels_per_decade, order);
}

/// omega_{N-1} int |profile(r)|^q r^{N-1} dr, i.e. ||profile||_q^q.
template <class Profile>
double radial_power_integral(Profile&& profile, double q, double n, const RadialQuadrature& quad) {
  if (!(q >= 1.0)) throw std::invalid_argument("radial_norm: q must be >= 1");
  if (quad.tail_exponent > 0.0 && !(q * quad.tail_exponent > n))
    throw std::domain_error("radial_norm: profile is not q-integrable (q * decay <= N)");
  auto integrand = [&](double r) { return std::pow(std::abs(profile(r)), q) * std::pow(r, n - 1.0); };
  const double total = quad.integrate(integrand);
  if (quad.tail_exponent > 0.0) {
    const double net = q * quad.tail_exponent - n;
    const double tail = integrand(quad.r_max) * quad.r_max / net;
    if (tail > 1e-12 * std::abs(total))
      throw std::runtime_error("radial_norm: algebraic tail exceeds tolerance; enlarge the quadrature");
  }
  return sphere_area(n) * total;
}

template <class Profile>
double radial_norm(Profile&& profile, double q, double n, const RadialQuadrature& quad) {
  return std::pow(radial_power_integral(profile, q, n, quad), 1.0 / q);
}

/// ||psi U_eps||_{p*}
inline double bump_normalizer(const InstantonSpec& s) {
  s.validate();
  const auto quad = bump_quadrature(s);
  return radial_norm([&](double r) { return cutoff_radial(r, s.delta_psi) * instanton_radial(r, s); },
                     critical_exponent(s.p, s.n), s.n, quad);
}

inline double bump_radial(double r, const InstantonSpec& s, double normalizer) {
  return cutoff_radial(r, s.delta_psi) * instanton_radial(r, s) / normalizer;
}

inline double bump_radial_derivative(double r, const InstantonSpec& s, double normalizer) {
  return (cutoff_radial_derivative(r, s.delta_psi) * instanton_radial(r, s) +
          cutoff_radial(r, s.delta_psi) * instanton_radial_derivative(r, s)) /
         normalizer;
}

inline double bump_value(std::span<const double> x, const InstantonSpec& s, double normalizer) {
  s.validate();
  if (!(normalizer > 0.0)) throw std::invalid_argument("bump_value: normalizer must be positive");
  return bump_radial(s.distance(x), s, normalizer);
}

struct QuadratureOptions {
  int panels_per_decade = 8;
  int order = 16;
  double rel_tail = 1e-14;
};

/// ||grad U||_p^p, ||U||_{p*}^{p*}, and S = ||grad U||_p^p / ||U||_{p*}^p.
struct SobolevIdentities {
  double gradient_pp = 0.0;
  double critical_mass = 0.0;
  double S = 0.0;
  double S_pow = 0.0;  // S^{N/p}
  double refinement_change = 0.0;  // relative change of S on doubling the panels
};

namespace detail {

inline SobolevIdentities sobolev_at(double p, double n, const QuadratureOptions& o) {
  const double p_star = critical_exponent(p, n);
  const auto grad_quad = RadialQuadrature::algebraic(1.0, (n - 1.0) / (p - 1.0), p, n, o.rel_tail,
                                                     o.panels_per_decade, o.order);
  const auto mass_quad = RadialQuadrature::algebraic(1.0, (n - p) / (p - 1.0), p_star, n, o.rel_tail,
                                                     o.panels_per_decade, o.order);
  SobolevIdentities out;
  out.gradient_pp = radial_power_integral([&](double r) { return talenti_derivative(r, p, n); }, p, n, grad_quad);
  out.critical_mass = radial_power_integral([&](double r) { return talenti_profile(r, p, n); }, p_star, n, mass_quad);
  out.S = out.gradient_pp / std::pow(out.critical_mass, p / p_star);
  out.S_pow = std::pow(out.S, n / p);
  return out;
}

}  // namespace detail

inline SobolevIdentities sobolev_identities(double p, double n, const QuadratureOptions& o = {}) {
  require_instanton_exponents(p, n);
  auto coarse = detail::sobolev_at(p, n, o);
  QuadratureOptions fine = o;
  fine.panels_per_decade *= 2;
  auto out = detail::sobolev_at(p, n, fine);
  out.refinement_change = std::abs(out.S - coarse.S) / out.S;
  if (!std::isfinite(out.S) || out.refinement_change > 1e-6)
    throw std::runtime_error("sobolev_constant: quadrature did not converge");
  return out;
}

inline double sobolev_constant(double p, double n, const QuadratureOptions& o = {}) {
  return sobolev_identities(p, n, o).S;
}

/// -Delta_p U_eps - U_eps^{p*-1} at radius r, with the flux
/// r^{N-1}|U'|^{p-2}U' differentiated by centered differences of width h.
inline double critical_residual(double r, const InstantonSpec& s, double h = 1e-4) {
  s.validate();
  if (!(r > 0.0)) throw std::invalid_argument("critical_residual: r must be positive");
  const double n = s.n, p = s.p;
  auto flux = [&](double rr) {
    const double d = instanton_radial_derivative(rr, s);
    return std::pow(rr, n - 1.0) * std::pow(std::abs(d), p - 2.0) * d;
  };
  const double hh = std::min(h, 0.5 * r);
  const double lap = (flux(r + hh) - flux(r - hh)) / (2.0 * hh) * std::pow(r, 1.0 - n);
  return -lap - std::pow(instanton_radial(r, s), critical_exponent(p, n) - 1.0);
}

/// Exponent of ||w_eps||_q^q as eps -> 0 and whether a |log eps| factor is present.
struct NormRatePrediction {
  double exponent = 0.0;
  bool log_case = false;
  std::string regime;
};

inline NormRatePrediction predicted_norm_rate(double q, double p, double n) {
  require_instanton_exponents(p, n);
  const double threshold = n * (p - 1.0) / (n - p);
  NormRatePrediction out;
  if (std::abs(q - threshold) <= 1e-12 * threshold) {
    out.exponent = (n - p) / (p * (p - 1.0)) * q;
    out.log_case = true;
    out.regime = "q = N(p-1)/(N-p)";
  } else if (q > threshold) {
    out.exponent = n - (n - p) / p * q;
    out.regime = "q > N(p-1)/(N-p)";
  } else {
    out.exponent = (n - p) / (p * (p - 1.0)) * q;
    out.regime = "q < N(p-1)/(N-p)";
  }
  return out;
}

/// ||w_eps||_q^q
inline double bump_norm_power(double q, const InstantonSpec& s) {
  const double normalizer = bump_normalizer(s);
  const auto quad = bump_quadrature(s);
  return radial_power_integral([&](double r) { return bump_radial(r, s, normalizer); }, q, s.n, quad);
}

/// ||grad w_eps||_p^p
inline double bump_gradient_power(const InstantonSpec& s) {
  const double normalizer = bump_normalizer(s);
  const auto quad = bump_quadrature(s);
  return radial_power_integral([&](double r) { return bump_radial_derivative(r, s, normalizer); }, s.p, s.n, quad);
}

struct RateCheck {
  RateFit fit;
  double predicted = 0.0;
  bool log_case = false;
  [[nodiscard]] double relative_error() const { return std::abs(fit.exponent - predicted) / std::abs(predicted); }
};

inline void require_rate_sweep(const std::vector<double>& eps) {
  if (eps.size() < 5) throw std::invalid_argument("rate sweep needs at least 5 epsilon values");
  double lo = eps.front(), hi = eps.front();
  for (double e : eps) {
    if (!(e > 0.0) || !(e < 1.0)) throw std::invalid_argument("rate sweep epsilons must lie in (0,1)");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (hi / lo < 100.0 * (1.0 - 1e-12)) throw std::invalid_argument("rate sweep must span at least two decades");
}

/// Fitted exponent of ||w_eps||_q^q over the sweep against the three-case prediction.
inline RateCheck lemma23_rates(double q, double p, int n, const std::vector<double>& eps, double delta_psi = 1.0) {
  require_rate_sweep(eps);
  const auto pred = predicted_norm_rate(q, p, n);
  InstantonSpec base{1.0, {}, p, n, delta_psi};
  std::vector<double> values;
  for (double e : eps) values.push_back(bump_norm_power(q, base.with_epsilon(e)));
  RateCheck out;
  out.fit = fit_power_law(eps, values, pred.log_case, 5);
  out.predicted = pred.exponent;
  out.log_case = pred.log_case;
  return out;
}

/// Fitted exponent of ||grad w_eps||_p^p - S against (N-p)/(p-1).
inline RateCheck gradient_excess_rates(double p, int n, const std::vector<double>& eps, double delta_psi = 1.0) {
  require_rate_sweep(eps);
  const double S = sobolev_constant(p, n);
  InstantonSpec base{1.0, {}, p, n, delta_psi};
  std::vector<double> values;
  for (double e : eps) values.push_back(std::abs(bump_gradient_power(base.with_epsilon(e)) - S));
  RateCheck out;
  out.fit = fit_power_law(eps, values, false, 5);
  out.predicted = (n - p) / (p - 1.0);
  return out;
}

}  // namespace magpl
