#pragma once

// Complex N-vector arithmetic and the pointwise inequalities used throughout
// the variational machinery (monotonicity of z -> |z|^{p-2} z, Simon-type
// lower bounds, Lindqvist's formula (VI), and a few scalar power bounds).

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace magpl {

using cplx = std::complex<double>;

/// A finite, nonempty vector in C^N.
class CVec {
 public:
  CVec() = default;
  explicit CVec(std::vector<cplx> components) : c_(std::move(components)) { validate(); }
  CVec(std::initializer_list<cplx> components) : c_(components) { validate(); }

  [[nodiscard]] std::size_t dim() const noexcept { return c_.size(); }
  [[nodiscard]] const cplx& operator[](std::size_t k) const { return c_[k]; }
  [[nodiscard]] std::span<const cplx> components() const noexcept { return c_; }

 private:
  void validate() const {
    if (c_.empty()) throw std::invalid_argument("CVec: dimension must be >= 1");
    for (const auto& z : c_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("CVec: components must be finite");
    }
  }

  std::vector<cplx> c_;
};

/// Outcome of one inequality evaluation `lhs <= rhs`.
struct IneqReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant_used = 0.0;
  bool holds = false;
  double slack = 0.0;  // rhs - lhs
};

inline constexpr double kIneqTolerance = 1e-12;

/// Tolerance is relative to max(|lhs|, |rhs|, 1).
inline IneqReport make_report(double lhs, double rhs, double constant_used) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
  IneqReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant_used = constant_used;
  r.slack = rhs - lhs;
  r.holds = lhs <= rhs + kIneqTolerance * scale;
  return r;
}

namespace detail {

inline void require_same_dim(const CVec& a, const CVec& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("CVec: dimension mismatch");
}

inline void require_p_above_one(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("exponent p must satisfy p > 1");
}

}  // namespace detail

inline double norm(const CVec& a) {
  double s = 0.0;
  for (const auto& z : a.components()) s += std::norm(z);
  return std::sqrt(s);
}

/// <u, v> = sum_k u_k conj(v_k)
inline cplx inner(const CVec& u, const CVec& v) {
  detail::require_same_dim(u, v);
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < u.dim(); ++k) s += u[k] * std::conj(v[k]);
  return s;
}

inline CVec operator-(const CVec& a, const CVec& b) {
  detail::require_same_dim(a, b);
  std::vector<cplx> out(a.dim());
  for (std::size_t k = 0; k < a.dim(); ++k) out[k] = a[k] - b[k];
  return CVec(std::move(out));
}

/// |z|^s z, with the value at z = 0 taken as 0 (continuous extension for s > -1).
inline CVec power_scaled(const CVec& z, double s) {
  const double r = norm(z);
  std::vector<cplx> out(z.dim(), cplx{0.0, 0.0});
  if (r > 0.0) {
    const double f = std::pow(r, s);
    for (std::size_t k = 0; k < z.dim(); ++k) out[k] = f * z[k];
  }
  return CVec(std::move(out));
}

/// Re <|a|^{p-2} a - |b|^{p-2} b, a - b>; nonnegative, zero only when a = b.
inline double monotone_form(const CVec& a, const CVec& b, double p) {
  detail::require_p_above_one(p);
  detail::require_same_dim(a, b);
  const CVec x = power_scaled(a, p - 2.0) - power_scaled(b, p - 2.0);
  return inner(x, a - b).real();
}

/// Constant multiplying the monotone form in the Simon-type bound.
///
/// p >= 2: |a-b|^p <= 2^{p-2} M, i.e. M >= 2^{2-p}|a-b|^p.
/// 1 < p < 2: |a-b|^p <= (p-1)^{-p/2} M^{p/2} (|a|^p + |b|^p)^{(2-p)/2}.
inline double simon_constant(double p) {
  detail::require_p_above_one(p);
  return p >= 2.0 ? std::pow(2.0, p - 2.0) : std::pow(p - 1.0, -p / 2.0);
}

inline IneqReport simon_check(const CVec& a, const CVec& b, double p) {
  detail::require_p_above_one(p);
  const double m = std::max(monotone_form(a, b, p), 0.0);
  const double lhs = std::pow(norm(a - b), p);
  const double c = simon_constant(p);
  double rhs = 0.0;
  if (p >= 2.0) {
    rhs = c * m;
  } else {
    const double mass = std::pow(norm(a), p) + std::pow(norm(b), p);
    rhs = c * std::pow(m, p / 2.0) * std::pow(mass, (2.0 - p) / 2.0);
  }
  return make_report(lhs, rhs, c);
}

/// ||b|^{p-2}b - |a|^{p-2}a| <= (p-1)(|a|^{(p-2)/2} + |b|^{(p-2)/2}) ||b|^{(p-2)/2}b - |a|^{(p-2)/2}a|
inline IneqReport vi_check(const CVec& a, const CVec& b, double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("vi_check requires p >= 2");
  detail::require_same_dim(a, b);
  const double lhs = norm(power_scaled(b, p - 2.0) - power_scaled(a, p - 2.0));
  const double h = (p - 2.0) / 2.0;
  const double weight = std::pow(norm(a), h) + std::pow(norm(b), h);
  const double rhs = (p - 1.0) * weight * norm(power_scaled(b, h) - power_scaled(a, h));
  return make_report(lhs, rhs, p - 1.0);
}

/// (x+y)^g <= a^g x^g + b^g y^g whenever 1/a + 1/b = 1.
inline IneqReport weighted_power_bound(double x, double y, double gamma, double alpha, double beta) {
  if (x < 0.0 || y < 0.0 || gamma < 0.0)
    throw std::invalid_argument("weighted_power_bound: x, y, gamma must be nonnegative");
  if (!(alpha > 0.0) || !(beta > 0.0) || std::abs(1.0 / alpha + 1.0 / beta - 1.0) > 1e-12)
    throw std::invalid_argument("weighted_power_bound: need alpha, beta > 0 with 1/alpha + 1/beta = 1");
  const double lhs = std::pow(x + y, gamma);
  const double rhs = std::pow(alpha, gamma) * std::pow(x, gamma) + std::pow(beta, gamma) * std::pow(y, gamma);
  return make_report(lhs, rhs, 1.0);
}

inline double split_power_constant(double gamma) { return std::max(std::pow(2.0, gamma - 1.0), 1.0); }

/// C(a^g + b^g) with C = max{2^{g-1}, 1}; always >= (a+b)^g.
inline double split_power(double alpha, double beta, double gamma) {
  if (alpha < 0.0 || beta < 0.0 || !(gamma > 0.0))
    throw std::invalid_argument("split_power: need alpha, beta >= 0 and gamma > 0");
  return split_power_constant(gamma) * (std::pow(alpha, gamma) + std::pow(beta, gamma));
}

/// (a+b)^r <= a^r + r (a+b)^{r-1} b for a, b > 0, r >= 1.
inline IneqReport convexity_tail_bound(double a, double b, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("convexity_tail_bound requires r >= 1");
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("convexity_tail_bound requires a, b > 0");
  const double lhs = std::pow(a + b, r);
  const double rhs = std::pow(a, r) + r * std::pow(a + b, r - 1.0) * b;
  return make_report(lhs, rhs, r);
}

struct TMaxClosedForm {
  double t_star = 0.0;
  double value = 0.0;
};

/// sup_{t>=0} t^p D1/p - t^{p*} D2/p*, with p* = Np/(N-p).
inline TMaxClosedForm tmax_closed_form(double d1, double d2, double p, double n) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("tmax_closed_form: D1, D2 must be positive");
  if (!(p > 1.0) || !(p < n)) throw std::invalid_argument("tmax_closed_form: need 1 < p < N");
  const double p_star = n * p / (n - p);
  TMaxClosedForm out;
  out.t_star = std::pow(d1 / d2, 1.0 / (p_star - p));
  out.value = std::pow(d1 / std::pow(d2, (n - p) / n), n / p) / n;
  return out;
}

/// The one-variable profile maximized by tmax_closed_form.
inline double critical_ray_profile(double t, double d1, double d2, double p, double n) {
  const double p_star = n * p / (n - p);
  return std::pow(t, p) * d1 / p - std::pow(t, p_star) * d2 / p_star;
}

}  // namespace magpl
