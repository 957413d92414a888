#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "magpl/magpl.hpp"

namespace magpl::testing {

/// Components uniform in the disc of radius 10; one draw in ten is rescaled
/// to radius up to 1e6.
inline CVec random_cvec(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> c(dim);
  const double scale = u(rng) < 0.1 ? std::pow(10.0, 1.0 + 5.0 * u(rng)) : 10.0;
  for (auto& z : c) z = std::polar(scale * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
  return CVec(std::move(c));
}

/// The 1D surrogate: p = 2, N_math = 4, A = 0, V = 1, flat-core K, flat power f.
struct Surrogate {
  ProblemParams pp;
  PotentialSet pots;
  NonlinearityModel nl;
  ComplexField v0;
};

inline Surrogate surrogate_1d(int points, double half_width = 10.0) {
  Surrogate s;
  s.pp.p = 2.0;
  s.pp.n = 1;
  s.pp.n_math = 4.0;
  s.pp.theta = 3.0;
  s.pp.k = 3.5;
  s.pp.q = 3.0;
  s.pp.lambda = 1.0;
  PotentialPreset pr;
  pr.tau = 3.0;
  const Grid g = Grid::cartesian(1, half_width, points);
  s.pots = pr.sample(g);
  s.nl = NonlinearityModel::power(s.pp);
  s.v0 = ComplexField::sample(g, [](const Vec3& x) { return cplx{std::exp(-x[0] * x[0]), 0.0}; });
  return s;
}

/// 2D cartesian setup with a symmetric-gauge field, a potential well and a
/// flat-core K; the exponents depend on p.
struct Magnetic2D {
  ProblemParams pp;
  PotentialSet pots;
  NonlinearityModel nl;
  Grid g;
};

inline Magnetic2D magnetic_2d(double p, int points, double half_width = 5.0) {
  Magnetic2D m;
  m.pp.p = p;
  m.pp.n = 2;
  m.pp.n_math = p < 2.0 ? 3.0 : 4.0;
  const double ps = m.pp.p_star();
  m.pp.theta = p + 0.4 * (ps - p);
  m.pp.k = p + 0.6 * (ps - p);
  m.pp.q = p + 0.4 * (ps - p);
  m.pp.lambda = 0.7;
  PotentialPreset pr;
  pr.magnetic = MagneticKind::symmetric;
  pr.B = 0.8;
  pr.electric = ElectricKind::well;
  pr.V_amp = 0.5;
  pr.tau = tau_window(p, m.pp.n_math).first + 0.5;
  m.g = Grid::cartesian(2, half_width, points);
  m.pots = pr.sample(m.g);
  m.nl = NonlinearityModel::power(m.pp, WeightKind::gaussian, 2.0);
  return m;
}

/// Smooth complex field: a sum of three Gaussian bumps with random centres,
/// widths, amplitudes and linear phases; negligible at the box faces.
inline ComplexField smooth_field(const Grid& g, std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Bump {
    Vec3 c;
    double w;
    cplx a;
    Vec3 k;
  };
  std::vector<Bump> bumps(3);
  for (auto& b : bumps) {
    for (int j = 0; j < 3; ++j) {
      b.c[j] = j < g.dimension ? spread * u(rng) : 0.0;
      b.k[j] = j < g.dimension ? 1.5 * u(rng) : 0.0;
    }
    b.w = 0.6 + 0.3 * u(rng);
    b.a = cplx{u(rng), u(rng)};
  }
  return ComplexField::sample(g, [&](const Vec3& x) {
    cplx s{};
    for (const auto& b : bumps) {
      double r2 = 0.0, ph = 0.0;
      for (int j = 0; j < 3; ++j) {
        r2 += (x[j] - b.c[j]) * (x[j] - b.c[j]);
        ph += b.k[j] * x[j];
      }
      s += b.a * std::exp(-r2 / (2.0 * b.w * b.w)) * std::polar(1.0, ph);
    }
    return s;
  });
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace magpl::testing
