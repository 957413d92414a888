#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace magpl {

/// Least-squares power law value ~ C * eps^exponent (optionally with a
/// |log eps| factor divided out first).
struct RateFit {
  std::vector<double> epsilons;
  std::vector<double> values;
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  bool log_corrected = false;
};

inline RateFit fit_power_law(const std::vector<double>& eps, const std::vector<double>& values,
                             bool divide_log = false, std::size_t min_points = 2) {
  if (eps.size() != values.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (eps.size() < min_points) throw std::invalid_argument("fit_power_law: too few points");
  const std::size_t n = eps.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(values[i] > 0.0))
      throw std::invalid_argument("fit_power_law: epsilons and values must be positive");
    double v = values[i];
    if (divide_log) {
      if (!(eps[i] < 1.0)) throw std::invalid_argument("fit_power_law: log correction needs eps < 1");
      v /= std::abs(std::log(eps[i]));
    }
    xs[i] = std::log(eps[i]);
    ys[i] = std::log(v);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: epsilons must not all coincide");
  RateFit fit;
  fit.epsilons = eps;
  fit.values = values;
  fit.log_corrected = divide_log;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  fit.r_squared = syy > 0.0 ? std::min(1.0, sxy * sxy / (sxx * syy)) : 1.0;
  return fit;
}

/// n values geometric from `hi` down to `lo`.
inline std::vector<double> geometric_sweep(double hi, double lo, int n) {
  if (n < 2 || !(hi > 0.0) || !(lo > 0.0)) throw std::invalid_argument("geometric_sweep: bad arguments");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = hi * std::pow(lo / hi, double(i) / (n - 1));
  return out;
}

}  // namespace magpl
