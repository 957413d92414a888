#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "magpl/quadrature.hpp"

namespace magpl {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

enum class Geometry { cartesian, radial };

/// Structured grid truncating R^N.
///
/// Cartesian: the box [-L, L]^d with n nodes per axis (d = 1..3).
/// Radial: r in [0, L] with n nodes; integrals carry the weight
/// |S^{N-1}| r^{N-1} of an N-dimensional radial function, where N is
/// `radial_dim` (it may differ from the storage dimension 1).
struct Grid {
  Geometry geometry = Geometry::cartesian;
  int dimension = 1;
  double half_width = 1.0;
  int points_per_axis = 3;
  double spacing = 1.0;
  double radial_dim = 0.0;

  static Grid cartesian(int d, double half_width, int n) {
    if (d < 1 || d > 3) throw std::invalid_argument("Grid: dimension must be 1, 2 or 3");
    if (n < 3) throw std::invalid_argument("Grid: points_per_axis must be >= 3");
    if (!(half_width > 0.0)) throw std::invalid_argument("Grid: half width must be positive");
    Grid g;
    g.geometry = Geometry::cartesian;
    g.dimension = d;
    g.half_width = half_width;
    g.points_per_axis = n;
    g.spacing = 2.0 * half_width / (n - 1);
    return g;
  }

  static Grid radial(double radius, int n, double radial_dim) {
    if (n < 3) throw std::invalid_argument("Grid: points_per_axis must be >= 3");
    if (!(radius > 0.0)) throw std::invalid_argument("Grid: radius must be positive");
    if (!(radial_dim >= 1.0)) throw std::invalid_argument("Grid: radial dimension must be >= 1");
    Grid g;
    g.geometry = Geometry::radial;
    g.dimension = 1;
    g.half_width = radius;
    g.points_per_axis = n;
    g.spacing = radius / (n - 1);
    g.radial_dim = radial_dim;
    return g;
  }

  [[nodiscard]] std::size_t size() const {
    std::size_t s = 1;
    for (int k = 0; k < dimension; ++k) s *= static_cast<std::size_t>(points_per_axis);
    return s;
  }

  [[nodiscard]] std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int k = 0; k < axis; ++k) s *= static_cast<std::size_t>(points_per_axis);
    return s;
  }

  [[nodiscard]] int axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride(axis)) % static_cast<std::size_t>(points_per_axis));
  }

  [[nodiscard]] double axis_coordinate(int a) const {
    return geometry == Geometry::radial ? a * spacing : -half_width + a * spacing;
  }

  /// Cartesian coordinates (radial grids report (r, 0, 0)).
  [[nodiscard]] Vec3 coordinates(std::size_t node) const {
    Vec3 x{0.0, 0.0, 0.0};
    for (int k = 0; k < dimension; ++k) x[k] = axis_coordinate(axis_index(node, k));
    return x;
  }

  [[nodiscard]] double radius(std::size_t node) const {
    const Vec3 x = coordinates(node);
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  }

  /// Dirichlet nodes: the box faces, or r = L for radial grids.
  [[nodiscard]] bool is_boundary(std::size_t node) const {
    for (int k = 0; k < dimension; ++k) {
      const int a = axis_index(node, k);
      if (a == points_per_axis - 1) return true;
      if (a == 0 && geometry == Geometry::cartesian) return true;
    }
    return false;
  }

  /// Trapezoidal weight of a node (including the radial measure).
  [[nodiscard]] double weight(std::size_t node) const {
    double w = 1.0;
    for (int k = 0; k < dimension; ++k) {
      const int a = axis_index(node, k);
      const bool end = (a == 0 || a == points_per_axis - 1);
      w *= end ? 0.5 * spacing : spacing;
    }
    if (geometry == Geometry::radial) {
      const double r = coordinates(node)[0];
      w *= sphere_area(radial_dim) * std::pow(r, radial_dim - 1.0);
    }
    return w;
  }

  /// h^d, the normalization of the discrete inner product Re<g, v> h^d.
  [[nodiscard]] double cell_volume() const { return std::pow(spacing, dimension); }

  /// Index of the node at (or nearest to) the origin.
  [[nodiscard]] std::size_t origin_node() const {
    if (geometry == Geometry::radial) return 0;
    const int mid = (points_per_axis - 1) / 2;
    std::size_t node = 0;
    for (int k = 0; k < dimension; ++k) node += static_cast<std::size_t>(mid) * stride(k);
    return node;
  }

  bool operator==(const Grid&) const = default;
};

struct ComplexField {
  Grid grid;
  std::vector<cplx> values;

  static ComplexField zeros(const Grid& g) { return {g, std::vector<cplx>(g.size(), cplx{0.0, 0.0})}; }

  template <class F>
  static ComplexField sample(const Grid& g, F&& f) {
    ComplexField u = zeros(g);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.is_boundary(i)) u.values[i] = f(g.coordinates(i));
    return u;
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }

  void check_finite(const std::string& what) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
        throw std::runtime_error(what + ": non-finite value at node " + std::to_string(i));
  }
};

/// Real scalar sampled on a grid.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  template <class F>
  static ScalarField sample(const Grid& g, F&& f) {
    ScalarField s{g, std::vector<double>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) s.values[i] = f(g.coordinates(i));
    return s;
  }
};

/// Real vector sampled on a grid (components beyond grid.dimension are unused).
struct VectorField {
  Grid grid;
  std::vector<Vec3> values;

  static VectorField zeros(const Grid& g) { return {g, std::vector<Vec3>(g.size(), Vec3{0.0, 0.0, 0.0})}; }

  template <class F>
  static VectorField sample(const Grid& g, F&& f) {
    VectorField a{g, std::vector<Vec3>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) a.values[i] = f(g.coordinates(i));
    return a;
  }
};

struct ComplexVectorField {
  Grid grid;
  std::vector<CVec3> values;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Re sum_i g_i conj(v_i) h^d
inline double discrete_inner(const ComplexField& g, const ComplexField& v) {
  require_same_grid(g.grid, v.grid, "discrete_inner");
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.values[i].real() * v.values[i].real() + g.values[i].imag() * v.values[i].imag();
  return s * g.grid.cell_volume();
}

inline double discrete_l2(const ComplexField& g) { return std::sqrt(discrete_inner(g, g)); }

inline ComplexField axpy(double a, const ComplexField& x, const ComplexField& y) {
  require_same_grid(x.grid, y.grid, "axpy");
  ComplexField out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += a * x.values[i];
  return out;
}

inline ComplexField scaled(const ComplexField& x, double a) {
  ComplexField out = x;
  for (auto& z : out.values) z *= a;
  return out;
}

}  // namespace magpl
