#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "oscilla/field.hpp"

namespace oscilla {

/// Reference sets, all of unit diameter scale and centered at the origin:
/// interval (-1/2, 1/2); axis_box and rotated_square the cube (-1/2, 1/2)^2;
/// ball of radius 1/2; diamond {|x| + |y| < 1/2}.
enum class ShapeKind { interval, axis_box, rotated_square, ball, diamond };

std::string shape_name(ShapeKind s);
ShapeKind parse_shape(const std::string& name);
/// Whether placements of this shape may carry an orientation.
bool shape_rotates(ShapeKind s);

/// Realized window x0 + side * R_angle D.
struct WindowSpec {
  ShapeKind shape = ShapeKind::interval;
  int dim = 1;
  Point center{0.0, 0.0};
  double side = 0.0;
  double angle = 0.0;

  /// Vertices of the realized polygon (squares, diamonds); empty for balls and intervals.
  std::vector<Point> corners() const;
  /// Axis-aligned bounding box of the realized set.
  BoxDomain bounding_box() const;
  bool inside(const BoxDomain& domain, double tol = 1e-9) const;
  double volume() const;
  /// True when the realized set is an axis-aligned box (quadrature takes the exact path).
  bool axis_aligned() const;
};

/// P(x) = sum_alpha coefficients[k] * (x - center)^alpha[k], |alpha| <= degree.
struct PolynomialRep {
  Point center{0.0, 0.0};
  int dim = 1;
  int degree = 0;
  std::vector<MultiIndex> alphas;
  std::vector<double> coefficients;

  double operator()(const Point& x) const;
};

/// All multi-indices with |alpha| <= degree in dimension dim, graded order.
std::vector<MultiIndex> multi_indices(int dim, int degree);

/// Quadrature rule for one window: node offsets x - x0, weights summing to 1,
/// and for each node a fixed number of (cell, weight) taps that interpolate a
/// grid function at the node.
struct WindowStencil {
  std::vector<Point> offsets;
  std::vector<double> weights;
  int taps_per_node = 1;
  std::vector<std::uint32_t> tap_index;
  std::vector<double> tap_weight;

  std::size_t size() const { return weights.size(); }
  /// Interpolated value of `grid` at node k.
  double at(const double* grid, std::size_t k) const {
    const std::size_t base = k * taps_per_node;
    double v = 0.0;
    for (int t = 0; t < taps_per_node; ++t) v += tap_weight[base + t] * grid[tap_index[base + t]];
    return v;
  }
};

/// Side of the reference grid used for rotated windows (rounded to even, >= 4).
int rotated_quadrature_nodes(double side, double h, int cap = 32);

/// Builds the quadrature rule; throws ValidationError when the window leaves
/// the domain or is narrower than two cells.
WindowStencil build_stencil(const ScalarField& u, const WindowSpec& w);

/// Evaluates window integrals of a fixed field, caching derivative grids.
/// Derivatives come from the analytic source when it supports them, otherwise
/// from central differences. Safe to share between threads.
class WindowEvaluator {
 public:
  explicit WindowEvaluator(const ScalarField& u);

  const ScalarField& field() const { return u_; }
  /// Grid of D^alpha u at cell centers.
  const std::vector<double>& derivative_grid(const MultiIndex& alpha) const;

  double average(const WindowSpec& w, const MultiIndex& alpha = {0, 0}) const;
  PolynomialRep fit(const WindowSpec& w, int m) const;
  double oscillation(const WindowSpec& w, int m) const;
  double oscillation(const WindowSpec& w, const WindowStencil& s, int m) const;

 private:
  PolynomialRep fit(const WindowSpec& w, const WindowStencil& s, int m) const;

  const ScalarField& u_;
  mutable std::mutex mutex_;
  mutable std::map<MultiIndex, std::shared_ptr<const std::vector<double>>> cache_;
};

double window_average(const ScalarField& u, const WindowSpec& w, const MultiIndex& alpha = {0, 0});
PolynomialRep fit_polynomial(const ScalarField& u, const WindowSpec& w, int m);
double window_oscillation(const ScalarField& u, const WindowSpec& w, int m);

}  // namespace oscilla
