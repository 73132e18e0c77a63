#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace oscilla {

using Point = std::array<double, 2>;
using MultiIndex = std::array<int, 2>;
using Resolution = std::array<int, 2>;

/// Axis-aligned box (lower, upper) in one or two dimensions. Unused second
/// coordinates are ignored when dim == 1.
struct BoxDomain {
  int dim = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 1.0};

  static BoxDomain interval(double a, double b);
  static BoxDomain rectangle(Point lo, Point hi);
  /// The unit cube (-1/2, 1/2)^dim.
  static BoxDomain unit_cube(int dim);

  double extent(int axis) const { return upper[axis] - lower[axis]; }
  double volume() const;
  void validate() const;
  bool contains(const Point& p, double tol = 0.0) const;
  bool contains(const BoxDomain& other, double tol = 0.0) const;
  bool operator==(const BoxDomain&) const = default;
};

// --- analytic sources -------------------------------------------------------

struct LinearSource {
  Point normal{1.0, 0.0};  // unit vector
  double offset = 0.0;
};

/// Sum of c_alpha * x^alpha (monomials about the origin).
struct PolynomialSource {
  std::vector<std::pair<MultiIndex, double>> terms;
};

/// amplitude * prod_{axis < dim} sin(2*pi*frequency[axis]*x[axis] + phase[axis]).
/// A factor with zero frequency is the constant sin(phase).
struct SinusoidMode {
  double amplitude = 1.0;
  Point frequency{1.0, 0.0};
  Point phase{0.0, 0.0};
};

struct SinusoidSource {
  std::vector<SinusoidMode> modes;
};

/// low where normal.x <= threshold, high elsewhere.
struct StepSource {
  Point normal{1.0, 0.0};
  double threshold = 0.0;
  double low = 0.0;
  double high = 1.0;
};

struct CantorVitaliSource {
  int depth = 40;
};

/// Closed-form function with exact derivatives where they exist.
class AnalyticSource {
 public:
  using Kind = std::variant<LinearSource, PolynomialSource, SinusoidSource, StepSource,
                            CantorVitaliSource>;

  explicit AnalyticSource(Kind kind);

  static AnalyticSource linear(Point normal, double offset = 0.0);
  static AnalyticSource polynomial(std::vector<std::pair<MultiIndex, double>> terms);
  static AnalyticSource sinusoid(std::vector<SinusoidMode> modes);
  static AnalyticSource step(Point normal, double threshold, double low = 0.0, double high = 1.0);
  static AnalyticSource cantor_vitali(int depth = 40);

  const Kind& kind() const { return kind_; }
  std::string kind_name() const;

  double value(const Point& x, int dim) const;
  /// D^alpha at x. Throws ValidationError when |alpha| exceeds derivative_order_supported().
  double derivative(const Point& x, const MultiIndex& alpha, int dim) const;
  /// Highest derivative order available in closed form (0 for step / Cantor).
  int derivative_order_supported() const;
  /// Throws if this source cannot be sampled on the domain.
  void check_domain(const BoxDomain& domain) const;

  nlohmann::json to_json() const;
  static AnalyticSource from_json(const nlohmann::json& j);

 private:
  Kind kind_;
};

/// Cantor-Vitali function by base-3 digit recursion truncated at `depth`.
double cantor_vitali(double x, int depth = 40);

// --- sampled fields -----------------------------------------------------------

/// Cell-centered samples of a function on a uniform grid over a box. Immutable.
/// Sample (i, j) sits at lower + (i + 1/2, j + 1/2) * h and is stored at i + nx * j.
class ScalarField {
 public:
  ScalarField(BoxDomain domain, Resolution resolution, std::vector<double> samples,
              std::optional<AnalyticSource> source = std::nullopt);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  const Resolution& resolution() const { return resolution_; }
  int nx() const { return resolution_[0]; }
  int ny() const { return resolution_[1]; }
  std::size_t size() const { return samples_.size(); }
  double spacing(int axis) const { return spacing_[axis]; }
  double cell_volume() const;
  Point cell_center(int i, int j = 0) const;
  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx()) * j; }
  double operator()(int i, int j = 0) const { return samples_[index(i, j)]; }
  std::span<const double> samples() const { return samples_; }
  const std::optional<AnalyticSource>& source() const { return source_; }

  bool same_grid(const ScalarField& other) const;
  /// Same grid, new samples, analytic source dropped.
  ScalarField with_samples(std::vector<double> samples) const;
  double max_abs() const;

 private:
  BoxDomain domain_;
  Resolution resolution_;
  Point spacing_;
  std::vector<double> samples_;
  std::optional<AnalyticSource> source_;
};

ScalarField sample(const AnalyticSource& source, const BoxDomain& domain, Resolution resolution);
ScalarField sample(const AnalyticSource& source, const BoxDomain& domain, int resolution);
ScalarField constant_field(const BoxDomain& domain, Resolution resolution, double value);
/// a*u + b*v on a shared grid.
ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& v);

/// Standard bump c*exp(-1/(1-|x|^2)) on |x| < 1, scaled to radius sigma.
struct Mollifier {
  double sigma = 0.0;

  /// Unnormalized radial profile at r/sigma.
  static double profile(double t);
  /// Discrete weights on the grid offsets of `like`, normalized to unit sum.
  /// Returned row-major over offsets [-rx, rx] x [-ry, ry].
  std::vector<double> discrete_kernel(const ScalarField& like, int& rx, int& ry) const;
};

/// Discrete convolution with the mollifier, restricted to the cells lying in
/// `inner`. `inner` must sit at distance >= sigma from the boundary.
ScalarField mollify(const ScalarField& u, const Mollifier& m, const BoxDomain& inner);

/// Full truncation T_k: clamp to [-k, k].
ScalarField truncate(const ScalarField& u, double k);

/// sum_cells |D^m u|_F * h^n with m-fold forward differences; the stencil is
/// shifted back on the last m cells of each axis.
double discrete_variation(const ScalarField& u, int order);

/// Per-cell forward-difference gradient with the same boundary fallback.
std::vector<Point> discrete_gradient(const ScalarField& u);

/// (sum |u - v|^q h^n)^(1/q)
double lq_distance(const ScalarField& u, const ScalarField& v, double q);
/// (sum |u|^q h^n)^(1/q)
double lq_norm(const ScalarField& u, double q);

}  // namespace oscilla
