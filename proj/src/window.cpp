#include "oscilla/window.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oscilla/error.hpp"

namespace oscilla {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

Point rotate(const Point& s, double angle) {
  const double c = std::cos(angle), sn = std::sin(angle);
  return {c * s[0] - sn * s[1], sn * s[0] + c * s[1]};
}

// angle reduced into [0, period)
double reduce_angle(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0.0) r += period;
  return r;
}

bool near_multiple(double angle, double period, double offset) {
  const double r = reduce_angle(angle - offset, period);
  return r < 1e-12 || period - r < 1e-12;
}

double power(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

double monomial(const Point& d, const MultiIndex& a) { return power(d[0], a[0]) * power(d[1], a[1]); }

// Half-width of the realized set along each axis when it is an axis-aligned box.
double axis_half_width(const WindowSpec& w) {
  if (w.shape == ShapeKind::diamond) return 0.5 * w.side / std::numbers::sqrt2;
  return 0.5 * w.side;
}

}  // namespace

std::string shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::interval: return "interval";
    case ShapeKind::axis_box: return "axis_box";
    case ShapeKind::rotated_square: return "rotated_square";
    case ShapeKind::ball: return "ball";
    case ShapeKind::diamond: return "diamond";
  }
  return "unknown";
}

ShapeKind parse_shape(const std::string& name) {
  if (name == "interval") return ShapeKind::interval;
  if (name == "axis_box" || name == "box" || name == "cube") return ShapeKind::axis_box;
  if (name == "rotated_square" || name == "rotated") return ShapeKind::rotated_square;
  if (name == "ball" || name == "disk") return ShapeKind::ball;
  if (name == "diamond") return ShapeKind::diamond;
  throw ValidationError("unknown window shape: " + name);
}

bool shape_rotates(ShapeKind s) { return s == ShapeKind::rotated_square || s == ShapeKind::diamond; }

// --- WindowSpec ---------------------------------------------------------------

std::vector<Point> WindowSpec::corners() const {
  std::vector<Point> ref;
  if (dim == 2 && (shape == ShapeKind::axis_box || shape == ShapeKind::rotated_square)) {
    ref = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  } else if (dim == 2 && shape == ShapeKind::diamond) {
    ref = {{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.0, -0.5}};
  }
  const double a = shape == ShapeKind::axis_box ? 0.0 : angle;
  for (auto& p : ref) {
    const Point r = rotate(p, a);
    p = {center[0] + side * r[0], center[1] + side * r[1]};
  }
  return ref;
}

BoxDomain WindowSpec::bounding_box() const {
  BoxDomain b;
  b.dim = dim;
  const auto cs = corners();
  if (cs.empty()) {
    for (int a = 0; a < dim; ++a) {
      b.lower[a] = center[a] - 0.5 * side;
      b.upper[a] = center[a] + 0.5 * side;
    }
    return b;
  }
  b.lower = {cs[0][0], cs[0][1]};
  b.upper = b.lower;
  for (const auto& p : cs) {
    for (int a = 0; a < 2; ++a) {
      b.lower[a] = std::min(b.lower[a], p[a]);
      b.upper[a] = std::max(b.upper[a], p[a]);
    }
  }
  return b;
}

bool WindowSpec::inside(const BoxDomain& domain, double tol) const {
  return domain.contains(bounding_box(), tol * std::max(1.0, side));
}

double WindowSpec::volume() const {
  if (dim == 1) return side;
  switch (shape) {
    case ShapeKind::ball: return 0.25 * kPi * side * side;
    case ShapeKind::diamond: return 0.5 * side * side;
    default: return side * side;
  }
}

bool WindowSpec::axis_aligned() const {
  if (dim == 1) return true;
  switch (shape) {
    case ShapeKind::interval:
    case ShapeKind::axis_box: return true;
    case ShapeKind::rotated_square: return near_multiple(angle, 0.5 * kPi, 0.0);
    case ShapeKind::diamond: return near_multiple(angle, 0.5 * kPi, 0.25 * kPi);
    case ShapeKind::ball: return false;
  }
  return false;
}

// --- polynomials ----------------------------------------------------------------

std::vector<MultiIndex> multi_indices(int dim, int degree) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= degree; ++d) {
    if (dim == 1) {
      out.push_back({d, 0});
    } else {
      for (int a = d; a >= 0; --a) out.push_back({a, d - a});
    }
  }
  return out;
}

double PolynomialRep::operator()(const Point& x) const {
  const Point d{x[0] - center[0], dim > 1 ? x[1] - center[1] : 0.0};
  double v = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) v += coefficients[k] * monomial(d, alphas[k]);
  return v;
}

// --- quadrature -------------------------------------------------------------------

int rotated_quadrature_nodes(double side, double h, int cap) {
  int n = static_cast<int>(std::ceil(side / h - 1e-9));
  n = std::max(4, std::min(n, cap));
  if (n % 2) ++n;
  return n;
}

namespace {

void check_window(const ScalarField& u, const WindowSpec& w) {
  require(w.dim == u.dim(), "window dimension does not match the field");
  require(std::isfinite(w.side) && w.side > 0.0, "window side must be positive");
  require(std::isfinite(w.center[0]) && std::isfinite(w.center[1]) && std::isfinite(w.angle),
          "window placement must be finite");
  if (w.dim == 2) require(w.shape != ShapeKind::interval, "interval windows need a 1D field");
  for (int a = 0; a < u.dim(); ++a) {
    if (w.side < 2.0 * u.spacing(a) * (1.0 - 1e-9)) {
      throw ValidationError("window too small for grid: side " + std::to_string(w.side) +
                            " < 2h = " + std::to_string(2.0 * u.spacing(a)));
    }
  }
  if (!w.inside(u.domain())) throw ValidationError("window outside domain");
}

struct AxisWeights {
  int first = 0;
  std::vector<double> w;
};

// fractional overlap of [c - r, c + r] with each cell along one axis
AxisWeights axis_weights(double c, double r, double lo, double h, int n) {
  AxisWeights out;
  const double a = (c - r - lo) / h;
  const double b = (c + r - lo) / h;
  out.first = std::clamp(static_cast<int>(std::floor(a + 1e-12)), 0, n - 1);
  const int last = std::clamp(static_cast<int>(std::ceil(b - 1e-12)) - 1, 0, n - 1);
  for (int i = out.first; i <= last; ++i) {
    const double ov = std::min(b, i + 1.0) - std::max(a, static_cast<double>(i));
    out.w.push_back(std::max(0.0, ov));
  }
  return out;
}

void push_cell(WindowStencil& s, const ScalarField& u, int i, int j, double weight, const Point& center) {
  const Point c = u.cell_center(i, j);
  s.offsets.push_back({c[0] - center[0], u.dim() > 1 ? c[1] - center[1] : 0.0});
  s.weights.push_back(weight);
  s.tap_index.push_back(static_cast<std::uint32_t>(u.index(i, j)));
  s.tap_weight.push_back(1.0);
}

void normalize(WindowStencil& s) {
  double total = 0.0;
  for (double w : s.weights) total += w;
  require(total > 0.0, "window covers no grid cells");
  for (double& w : s.weights) w /= total;
}

WindowStencil axis_stencil(const ScalarField& u, const WindowSpec& w) {
  WindowStencil s;
  const double r = axis_half_width(w);
  const auto& dom = u.domain();
  const auto wx = axis_weights(w.center[0], r, dom.lower[0], u.spacing(0), u.nx());
  if (u.dim() == 1) {
    for (std::size_t k = 0; k < wx.w.size(); ++k) {
      if (wx.w[k] > 1e-14) push_cell(s, u, wx.first + static_cast<int>(k), 0, wx.w[k], w.center);
    }
  } else {
    const auto wy = axis_weights(w.center[1], r, dom.lower[1], u.spacing(1), u.ny());
    for (std::size_t l = 0; l < wy.w.size(); ++l) {
      for (std::size_t k = 0; k < wx.w.size(); ++k) {
        const double weight = wx.w[k] * wy.w[l];
        if (weight > 1e-14) {
          push_cell(s, u, wx.first + static_cast<int>(k), wy.first + static_cast<int>(l), weight, w.center);
        }
      }
    }
  }
  normalize(s);
  return s;
}

bool in_reference(const WindowSpec& w, const Point& d) {
  // d is the offset from the center in world coordinates
  const Point s = rotate(d, -w.angle);
  const double x = s[0] / w.side, y = s[1] / w.side;
  if (w.shape == ShapeKind::ball) return x * x + y * y < 0.25;
  return std::abs(x) + std::abs(y) < 0.5;
}

// ball / diamond: cell-center nodes with 4x4 sub-sampled coverage weights
WindowStencil subsampled_stencil(const ScalarField& u, const WindowSpec& w) {
  WindowStencil s;
  const auto bb = w.bounding_box();
  const auto& dom = u.domain();
  const double hx = u.spacing(0), hy = u.spacing(1);
  const int i0 = std::clamp(static_cast<int>(std::floor((bb.lower[0] - dom.lower[0]) / hx)), 0, u.nx() - 1);
  const int i1 = std::clamp(static_cast<int>(std::ceil((bb.upper[0] - dom.lower[0]) / hx)) - 1, 0, u.nx() - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor((bb.lower[1] - dom.lower[1]) / hy)), 0, u.ny() - 1);
  const int j1 = std::clamp(static_cast<int>(std::ceil((bb.upper[1] - dom.lower[1]) / hy)) - 1, 0, u.ny() - 1);
  constexpr int kSub = 4;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      int hits = 0;
      for (int b = 0; b < kSub; ++b) {
        for (int a = 0; a < kSub; ++a) {
          const Point p{dom.lower[0] + (i + (a + 0.5) / kSub) * hx, dom.lower[1] + (j + (b + 0.5) / kSub) * hy};
          hits += in_reference(w, {p[0] - w.center[0], p[1] - w.center[1]});
        }
      }
      if (hits > 0) push_cell(s, u, i, j, hits / double(kSub * kSub), w.center);
    }
  }
  normalize(s);
  return s;
}

// rotated square: reference midpoint grid mapped into the window, bilinear taps
WindowStencil rotated_stencil(const ScalarField& u, const WindowSpec& w) {
  WindowStencil s;
  const double hmin = std::min(u.spacing(0), u.spacing(1));
  const int nq = rotated_quadrature_nodes(w.side, hmin);
  const std::size_t count = static_cast<std::size_t>(nq) * nq;
  s.taps_per_node = 4;
  s.offsets.reserve(count);
  s.weights.assign(count, 1.0 / static_cast<double>(count));
  s.tap_index.reserve(4 * count);
  s.tap_weight.reserve(4 * count);
  const auto& dom = u.domain();
  const double c = std::cos(w.angle), sn = std::sin(w.angle);
  for (int b = 0; b < nq; ++b) {
    for (int a = 0; a < nq; ++a) {
      const double sx = ((a + 0.5) / nq - 0.5) * w.side;
      const double sy = ((b + 0.5) / nq - 0.5) * w.side;
      const Point d{c * sx - sn * sy, sn * sx + c * sy};
      s.offsets.push_back(d);
      const double fx = (w.center[0] + d[0] - dom.lower[0]) / u.spacing(0) - 0.5;
      const double fy = (w.center[1] + d[1] - dom.lower[1]) / u.spacing(1) - 0.5;
      const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, u.nx() - 2);
      const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, u.ny() - 2);
      const double tx = fx - ix, ty = fy - iy;
      s.tap_index.push_back(static_cast<std::uint32_t>(u.index(ix, iy)));
      s.tap_index.push_back(static_cast<std::uint32_t>(u.index(ix + 1, iy)));
      s.tap_index.push_back(static_cast<std::uint32_t>(u.index(ix, iy + 1)));
      s.tap_index.push_back(static_cast<std::uint32_t>(u.index(ix + 1, iy + 1)));
      s.tap_weight.push_back((1 - tx) * (1 - ty));
      s.tap_weight.push_back(tx * (1 - ty));
      s.tap_weight.push_back((1 - tx) * ty);
      s.tap_weight.push_back(tx * ty);
    }
  }
  return s;
}

// D^k along one axis by central differences, stencil shifted inward at the ends
std::vector<double> differentiate_axis(const std::vector<double>& g, int nx, int ny, int axis, int order, double h) {
  std::vector<double> cur = g;
  const int n = axis == 0 ? nx : ny;
  const auto at = [&](const std::vector<double>& v, int i, int j) { return v[i + static_cast<std::size_t>(nx) * j]; };
  require(n > order, "grid too coarse for the requested derivative");
  while (order > 0) {
    const int step = order >= 2 ? 2 : 1;
    require(n > step, "grid too coarse for the requested derivative");
    std::vector<double> next(cur.size());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int idx = axis == 0 ? i : j;
        const auto val = [&](int k) { return axis == 0 ? at(cur, k, j) : at(cur, i, k); };
        double d;
        if (step == 2) {
          const int c = std::clamp(idx, 1, n - 2);
          d = (val(c + 1) - 2.0 * val(c) + val(c - 1)) / (h * h);
        } else if (idx == 0) {
          d = (val(1) - val(0)) / h;
        } else if (idx == n - 1) {
          d = (val(n - 1) - val(n - 2)) / h;
        } else {
          d = (val(idx + 1) - val(idx - 1)) / (2.0 * h);
        }
        next[i + static_cast<std::size_t>(nx) * j] = d;
      }
    }
    cur = std::move(next);
    order -= step;
  }
  return cur;
}

}  // namespace

WindowStencil build_stencil(const ScalarField& u, const WindowSpec& w) {
  check_window(u, w);
  if (w.axis_aligned()) return axis_stencil(u, w);
  if (w.shape == ShapeKind::rotated_square) return rotated_stencil(u, w);
  return subsampled_stencil(u, w);
}

// --- evaluator --------------------------------------------------------------------

WindowEvaluator::WindowEvaluator(const ScalarField& u) : u_(u) {}

const std::vector<double>& WindowEvaluator::derivative_grid(const MultiIndex& alpha) const {
  const MultiIndex key{alpha[0], u_.dim() > 1 ? alpha[1] : 0};
  require(key[0] >= 0 && key[1] >= 0, "derivative multi-index must be nonnegative");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  std::vector<double> grid;
  const int order = key[0] + key[1];
  if (order == 0) {
    grid.assign(u_.samples().begin(), u_.samples().end());
  } else if (u_.source() && u_.source()->derivative_order_supported() >= order) {
    grid.resize(u_.size());
    for (int j = 0; j < u_.ny(); ++j) {
      for (int i = 0; i < u_.nx(); ++i) grid[u_.index(i, j)] = u_.source()->derivative(u_.cell_center(i, j), key, u_.dim());
    }
  } else {
    grid.assign(u_.samples().begin(), u_.samples().end());
    if (key[0] > 0) grid = differentiate_axis(grid, u_.nx(), u_.ny(), 0, key[0], u_.spacing(0));
    if (key[1] > 0) grid = differentiate_axis(grid, u_.nx(), u_.ny(), 1, key[1], u_.spacing(1));
  }
  auto ptr = std::make_shared<const std::vector<double>>(std::move(grid));
  cache_.emplace(key, ptr);
  return *ptr;
}

double WindowEvaluator::average(const WindowSpec& w, const MultiIndex& alpha) const {
  const auto s = build_stencil(u_, w);
  const double* g = derivative_grid(alpha).data();
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += s.weights[k] * s.at(g, k);
  return acc;
}

PolynomialRep WindowEvaluator::fit(const WindowSpec& w, int m) const {
  return fit(w, build_stencil(u_, w), m);
}

PolynomialRep WindowEvaluator::fit(const WindowSpec& w, const WindowStencil& s, int m) const {
  require(m >= 1, "polynomial order m must be >= 1");
  PolynomialRep p;
  p.center = w.center;
  p.dim = u_.dim();
  p.degree = m - 1;
  p.alphas = multi_indices(p.dim, p.degree);
  const std::size_t na = p.alphas.size();

  std::vector<double> avg(na, 0.0), moment(na, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    const double* g = derivative_grid(p.alphas[a]).data();
    double acc = 0.0, mom = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      acc += s.weights[k] * s.at(g, k);
      if (m > 1) mom += s.weights[k] * monomial(s.offsets[k], p.alphas[a]);
    }
    avg[a] = acc;
    moment[a] = a == 0 ? 1.0 : mom;
  }
  const auto index_of = [&](const MultiIndex& g) {
    for (std::size_t k = 0; k < na; ++k) {
      if (p.alphas[k] == g) return k;
    }
    return na;
  };
  // Taylor coefficients c_alpha, highest degree first:
  // fint D^beta u = sum_{alpha >= beta} c_alpha mu_{alpha-beta} / (alpha-beta)!
  std::vector<double> c(na, 0.0);
  for (std::size_t b = na; b-- > 0;) {
    const MultiIndex& beta = p.alphas[b];
    double v = avg[b];
    for (std::size_t a = b + 1; a < na; ++a) {
      const MultiIndex& alpha = p.alphas[a];
      if (alpha[0] < beta[0] || alpha[1] < beta[1]) continue;
      const MultiIndex g{alpha[0] - beta[0], alpha[1] - beta[1]};
      v -= c[a] * moment[index_of(g)] / (factorial(g[0]) * factorial(g[1]));
    }
    c[b] = v;
  }
  p.coefficients.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    p.coefficients[a] = c[a] / (factorial(p.alphas[a][0]) * factorial(p.alphas[a][1]));
  }
  return p;
}

double WindowEvaluator::oscillation(const WindowSpec& w, int m) const {
  return oscillation(w, build_stencil(u_, w), m);
}

double WindowEvaluator::oscillation(const WindowSpec& w, const WindowStencil& s, int m) const {
  const double* g = derivative_grid({0, 0}).data();
  if (m == 1) {
    double mean = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) mean += s.weights[k] * s.at(g, k);
    double dev = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) dev += s.weights[k] * std::abs(s.at(g, k) - mean);
    return dev;
  }
  const auto p = fit(w, s, m);
  double dev = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    double pk = 0.0;
    for (std::size_t a = 0; a < p.alphas.size(); ++a) pk += p.coefficients[a] * monomial(s.offsets[k], p.alphas[a]);
    dev += s.weights[k] * std::abs(s.at(g, k) - pk);
  }
  return dev;
}

double window_average(const ScalarField& u, const WindowSpec& w, const MultiIndex& alpha) {
  return WindowEvaluator(u).average(w, alpha);
}

PolynomialRep fit_polynomial(const ScalarField& u, const WindowSpec& w, int m) {
  return WindowEvaluator(u).fit(w, m);
}

double window_oscillation(const ScalarField& u, const WindowSpec& w, int m) {
  return WindowEvaluator(u).oscillation(w, m);
}

}  // namespace oscilla
