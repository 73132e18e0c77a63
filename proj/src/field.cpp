#include "oscilla/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "oscilla/error.hpp"

namespace oscilla {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// d^k/dx^k x^p evaluated at x
double monomial_derivative(double x, int p, int k) {
  if (k > p) return 0.0;
  double c = 1.0;
  for (int t = 0; t < k; ++t) c *= (p - t);
  return c * std::pow(x, p - k);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// --- BoxDomain ----------------------------------------------------------------

BoxDomain BoxDomain::interval(double a, double b) {
  BoxDomain d{1, {a, 0.0}, {b, 1.0}};
  d.validate();
  return d;
}

BoxDomain BoxDomain::rectangle(Point lo, Point hi) {
  BoxDomain d{2, lo, hi};
  d.validate();
  return d;
}

BoxDomain BoxDomain::unit_cube(int dim) {
  return dim == 1 ? interval(-0.5, 0.5) : rectangle({-0.5, -0.5}, {0.5, 0.5});
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent(a);
  return v;
}

void BoxDomain::validate() const {
  require(dim == 1 || dim == 2, "domain dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    require(std::isfinite(lower[a]) && std::isfinite(upper[a]), "domain bounds must be finite");
    require(upper[a] > lower[a], "domain upper bound must exceed lower bound");
  }
}

bool BoxDomain::contains(const Point& p, double tol) const {
  for (int a = 0; a < dim; ++a) {
    if (p[a] < lower[a] - tol || p[a] > upper[a] + tol) return false;
  }
  return true;
}

bool BoxDomain::contains(const BoxDomain& other, double tol) const {
  if (other.dim != dim) return false;
  for (int a = 0; a < dim; ++a) {
    if (other.lower[a] < lower[a] - tol || other.upper[a] > upper[a] + tol) return false;
  }
  return true;
}

// --- Cantor-Vitali -------------------------------------------------------------

double cantor_vitali(double x, int depth) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double result = 0.0;
  double scale = 0.5;
  for (int k = 0; k < depth; ++k) {
    x *= 3.0;
    const int digit = x >= 2.0 ? 2 : (x >= 1.0 ? 1 : 0);
    x -= digit;
    if (digit == 1) return result + scale;
    if (digit == 2) result += scale;
    scale *= 0.5;
  }
  return result;
}

// --- AnalyticSource --------------------------------------------------------------

AnalyticSource::AnalyticSource(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const LinearSource& s) {
                   const double norm = std::hypot(s.normal[0], s.normal[1]);
                   require(std::abs(norm - 1.0) < 1e-12, "linear source normal must be a unit vector");
                 },
                 [](const PolynomialSource& s) {
                   for (const auto& [alpha, c] : s.terms) {
                     require(alpha[0] >= 0 && alpha[1] >= 0, "polynomial exponents must be nonnegative");
                     require(std::isfinite(c), "polynomial coefficient must be finite");
                   }
                 },
                 [](const SinusoidSource& s) { require(!s.modes.empty(), "sinusoid needs at least one mode"); },
                 [](const StepSource& s) {
                   require(std::hypot(s.normal[0], s.normal[1]) > 0.0, "step normal must be nonzero");
                 },
                 [](const CantorVitaliSource& s) { require(s.depth >= 1, "cantor_vitali depth must be >= 1"); },
             },
             kind_);
}

AnalyticSource AnalyticSource::linear(Point normal, double offset) {
  return AnalyticSource(LinearSource{normal, offset});
}
AnalyticSource AnalyticSource::polynomial(std::vector<std::pair<MultiIndex, double>> terms) {
  return AnalyticSource(PolynomialSource{std::move(terms)});
}
AnalyticSource AnalyticSource::sinusoid(std::vector<SinusoidMode> modes) {
  return AnalyticSource(SinusoidSource{std::move(modes)});
}
AnalyticSource AnalyticSource::step(Point normal, double threshold, double low, double high) {
  return AnalyticSource(StepSource{normal, threshold, low, high});
}
AnalyticSource AnalyticSource::cantor_vitali(int depth) { return AnalyticSource(CantorVitaliSource{depth}); }

std::string AnalyticSource::kind_name() const {
  return std::visit(overloaded{
                        [](const LinearSource&) { return std::string("linear"); },
                        [](const PolynomialSource&) { return std::string("polynomial"); },
                        [](const SinusoidSource&) { return std::string("sinusoid"); },
                        [](const StepSource&) { return std::string("step"); },
                        [](const CantorVitaliSource&) { return std::string("cantor_vitali"); },
                    },
                    kind_);
}

double AnalyticSource::value(const Point& x, int dim) const {
  return derivative(x, {0, 0}, dim);
}

double AnalyticSource::derivative(const Point& x, const MultiIndex& alpha, int dim) const {
  const int order = alpha[0] + (dim > 1 ? alpha[1] : 0);
  if (order > derivative_order_supported()) {
    throw ValidationError(kind_name() + " source has no closed-form derivative of order " + std::to_string(order));
  }
  return std::visit(
      overloaded{
          [&](const LinearSource& s) {
            if (order == 0) {
              double v = s.offset;
              for (int a = 0; a < dim; ++a) v += s.normal[a] * x[a];
              return v;
            }
            if (order == 1) return alpha[0] == 1 ? s.normal[0] : s.normal[1];
            return 0.0;
          },
          [&](const PolynomialSource& s) {
            double v = 0.0;
            for (const auto& [beta, c] : s.terms) {
              double term = c * monomial_derivative(x[0], beta[0], alpha[0]);
              if (dim > 1) term *= monomial_derivative(x[1], beta[1], alpha[1]);
              v += term;
            }
            return v;
          },
          [&](const SinusoidSource& s) {
            double v = 0.0;
            for (const auto& mode : s.modes) {
              double term = mode.amplitude;
              for (int a = 0; a < dim; ++a) {
                const double w = kTwoPi * mode.frequency[a];
                const int k = alpha[a];
                term *= std::pow(w, k) * std::sin(w * x[a] + mode.phase[a] + 0.5 * std::numbers::pi * k);
              }
              v += term;
            }
            return v;
          },
          [&](const StepSource& s) {
            double proj = 0.0;
            for (int a = 0; a < dim; ++a) proj += s.normal[a] * x[a];
            return proj > s.threshold ? s.high : s.low;
          },
          [&](const CantorVitaliSource& s) { return oscilla::cantor_vitali(x[0], s.depth); },
      },
      kind_);
}

int AnalyticSource::derivative_order_supported() const {
  return std::visit(overloaded{
                        [](const StepSource&) { return 0; },
                        [](const CantorVitaliSource&) { return 0; },
                        [](const auto&) { return 64; },
                    },
                    kind_);
}

void AnalyticSource::check_domain(const BoxDomain& domain) const {
  domain.validate();
  std::visit(overloaded{
                 [&](const CantorVitaliSource&) {
                   require(domain.dim == 1, "cantor_vitali is defined in one dimension only");
                   require(domain.lower[0] >= 0.0 && domain.upper[0] <= 1.0,
                           "cantor_vitali is defined on [0, 1]");
                 },
                 [&](const PolynomialSource& s) {
                   if (domain.dim == 1) {
                     for (const auto& [alpha, c] : s.terms) {
                       require(alpha[1] == 0 || c == 0.0, "polynomial uses x2 on a 1D domain");
                     }
                   }
                 },
                 [&](const LinearSource& s) {
                   if (domain.dim == 1) require(s.normal[1] == 0.0, "linear normal has a second component on a 1D domain");
                 },
                 [](const auto&) {},
             },
             kind_);
}

nlohmann::json AnalyticSource::to_json() const {
  using nlohmann::json;
  return std::visit(
      overloaded{
          [](const LinearSource& s) {
            return json{{"kind", "linear"}, {"normal", s.normal}, {"offset", s.offset}};
          },
          [](const PolynomialSource& s) {
            json terms = json::array();
            for (const auto& [alpha, c] : s.terms) terms.push_back({{"alpha", alpha}, {"coef", c}});
            return json{{"kind", "polynomial"}, {"terms", terms}};
          },
          [](const SinusoidSource& s) {
            json modes = json::array();
            for (const auto& m : s.modes) {
              modes.push_back({{"amplitude", m.amplitude}, {"frequency", m.frequency}, {"phase", m.phase}});
            }
            return json{{"kind", "sinusoid"}, {"modes", modes}};
          },
          [](const StepSource& s) {
            return json{{"kind", "step"}, {"normal", s.normal}, {"threshold", s.threshold},
                        {"low", s.low}, {"high", s.high}};
          },
          [](const CantorVitaliSource& s) { return json{{"kind", "cantor_vitali"}, {"depth", s.depth}}; },
      },
      kind_);
}

AnalyticSource AnalyticSource::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return linear(j.at("normal").get<Point>(), j.value("offset", 0.0));
  if (kind == "polynomial") {
    std::vector<std::pair<MultiIndex, double>> terms;
    for (const auto& t : j.at("terms")) terms.emplace_back(t.at("alpha").get<MultiIndex>(), t.at("coef").get<double>());
    return polynomial(std::move(terms));
  }
  if (kind == "sinusoid") {
    std::vector<SinusoidMode> modes;
    for (const auto& m : j.at("modes")) {
      modes.push_back({m.value("amplitude", 1.0), m.at("frequency").get<Point>(), m.value("phase", Point{0.0, 0.0})});
    }
    return sinusoid(std::move(modes));
  }
  if (kind == "step") {
    return step(j.at("normal").get<Point>(), j.value("threshold", 0.0), j.value("low", 0.0), j.value("high", 1.0));
  }
  if (kind == "cantor_vitali") return cantor_vitali(j.value("depth", 40));
  throw ValidationError("unsupported analytic source kind: " + kind);
}

// --- ScalarField -------------------------------------------------------------------

ScalarField::ScalarField(BoxDomain domain, Resolution resolution, std::vector<double> samples,
                         std::optional<AnalyticSource> source)
    : domain_(domain), resolution_(resolution), samples_(std::move(samples)), source_(std::move(source)) {
  domain_.validate();
  if (domain_.dim == 1) resolution_[1] = 1;
  for (int a = 0; a < domain_.dim; ++a) require(resolution_[a] >= 1, "resolution must be positive");
  require(samples_.size() == static_cast<std::size_t>(resolution_[0]) * resolution_[1],
          "sample count must equal the product of resolutions");
  for (double v : samples_) require(std::isfinite(v), "field samples must be finite");
  spacing_ = {domain_.extent(0) / resolution_[0], domain_.dim > 1 ? domain_.extent(1) / resolution_[1] : 1.0};
}

double ScalarField::cell_volume() const { return dim() == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }

Point ScalarField::cell_center(int i, int j) const {
  return {domain_.lower[0] + (i + 0.5) * spacing_[0],
          dim() > 1 ? domain_.lower[1] + (j + 0.5) * spacing_[1] : 0.0};
}

bool ScalarField::same_grid(const ScalarField& other) const {
  if (other.dim() != dim() || other.resolution_ != resolution_) return false;
  for (int a = 0; a < dim(); ++a) {
    const double tol = 1e-12 * std::max(1.0, std::abs(domain_.extent(a)));
    if (std::abs(other.domain_.lower[a] - domain_.lower[a]) > tol) return false;
    if (std::abs(other.domain_.upper[a] - domain_.upper[a]) > tol) return false;
  }
  return true;
}

ScalarField ScalarField::with_samples(std::vector<double> samples) const {
  return ScalarField(domain_, resolution_, std::move(samples));
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField sample(const AnalyticSource& source, const BoxDomain& domain, Resolution resolution) {
  source.check_domain(domain);
  if (domain.dim == 1) resolution[1] = 1;
  for (int a = 0; a < domain.dim; ++a) require(resolution[a] >= 2, "sampling resolution must be >= 2 per axis");
  const double hx = domain.extent(0) / resolution[0];
  const double hy = domain.dim > 1 ? domain.extent(1) / resolution[1] : 1.0;
  std::vector<double> values(static_cast<std::size_t>(resolution[0]) * resolution[1]);
  for (int j = 0; j < resolution[1]; ++j) {
    for (int i = 0; i < resolution[0]; ++i) {
      const Point x{domain.lower[0] + (i + 0.5) * hx, domain.dim > 1 ? domain.lower[1] + (j + 0.5) * hy : 0.0};
      values[i + static_cast<std::size_t>(resolution[0]) * j] = source.value(x, domain.dim);
    }
  }
  return ScalarField(domain, resolution, std::move(values), source);
}

ScalarField sample(const AnalyticSource& source, const BoxDomain& domain, int resolution) {
  return sample(source, domain, Resolution{resolution, domain.dim > 1 ? resolution : 1});
}

ScalarField constant_field(const BoxDomain& domain, Resolution resolution, double value) {
  if (domain.dim == 1) resolution[1] = 1;
  return ScalarField(domain, resolution, std::vector<double>(static_cast<std::size_t>(resolution[0]) * resolution[1], value));
}

ScalarField linear_combination(double a, const ScalarField& u, double b, const ScalarField& v) {
  require(u.same_grid(v), "linear_combination: grid mismatch");
  std::vector<double> out(u.size());
  const auto us = u.samples();
  const auto vs = v.samples();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * us[k] + b * vs[k];
  return u.with_samples(std::move(out));
}

// --- mollification -----------------------------------------------------------------

double Mollifier::profile(double t) {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t2));
}

std::vector<double> Mollifier::discrete_kernel(const ScalarField& like, int& rx, int& ry) const {
  require(sigma > 0.0, "mollifier sigma must be positive");
  const double hx = like.spacing(0);
  const double hy = like.dim() > 1 ? like.spacing(1) : 1.0;
  rx = static_cast<int>(std::ceil(sigma / hx)) - 1;
  ry = like.dim() > 1 ? static_cast<int>(std::ceil(sigma / hy)) - 1 : 0;
  rx = std::max(rx, 0);
  ry = std::max(ry, 0);
  std::vector<double> w(static_cast<std::size_t>(2 * rx + 1) * (2 * ry + 1));
  double total = 0.0;
  for (int l = -ry; l <= ry; ++l) {
    for (int k = -rx; k <= rx; ++k) {
      const double r = std::hypot(k * hx, like.dim() > 1 ? l * hy : 0.0);
      const double v = profile(r / sigma);
      w[(k + rx) + static_cast<std::size_t>(2 * rx + 1) * (l + ry)] = v;
      total += v;
    }
  }
  // sigma below one cell: identity kernel
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 0.0);
    w[rx + static_cast<std::size_t>(2 * rx + 1) * ry] = 1.0;
    return w;
  }
  for (double& v : w) v /= total;
  return w;
}

ScalarField mollify(const ScalarField& u, const Mollifier& m, const BoxDomain& inner) {
  require(m.sigma > 0.0, "mollifier sigma must be positive");
  require(inner.dim == u.dim(), "inner domain dimension mismatch");
  inner.validate();
  const BoxDomain& dom = u.domain();
  for (int a = 0; a < u.dim(); ++a) {
    const double tol = 1e-12 * std::max(1.0, dom.extent(a));
    if (inner.lower[a] - m.sigma < dom.lower[a] - tol || inner.upper[a] + m.sigma > dom.upper[a] + tol) {
      std::ostringstream msg;
      msg << "mollifier sigma " << m.sigma << " too large for the requested inner domain";
      throw ValidationError(msg.str());
    }
  }
  int rx = 0, ry = 0;
  const auto kernel = m.discrete_kernel(u, rx, ry);

  std::array<int, 2> first{0, 0}, last{0, 0};
  for (int a = 0; a < 2; ++a) {
    if (a >= u.dim()) continue;
    const double h = u.spacing(a);
    const double tol = 1e-9;
    first[a] = static_cast<int>(std::ceil((inner.lower[a] - dom.lower[a]) / h - tol));
    last[a] = static_cast<int>(std::floor((inner.upper[a] - dom.lower[a]) / h + tol)) - 1;
    require(last[a] - first[a] + 1 >= 2, "inner domain must cover at least two cells per axis");
    const int r = a == 0 ? rx : ry;
    require(first[a] - r >= 0 && last[a] + r < u.resolution()[a], "mollifier sigma too large for the requested inner domain");
  }
  const int nx = last[0] - first[0] + 1;
  const int ny = u.dim() > 1 ? last[1] - first[1] + 1 : 1;
  std::vector<double> out(static_cast<std::size_t>(nx) * ny, 0.0);
  const int kw = 2 * rx + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ci = first[0] + i;
      const int cj = u.dim() > 1 ? first[1] + j : 0;
      double acc = 0.0;
      for (int l = -ry; l <= ry; ++l) {
        for (int k = -rx; k <= rx; ++k) {
          acc += kernel[(k + rx) + static_cast<std::size_t>(kw) * (l + ry)] * u(ci - k, cj - l);
        }
      }
      out[i + static_cast<std::size_t>(nx) * j] = acc;
    }
  }
  BoxDomain od = dom;
  od.lower[0] = dom.lower[0] + first[0] * u.spacing(0);
  od.upper[0] = dom.lower[0] + (last[0] + 1) * u.spacing(0);
  if (u.dim() > 1) {
    od.lower[1] = dom.lower[1] + first[1] * u.spacing(1);
    od.upper[1] = dom.lower[1] + (last[1] + 1) * u.spacing(1);
  }
  return ScalarField(od, {nx, ny}, std::move(out));
}

ScalarField truncate(const ScalarField& u, double k) {
  require(k >= 0.0 && std::isfinite(k), "truncation level must be finite and >= 0");
  std::vector<double> out(u.samples().begin(), u.samples().end());
  for (double& v : out) {
    if (v > k) v = k;
    else if (v < -k) v = -k;
  }
  return u.with_samples(std::move(out));
}

// --- discrete variation ---------------------------------------------------------------

namespace {

// m-fold forward difference along one axis starting at `start`, divided by h^m.
double forward_difference(const ScalarField& u, int axis, int order, int i, int j) {
  const int n = u.resolution()[axis];
  const int idx = axis == 0 ? i : j;
  const int start = std::min(idx, n - 1 - order);
  double acc = 0.0;
  for (int k = 0; k <= order; ++k) {
    const double c = ((order - k) % 2 == 0 ? 1.0 : -1.0) * binomial(order, k);
    acc += c * (axis == 0 ? u(start + k, j) : u(i, start + k));
  }
  return acc / std::pow(u.spacing(axis), order);
}

}  // namespace

double discrete_variation(const ScalarField& u, int order) {
  require(order >= 1, "variation order must be >= 1");
  for (int a = 0; a < u.dim(); ++a) {
    require(u.resolution()[a] > order, "grid too coarse for variation order " + std::to_string(order));
  }
  const int nx = u.nx();
  const int ny = u.ny();
  double total = 0.0;
  if (u.dim() == 1) {
    for (int i = 0; i < nx; ++i) total += std::abs(forward_difference(u, 0, order, i, 0));
    return total * u.cell_volume();
  }
  // mixed D^(a, m-a): x-differences of y-differences, both with shifted stencils
  std::vector<double> tmp(static_cast<std::size_t>(nx) * ny);
  std::vector<double> sumsq(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int a = 0; a <= order; ++a) {
    const int b = order - a;
    // y-direction first
    std::vector<double> ydiff(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        ydiff[i + static_cast<std::size_t>(nx) * j] = b == 0 ? u(i, j) : forward_difference(u, 1, b, i, j);
      }
    }
    const ScalarField yd = u.with_samples(std::move(ydiff));
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        tmp[i + static_cast<std::size_t>(nx) * j] = a == 0 ? yd(i, j) : forward_difference(yd, 0, a, i, j);
      }
    }
    const double mult = factorial(order) / (factorial(a) * factorial(b));
    for (std::size_t k = 0; k < tmp.size(); ++k) sumsq[k] += mult * tmp[k] * tmp[k];
  }
  for (double s : sumsq) total += std::sqrt(s);
  return total * u.cell_volume();
}

std::vector<Point> discrete_gradient(const ScalarField& u) {
  for (int a = 0; a < u.dim(); ++a) require(u.resolution()[a] > 1, "grid too coarse for a gradient");
  std::vector<Point> g(u.size(), Point{0.0, 0.0});
  for (int j = 0; j < u.ny(); ++j) {
    for (int i = 0; i < u.nx(); ++i) {
      Point& p = g[u.index(i, j)];
      p[0] = forward_difference(u, 0, 1, i, j);
      if (u.dim() > 1) p[1] = forward_difference(u, 1, 1, i, j);
    }
  }
  return g;
}

double lq_distance(const ScalarField& u, const ScalarField& v, double q) {
  require(q >= 1.0, "lq_distance needs q >= 1");
  require(u.same_grid(v), "lq_distance: grid mismatch");
  const auto us = u.samples();
  const auto vs = v.samples();
  double acc = 0.0;
  for (std::size_t k = 0; k < us.size(); ++k) acc += std::pow(std::abs(us[k] - vs[k]), q);
  return std::pow(acc * u.cell_volume(), 1.0 / q);
}

double lq_norm(const ScalarField& u, double q) {
  require(q >= 1.0, "lq_norm needs q >= 1");
  double acc = 0.0;
  for (double v : u.samples()) acc += std::pow(std::abs(v), q);
  return std::pow(acc * u.cell_volume(), 1.0 / q);
}

}  // namespace oscilla
