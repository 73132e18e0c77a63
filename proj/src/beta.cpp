#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oscilla/error.hpp"
#include "oscilla/functionals.hpp"

namespace oscilla {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// int_{-1/2}^{1/2} t^k dt
double moment(int k) { return k % 2 ? 0.0 : std::pow(0.5, k) / (k + 1); }

double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
  return v;
}

// Real roots of the polynomial (coefficients low to high) strictly inside (a, b),
// found by bracketing between roots of the derivative.
std::vector<double> roots_in(const std::vector<double>& c, double a, double b) {
  std::size_t deg = c.size();
  while (deg > 0 && c[deg - 1] == 0.0) --deg;
  if (deg <= 1) return {};
  std::vector<double> d(deg - 1);
  for (std::size_t k = 1; k < deg; ++k) d[k - 1] = k * c[k];
  std::vector<double> knots{a};
  for (double r : roots_in(d, a, b)) knots.push_back(r);
  knots.push_back(b);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double lo = knots[k], hi = knots[k + 1];
    double flo = horner(c, lo), fhi = horner(c, hi);
    if (flo == 0.0 || fhi == 0.0 || (flo > 0) == (fhi > 0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = horner(c, mid);
      if ((fm > 0) == (flo > 0)) lo = mid, flo = fm;
      else hi = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1/2, 1/2]
};

GaussRule composite_gauss(int panels, int order) {
  // Legendre nodes on [-1, 1] by Newton iteration
  std::vector<double> x(order), w(order);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        break;
      }
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    x[i] = z;
  }
  GaussRule r;
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = -0.5 + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(c + 0.5 * h * x[i]);
      r.weights.push_back(0.5 * h * w[i]);
    }
  }
  return r;
}

// Integrand data for fixed (n, m): monomials x^alpha, |alpha| = m, with scale
// factors mapping Frobenius-unit z onto polynomial coefficients.
struct Problem {
  int n, m;
  std::vector<MultiIndex> alphas;
  std::vector<double> zscale;  // coefficient of x^alpha per unit z_alpha: sqrt(m!/alpha!)
  std::vector<double> mean;    // int_Q x^alpha
  GaussRule rule;

  Problem(int n_, int m_, int level) : n(n_), m(m_) {
    for (const auto& a : multi_indices(n, m)) {
      if (a[0] + a[1] == m) alphas.push_back(a);
    }
    for (const auto& a : alphas) {
      zscale.push_back(std::sqrt(factorial(m) / (factorial(a[0]) * factorial(a[1]))));
      mean.push_back(moment(a[0]) * (n > 1 ? moment(a[1]) : 1.0));
    }
    if (n == 2) rule = composite_gauss(8 << std::clamp(level, 0, 8), 8);
  }

  // returns int_Q |q| and fills grad_z
  double evaluate(const std::vector<double>& z, std::vector<double>* grad) const {
    const std::size_t na = alphas.size();
    if (grad) grad->assign(na, 0.0);
    double meanq = 0.0;
    for (std::size_t k = 0; k < na; ++k) meanq += z[k] * zscale[k] * mean[k];
    const auto line = [&](double x, double wx) {
      // q(x, t) as a polynomial in t (the last coordinate)
      std::vector<double> c(m + 1, 0.0);
      for (std::size_t k = 0; k < na; ++k) {
        const int ty = n == 1 ? alphas[k][0] : alphas[k][1];
        const double fx = n == 1 ? 1.0 : std::pow(x, alphas[k][0]);
        c[ty] += z[k] * zscale[k] * fx;
      }
      c[0] -= meanq;
      std::vector<double> knots{-0.5};
      for (double r : roots_in(c, -0.5, 0.5)) knots.push_back(r);
      knots.push_back(0.5);
      std::vector<double> anti(c.size() + 1, 0.0);
      for (std::size_t k = 0; k < c.size(); ++k) anti[k + 1] = c[k] / (k + 1.0);
      double total = 0.0;
      for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
        const double a = knots[p], b = knots[p + 1];
        const double integral = horner(anti, b) - horner(anti, a);
        const double sgn = integral >= 0.0 ? 1.0 : -1.0;
        total += std::abs(integral);
        if (grad) {
          for (std::size_t k = 0; k < na; ++k) {
            const int ty = n == 1 ? alphas[k][0] : alphas[k][1];
            const double fx = n == 1 ? 1.0 : std::pow(x, alphas[k][0]);
            const double piece = fx * (std::pow(b, ty + 1) - std::pow(a, ty + 1)) / (ty + 1.0) - mean[k] * (b - a);
            (*grad)[k] += wx * sgn * zscale[k] * piece;
          }
        }
      }
      return wx * total;
    };
    if (n == 1) return line(0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += line(rule.nodes[i], rule.weights[i]);
    return acc;
  }
};

void normalize(std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  s = std::sqrt(s);
  for (double& v : z) v /= s;
}

}  // namespace

double beta_objective(int n, int m, const std::vector<double>& nu, int quadrature_level) {
  require(n == 1 || n == 2, "beta: n must be 1 or 2");
  require(m >= 1 && m <= 3, "beta: m must be in {1, 2, 3}");
  const Problem prob(n, m, quadrature_level);
  require(nu.size() == prob.alphas.size(), "beta: tensor has the wrong number of components");
  std::vector<double> z(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) z[k] = nu[k] * prob.zscale[k];
  return prob.evaluate(z, nullptr) / factorial(m);
}

BetaResult beta_constant(int n, int m, int quadrature_level, const BetaSearch& search) {
  require(n == 1 || n == 2, "unsupported (n, m) for beta: n must be 1 or 2");
  require(m >= 1 && m <= 3, "unsupported (n, m) for beta: m must be in {1, 2, 3}");
  const Problem prob(n, m, quadrature_level);
  const std::size_t na = prob.alphas.size();
  BetaResult res;
  res.n = n;
  res.m = m;
  res.alphas = prob.alphas;
  res.quadrature_level = quadrature_level;

  std::vector<std::vector<double>> starts;
  for (std::size_t k = 0; k < na; ++k) {
    std::vector<double> e(na, 0.0);
    e[k] = 1.0;
    starts.push_back(e);
  }
  std::mt19937_64 rng(search.seed);
  std::normal_distribution<double> N(0.0, 1.0);
  if (na > 1) {
    for (int s = 0; s < search.starts; ++s) {
      std::vector<double> z(na);
      for (double& v : z) v = N(rng);
      normalize(z);
      starts.push_back(z);
    }
  }

  std::vector<double> best_z = starts.front();
  double best = -1.0;
  std::vector<double> grad;
  for (auto z : starts) {
    double f = prob.evaluate(z, &grad);
    double step = 0.5;
    for (int it = 0; it < search.iterations && na > 1 && step > 1e-12; ++it) {
      double dot = 0.0;
      for (std::size_t k = 0; k < na; ++k) dot += grad[k] * z[k];
      std::vector<double> trial(na);
      double gnorm = 0.0;
      for (std::size_t k = 0; k < na; ++k) {
        const double t = grad[k] - dot * z[k];
        trial[k] = z[k] + step * t;
        gnorm += t * t;
      }
      if (std::sqrt(gnorm) < 1e-14) break;
      normalize(trial);
      std::vector<double> tgrad;
      const double ft = prob.evaluate(trial, &tgrad);
      if (ft > f) {
        z = trial;
        f = ft;
        grad = tgrad;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (f > best) {
      best = f;
      best_z = z;
    }
    res.trace.push_back(best / factorial(m));
  }

  // local pattern refinement around the best point
  for (double delta = 1e-2; delta > 1e-9 && na > 1; delta *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t k = 0; k < na; ++k) {
        for (double sgn : {1.0, -1.0}) {
          auto t = best_z;
          t[k] += sgn * delta;
          normalize(t);
          const double ft = prob.evaluate(t, nullptr);
          if (ft > best) {
            best = ft;
            best_z = t;
            moved = true;
          }
        }
      }
    }
  }
  res.trace.push_back(best / factorial(m));
  res.value = best / factorial(m);
  for (std::size_t k = 0; k < na; ++k) res.argmax.push_back(best_z[k] / prob.zscale[k]);
  return res;
}

nlohmann::json BetaResult::to_json() const {
  nlohmann::json alpha = nlohmann::json::array();
  for (const auto& a : alphas) alpha.push_back(n == 1 ? nlohmann::json{a[0]} : nlohmann::json{a[0], a[1]});
  return {{"n", n},       {"m", m},           {"value", value},
          {"alphas", alpha}, {"argmax", argmax}, {"quadrature_level", quadrature_level},
          {"trace", trace}};
}

}  // namespace oscilla
