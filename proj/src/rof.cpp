#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oscilla/denoise.hpp"
#include "oscilla/error.hpp"

namespace oscilla {

namespace {

// Forward differences with zero flux across the last face of each axis.
struct Grad {
  int nx, ny, dim;
  double hx, hy;

  explicit Grad(const ScalarField& u)
      : nx(u.nx()), ny(u.dim() == 2 ? u.ny() : 1), dim(u.dim()), hx(u.spacing(0)),
        hy(u.dim() == 2 ? u.spacing(1) : 1.0) {}

  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

  // p laid out as [x components | y components]
  void apply(const double* u, double* p) const {
    const std::size_t N = cells();
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = i + static_cast<std::size_t>(nx) * j;
        p[c] = i + 1 < nx ? (u[c + 1] - u[c]) / hx : 0.0;
        if (dim == 2) p[N + c] = j + 1 < ny ? (u[c + nx] - u[c]) / hy : 0.0;
      }
    }
  }

  // g = grad^T p
  void adjoint(const double* p, double* g) const {
    const std::size_t N = cells();
    std::fill(g, g + N, 0.0);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = i + static_cast<std::size_t>(nx) * j;
        if (i + 1 < nx) {
          g[c] -= p[c] / hx;
          g[c + 1] += p[c] / hx;
        }
        if (dim == 2 && j + 1 < ny) {
          g[c] -= p[N + c] / hy;
          g[c + nx] += p[N + c] / hy;
        }
      }
    }
  }

  double norm_sq() const { return 4.0 / (hx * hx) + (dim == 2 ? 4.0 / (hy * hy) : 0.0); }

  double magnitude(const double* p, std::size_t c) const {
    if (dim == 1) return std::abs(p[c]);
    return std::hypot(p[c], p[cells() + c]);
  }
};

double fid_sum(const std::vector<double>& u, std::span<const double> f, double q) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = std::abs(u[i] - f[i]);
    s += q == 2.0 ? d * d : q == 1.0 ? d : std::pow(d, q);
  }
  return s;
}

}  // namespace

double neumann_tv(const ScalarField& u) {
  const Grad G(u);
  std::vector<double> p(G.cells() * G.dim);
  G.apply(u.samples().data(), p.data());
  double tv = 0.0;
  for (std::size_t c = 0; c < G.cells(); ++c) tv += G.magnitude(p.data(), c);
  return tv * u.cell_volume();
}

double rof_objective(const ScalarField& u, const ScalarField& f, double lambda, double q, double anisotropy) {
  return anisotropy * neumann_tv(u) + fidelity(u, f, lambda, q);
}

ScalarField solve_rof_reference(const ScalarField& f, double lambda, double q, const RofOptions& opts) {
  require(q == 1.0 || q == 2.0, "reference solver supports q = 1 or q = 2");
  require(lambda > 0.0, "lambda must be positive");
  require(opts.anisotropy > 0.0, "anisotropy constant must be positive");
  const Grad G(f);
  const std::size_t N = G.cells();
  const std::size_t P = N * G.dim;
  const auto fv = f.samples();
  const double c = opts.anisotropy;

  std::vector<double> u(fv.begin(), fv.end());
  if (opts.seed != 0) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double amp = std::max(f.max_abs(), 1.0);
    for (double& v : u) v += amp * U(rng);
  }
  std::vector<double> p(P, 0.0), y(P), g(N), ubar = u, uold(N);
  const double L = std::sqrt(G.norm_sq());
  double tau = 1.0 / L, sigma = 1.0 / L;
  const bool accel = q == 2.0;
  double restart_gap = std::numeric_limits<double>::infinity();
  int restart_it = 0, restart_period = 1000;

  auto primal = [&](const std::vector<double>& x) {
    G.apply(x.data(), y.data());
    double tv = 0.0;
    for (std::size_t k = 0; k < N; ++k) tv += G.magnitude(y.data(), k);
    return c * tv + lambda * fid_sum(x, fv, q);
  };
  auto dual = [&]() {
    G.adjoint(p.data(), g.data());
    double scale = 1.0;
    if (q == 1.0) {
      double mx = 0.0;
      for (double v : g) mx = std::max(mx, std::abs(v));
      if (mx > lambda) scale = lambda / mx;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double gi = scale * g[i];
      d += gi * fv[i];
      if (q == 2.0) d -= gi * gi / (4.0 * lambda);
    }
    return d;
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    G.apply(ubar.data(), y.data());
    for (std::size_t k = 0; k < P; ++k) p[k] += sigma * y[k];
    for (std::size_t k = 0; k < N; ++k) {
      const double m = G.magnitude(p.data(), k);
      if (m > c) {
        const double s = c / m;
        p[k] *= s;
        if (G.dim == 2) p[N + k] *= s;
      }
    }
    G.adjoint(p.data(), g.data());
    uold = u;
    const double t = tau * lambda;
    for (std::size_t i = 0; i < N; ++i) {
      const double v = u[i] - tau * g[i];
      const double d = v - fv[i];
      if (q == 2.0) u[i] = fv[i] + d / (1.0 + 2.0 * t);
      else u[i] = fv[i] + (d > t ? d - t : d < -t ? d + t : 0.0);
    }
    double theta = 1.0;
    if (accel) {
      theta = 1.0 / std::sqrt(1.0 + 4.0 * lambda * tau);
      tau *= theta;
      sigma /= theta;
    }
    for (std::size_t i = 0; i < N; ++i) ubar[i] = u[i] + theta * (u[i] - uold[i]);
    if (it % 20 == 0) {
      const double pv = primal(u);
      const double dv = dual();
      const double gap = pv - dv;
      if (gap <= opts.tol * std::max(std::abs(pv), 1e-300) || pv <= 1e-300) break;
      // the accelerated steps shrink like 1/k and stall; restart the schedule
      // each time the gap has dropped by a constant factor
      if (accel) {
        if (gap <= restart_gap / 4.0 || it - restart_it >= restart_period) {
          restart_period = gap <= restart_gap / 4.0 ? restart_period : 2 * restart_period;
          restart_gap = gap;
          restart_it = it;
          tau = sigma = 1.0 / L;
          ubar = u;
        }
      }
    }
  }
  return f.with_samples(std::move(u));
}

// --- q = 1 minimizer set --------------------------------------------------------------

MinimizerSet rof_minimizer_set(const ScalarField& u0, const ScalarField& f, double lambda, double anisotropy) {
  require(u0.same_grid(f), "minimizer set: grids differ");
  MinimizerSet set;
  set.u0 = u0;
  const Grad G(u0);
  const int nx = G.nx, ny = G.ny;
  const std::size_t N = G.cells();
  const auto uv = u0.samples();
  const auto fv = f.samples();
  double lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v;
  for (double v : uv) {
    lo_v = std::min(lo_v, v);
    hi_v = std::max(hi_v, v);
  }
  const double flat = 1e-4 * std::max(hi_v - lo_v, 1e-12);

  std::vector<int> label(N, -1);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < N; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(set.regions.size());
    set.regions.emplace_back();
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      set.regions[id].push_back(c);
      const int i = static_cast<int>(c % nx), j = static_cast<int>(c / nx);
      const std::pair<int, int> nb[4] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (auto [a, b] : nb) {
        if (a < 0 || a >= nx || b < 0 || b >= ny) continue;
        const std::size_t d = a + static_cast<std::size_t>(nx) * b;
        if (label[d] < 0 && std::abs(uv[d] - uv[s]) <= flat) {
          label[d] = id;
          stack.push_back(d);
        }
      }
    }
  }

  std::vector<double> work(uv.begin(), uv.end());
  std::vector<char> in_region(N, 0);
  for (const auto& R : set.regions) {
    for (auto c : R) in_region[c] = 1;
    // cells whose forward differences touch R
    std::vector<std::size_t> touched;
    for (auto c : R) {
      touched.push_back(c);
      const int i = static_cast<int>(c % nx), j = static_cast<int>(c / nx);
      if (i > 0) touched.push_back(c - 1);
      if (j > 0) touched.push_back(c - nx);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    auto phi = [&](double t) {
      for (auto c : R) work[c] = uv[c] + t;
      double tv = 0.0;
      for (auto c : touched) {
        const int i = static_cast<int>(c % nx), j = static_cast<int>(c / nx);
        const double gx = i + 1 < nx ? (work[c + 1] - work[c]) / G.hx : 0.0;
        const double gy = G.dim == 2 && j + 1 < ny ? (work[c + nx] - work[c]) / G.hy : 0.0;
        tv += std::hypot(gx, gy);
      }
      double fid = 0.0;
      for (auto c : R) fid += std::abs(work[c] - fv[c]);
      for (auto c : R) work[c] = uv[c];
      return anisotropy * tv + lambda * fid;
    };

    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (auto c : R) {
      a = std::min(a, fv[c] - uv[c]);
      b = std::max(b, fv[c] - uv[c]);
    }
    for (auto c : touched) {
      for (std::size_t d : {c + 1, c + static_cast<std::size_t>(nx)}) {
        if (d < N && !in_region[d]) {
          a = std::min(a, uv[d] - uv[c]);
          b = std::max(b, uv[d] - uv[c]);
        }
      }
    }
    a = std::min(a, 0.0);
    b = std::max(b, 0.0);
    // golden-section search for the minimum of the convex phi on [a, b]
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x0 = a, x1 = b;
    for (int it = 0; it < 200 && x1 - x0 > 1e-13 * std::max(1.0, b - a); ++it) {
      const double m1 = x1 - gr * (x1 - x0), m2 = x0 + gr * (x1 - x0);
      if (phi(m1) <= phi(m2)) x1 = m2;
      else x0 = m1;
    }
    const double tmin = 0.5 * (x0 + x1);
    const double fmin = std::min({phi(tmin), phi(0.0)});
    const double tol = 1e-10 * (1.0 + std::abs(fmin));
    const double center = phi(0.0) <= fmin + tol ? 0.0 : tmin;
    auto edge = [&](double inside, double outside) {
      if (phi(outside) <= fmin + tol) return outside;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (phi(mid) <= fmin + tol) inside = mid;
        else outside = mid;
      }
      return inside;
    };
    const double span = std::max(b - a, 1e-12);
    set.shift_range.emplace_back(edge(center, a - span), edge(center, b + span));
    for (auto c : R) in_region[c] = 0;
  }
  return set;
}

double MinimizerSet::distance(const ScalarField& u) const {
  require(u.same_grid(u0), "minimizer set: grids differ");
  const auto a = u.samples();
  const auto b = u0.samples();
  std::vector<double> delta(a.size());
  double base = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    delta[i] = a[i] - b[i];
    base += std::abs(delta[i]);
  }
  double best = base;
  std::vector<double> d;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& R = regions[r];
    d.clear();
    for (auto c : R) d.push_back(delta[c]);
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    const double t = std::clamp(d[d.size() / 2], shift_range[r].first, shift_range[r].second);
    double here = base;
    for (auto c : R) here += std::abs(delta[c] - t) - std::abs(delta[c]);
    best = std::min(best, here);
  }
  return best * u.cell_volume();
}

}  // namespace oscilla
