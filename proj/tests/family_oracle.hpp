#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oscilla/packing.hpp"

namespace testgen {

// Independent model of F_eps in 1D with cell-aligned interval windows:
//   K(u) = max over disjoint families of sum_W (1/k_W) sum_{i in W} |u_i - mean_W u|
// (k_W the window's cell count), fidelity lambda sum |u - f|^q h.
class FamilyOracle {
 public:
  struct Solve {
    double primal, dual;
    std::vector<double> u;
  };
  struct Bounds {
    double lower, upper;
    int iterations;
  };

  FamilyOracle(const oscilla::ScalarField& f, const std::vector<oscilla::PlacementCandidate>& candidates, double lambda,
               double q)
      : f_(f.samples().begin(), f.samples().end()), cand_(candidates), lambda_(lambda), q_(q), h_(f.spacing(0)) {
    const int n = f.nx();
    std::vector<int> cover(n, 0);
    for (const auto& c : candidates) {
      const double lo = c.window.center[0] - c.window.side / 2, hi = c.window.center[0] + c.window.side / 2;
      const int a = static_cast<int>(std::lround((lo - f.domain().lower[0]) / h_));
      const int b = static_cast<int>(std::lround((hi - f.domain().lower[0]) / h_));
      REQUIRE(std::abs(a * h_ + f.domain().lower[0] - lo) < 1e-9);
      std::vector<int> cells;
      for (int i = a; i < b; ++i) cells.push_back(i), ++cover[i];
      cells_.push_back(cells);
    }
    norm_sq_ = std::max(1, *std::max_element(cover.begin(), cover.end()));
  }

  std::size_t windows() const { return cells_.size(); }

  std::vector<double> oscillations(const std::vector<double>& u) const {
    std::vector<double> out(cells_.size());
    for (std::size_t w = 0; w < cells_.size(); ++w) {
      double mean = 0.0, s = 0.0;
      for (int i : cells_[w]) mean += u[i];
      mean /= cells_[w].size();
      for (int i : cells_[w]) s += std::abs(u[i] - mean);
      out[w] = s / cells_[w].size();
    }
    return out;
  }

  double fidelity(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i] - f_[i]), q_) * h_;
    return lambda_ * s;
  }

  // Indicator of the best disjoint family for the given window weights.
  std::vector<double> best_family(const std::vector<double>& weights, double* value = nullptr) const {
    auto c = cand_;
    for (std::size_t w = 0; w < c.size(); ++w) c[w].weight = weights[w];
    const auto s = oscilla::solve_exact_1d(c);
    std::vector<double> x(c.size(), 0.0);
    for (auto i : s.selected) x[i] = 1.0;
    if (value) {
      *value = 0.0;
      for (auto i : s.selected) *value += weights[i];
    }
    return x;
  }

  double objective(const std::vector<double>& u) const {
    double k = 0.0;
    best_family(oscillations(u), &k);
    return k + fidelity(u);
  }

  // min_u sum_W x_W osc_W(u) + fidelity by Chambolle-Pock (accelerated for q = 2),
  // until the relative primal-dual gap is below tol. The dual value is a
  // certified lower bound.
  Solve solve_weighted(const std::vector<double>& x, std::vector<double> u, double tol) const {
    const std::size_t n = f_.size();
    std::vector<std::vector<double>> p(cells_.size()), a;
    for (std::size_t w = 0; w < cells_.size(); ++w) p[w].assign(cells_[w].size(), 0.0);
    std::vector<double> ubar = u, uold;
    double tau = 0.99 / std::sqrt(norm_sq_), sigma = tau;
    const double gamma = q_ == 2.0 ? 2.0 * lambda_ * h_ : 0.0;
    Solve best{primal(x, u), -1e300, u};
    for (int it = 0; it < 3000000; ++it) {
      apply(ubar, a);
      for (std::size_t w = 0; w < cells_.size(); ++w) {
        const double c = x[w] / cells_[w].size();
        for (std::size_t k = 0; k < p[w].size(); ++k) p[w][k] = std::clamp(p[w][k] + sigma * a[w][k], -c, c);
      }
      const auto kt = adjoint(p);
      uold = u;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = u[i] - tau * kt[i];
        if (q_ == 2.0) {
          u[i] = (v + 2.0 * tau * lambda_ * h_ * f_[i]) / (1.0 + 2.0 * tau * lambda_ * h_);
        } else {
          const double t = tau * lambda_ * h_, d = v - f_[i];
          u[i] = f_[i] + (d > t ? d - t : d < -t ? d + t : 0.0);
        }
      }
      double theta = 1.0;
      if (gamma > 0.0) {
        theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
        tau *= theta;
        sigma /= theta;
      }
      for (std::size_t i = 0; i < n; ++i) ubar[i] = u[i] + theta * (u[i] - uold[i]);
      if (it % 200 == 199) {
        const double pr = primal(x, u);
        if (pr < best.primal) best.primal = pr, best.u = u;
        best.dual = std::max(best.dual, dual(p));
        if (best.primal - best.dual <= tol * std::max(1e-12, best.primal)) break;
      }
    }
    return best;
  }

  // Frank-Wolfe over the (integral) family polytope of the dual problem
  //   max_x min_u sum_W x_W osc_W(u) + fidelity(u),
  // whose value is min F_eps. Lower bounds are certified dual values, upper
  // bounds exact objective values of the inner minimizers.
  Bounds minimum(double rel_gap, int max_iterations) const {
    std::vector<double> u = f_;
    std::vector<double> x = best_family(oscillations(u));
    Bounds b{-1e300, objective(u), 0};
    for (int k = 0; k < max_iterations; ++k) {
      b.iterations = k + 1;
      const auto s = solve_weighted(x, u, 1e-7);
      u = s.u;
      b.lower = std::max(b.lower, s.dual);
      b.upper = std::min(b.upper, objective(u));
      if (b.upper - b.lower <= rel_gap * b.upper) break;
      const auto target = best_family(oscillations(u));
      const double g = 2.0 / (k + 3.0);
      for (std::size_t w = 0; w < x.size(); ++w) x[w] = (1 - g) * x[w] + g * target[w];
    }
    return b;
  }

 private:
  double primal(const std::vector<double>& x, const std::vector<double>& u) const {
    const auto o = oscillations(u);
    double k = 0.0;
    for (std::size_t w = 0; w < o.size(); ++w) k += x[w] * o[w];
    return k + fidelity(u);
  }

  void apply(const std::vector<double>& u, std::vector<std::vector<double>>& out) const {
    out.resize(cells_.size());
    for (std::size_t w = 0; w < cells_.size(); ++w) {
      double mean = 0.0;
      for (int i : cells_[w]) mean += u[i];
      mean /= cells_[w].size();
      out[w].resize(cells_[w].size());
      for (std::size_t k = 0; k < cells_[w].size(); ++k) out[w][k] = u[cells_[w][k]] - mean;
    }
  }

  // the centering map is self-adjoint
  std::vector<double> adjoint(const std::vector<std::vector<double>>& p) const {
    std::vector<double> kt(f_.size(), 0.0);
    for (std::size_t w = 0; w < cells_.size(); ++w) {
      double mean = 0.0;
      for (double v : p[w]) mean += v;
      mean /= p[w].size();
      for (std::size_t k = 0; k < p[w].size(); ++k) kt[cells_[w][k]] += p[w][k] - mean;
    }
    return kt;
  }

  double dual(const std::vector<std::vector<double>>& p) const {
    auto kt = adjoint(p);
    if (q_ == 1.0) {
      double mx = 0.0;
      for (double v : kt) mx = std::max(mx, std::abs(v));
      const double s = mx > lambda_ * h_ ? lambda_ * h_ / mx : 1.0;
      for (auto& v : kt) v *= s;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < f_.size(); ++i) d += kt[i] * f_[i] - (q_ == 2.0 ? kt[i] * kt[i] / (4 * lambda_ * h_) : 0.0);
    return d;
  }

  std::vector<double> f_;
  std::vector<oscilla::PlacementCandidate> cand_;
  std::vector<std::vector<int>> cells_;
  double lambda_, q_, h_;
  int norm_sq_ = 1;
};

}  // namespace testgen
