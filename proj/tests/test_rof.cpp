#include <cmath>
#include <random>

#include "doctest.h"
#include "oscilla/denoise.hpp"

using namespace oscilla;

namespace {

ScalarField step(int n, double height) {
  return sample(AnalyticSource::step({1.0, 0.0}, 0.5, 0.0, height), BoxDomain::interval(0, 1), n);
}

// Reduced objective along the family of shrunk steps {delta, A - delta}, with
// its first-order condition solved by bisection on a central difference.
double shrinkage_by_bisection(const ScalarField& f, double height, double lambda) {
  auto g = [&](double d) {
    std::vector<double> u(f.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = f.samples()[i] < height / 2 ? d : height - d;
    return rof_objective(f.with_samples(u), f, lambda, 2.0);
  };
  double lo = 0.0, hi = height / 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi), dd = 1e-7 * height;
    if (g(mid + dd) - g(mid - dd) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("constant datum") {
  const auto f = constant_field(BoxDomain::rectangle({0, 0}, {1, 1}), {16, 16}, 2.0);
  for (double q : {1.0, 2.0}) {
    const auto u = solve_rof_reference(f, 3.0, q);
    CHECK(lq_distance(u, f, 2.0) <= 1e-12);
  }
}

TEST_CASE("symmetric step is shrunk by the first-order amount") {
  const double A = 1.0;
  for (double lambda : {2.0, 5.0, 20.0}) {
    const auto f = step(128, A);
    RofOptions o;
    o.tol = 1e-10;
    const auto u = solve_rof_reference(f, lambda, 2.0, o);
    const double delta = shrinkage_by_bisection(f, A, lambda);
    // two flat halves of length 1/2: delta = (1/4) / (2 lambda (1/2)) = 1 / (4 lambda)
    CHECK(delta == doctest::Approx(0.25 / lambda).epsilon(1e-5));
    for (int i = 0; i < 128; ++i) CHECK(std::abs(u(i) - (f(i) < A / 2 ? delta : A - delta)) <= 1e-5);
  }
}

TEST_CASE("q = 2 solution does not depend on the start") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  const auto s = step(64, 1.0);
  std::vector<double> v(s.samples().begin(), s.samples().end());
  for (auto& x : v) x += g(rng);
  const auto f = s.with_samples(v);
  RofOptions a, b;
  a.tol = b.tol = 1e-12;
  a.seed = 1;
  b.seed = 2;
  const auto ua = solve_rof_reference(f, 8.0, 2.0, a), ub = solve_rof_reference(f, 8.0, 2.0, b);
  CHECK(lq_distance(ua, ub, 2.0) <= 1e-6);
}

TEST_CASE("reference is a local minimum of the discrete objective") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto base = sample(AnalyticSource::step({0.6, 0.8}, 0.7), BoxDomain::rectangle({0, 0}, {1, 1}), 24);
  std::vector<double> v(base.samples().begin(), base.samples().end());
  for (auto& x : v) x += 0.1 * U(rng);
  const auto f = base.with_samples(v);
  for (double q : {1.0, 2.0}) {
    RofOptions o;
    o.tol = 1e-9;
    const auto u = solve_rof_reference(f, 6.0, q, o);
    const double fu = rof_objective(u, f, 6.0, q);
    CHECK(fu <= rof_objective(f, f, 6.0, q));
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> w(u.samples().begin(), u.samples().end());
      for (auto& x : w) x += 1e-3 * U(rng);
      CHECK(fu <= rof_objective(u.with_samples(w), f, 6.0, q) + 1e-7 * fu);
    }
  }
}

TEST_CASE("TV-L1 is contrast invariant") {
  const auto s = step(96, 1.0);
  std::vector<double> v(s.samples().begin(), s.samples().end());
  for (std::size_t i = 0; i < v.size(); i += 7) v[i] += 0.4;
  const auto f = s.with_samples(v);
  std::vector<double> v3 = v;
  for (auto& x : v3) x *= 3.0;
  RofOptions o;
  o.tol = 1e-9;
  const auto u = solve_rof_reference(f, 4.0, 1.0, o);
  const auto u3 = solve_rof_reference(f.with_samples(v3), 4.0, 1.0, o);
  std::vector<double> su(u.samples().begin(), u.samples().end());
  for (auto& x : su) x *= 3.0;
  const auto set3 = rof_minimizer_set(u3, f.with_samples(v3), 4.0);
  CHECK(set3.distance(u.with_samples(su)) <= 1e-4 * lq_norm(u3, 1.0));
  CHECK(rof_objective(u.with_samples(su), f.with_samples(v3), 4.0, 1.0) ==
        doctest::Approx(3.0 * rof_objective(u, f, 4.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("q = 1 minimizer set") {
  const auto f = step(64, 1.0);
  const auto u0 = solve_rof_reference(f, 2.0, 1.0);
  const auto set = rof_minimizer_set(u0, f, 2.0);
  CHECK(set.distance(u0) == 0.0);
  CHECK_FALSE(set.regions.empty());
  REQUIRE(set.shift_range.size() == set.regions.size());
  for (auto [lo, hi] : set.shift_range) {
    CHECK(lo <= 1e-12);
    CHECK(hi >= -1e-12);
  }
  // every member of the set is optimal
  for (std::size_t r = 0; r < set.regions.size(); ++r) {
    for (double t : {set.shift_range[r].first, set.shift_range[r].second}) {
      std::vector<double> w(u0.samples().begin(), u0.samples().end());
      for (auto i : set.regions[r]) w[i] += t;
      CHECK(rof_objective(u0.with_samples(w), f, 2.0, 1.0) <= rof_objective(u0, f, 2.0, 1.0) * (1 + 1e-6) + 1e-12);
    }
  }
}

TEST_CASE("neumann TV") {
  const auto lin = sample(AnalyticSource::linear({1.0, 0.0}), BoxDomain::interval(0, 1), 100);
  CHECK(neumann_tv(lin) == doctest::Approx(0.99).epsilon(1e-12));
  const auto f = step(50, 2.0);
  CHECK(neumann_tv(f) == doctest::Approx(2.0).epsilon(1e-14));
}
