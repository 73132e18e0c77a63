#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "family_oracle.hpp"
#include "oscilla/denoise.hpp"

using namespace oscilla;

namespace {

ScalarField noisy_step(int n, double noise, std::uint64_t seed) {
  const auto s = sample(AnalyticSource::step({1.0, 0.0}, 0.5), BoxDomain::interval(0, 1), n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise);
  std::vector<double> v(s.samples().begin(), s.samples().end());
  for (auto& x : v) x += g(rng);
  return s.with_samples(std::move(v));
}

FunctionalOptions exact_1d() {
  FunctionalOptions o;
  o.solver = SolverChoice::exact1d;
  return o;
}

}  // namespace

TEST_CASE("constant datum is its own minimizer") {
  const auto f = constant_field(BoxDomain::interval(0, 1), {128, 1}, 0.7);
  DenoiseProblem p{f, 5.0, 2.0, 0.125, {}};
  const auto s = solve_Feps(p);
  CHECK(s.objective <= 1e-12);
  CHECK(lq_distance(s.u, f, 2.0) == 0.0);
  CHECK(s.converged);
}

TEST_CASE("huge fidelity weight returns the datum") {
  const auto f = noisy_step(128, 0.05, 3);
  DenoiseProblem p{f, 1e6, 2.0, 0.125, {}};
  const auto s = solve_Feps(p);
  CHECK(lq_distance(s.u, f, 2.0) <= 1e-3 * lq_norm(f, 2.0));
}

TEST_CASE("noisy step against the fixed-family oracle") {
  const auto f = noisy_step(256, 0.1, 7);
  DenoiseProblem p{f, 10.0, 2.0, 1.0 / 16, {}};
  p.options.functional = exact_1d();
  const auto s = solve_Feps(p);
  MESSAGE("objective " << s.objective << " gap " << s.gap << " iterations " << s.iterations);
  CHECK(s.converged);
  const testgen::FamilyOracle oracle(f, enumerate_candidates(f.domain(), p.eps, ShapeKind::interval, 4), p.lambda, 2.0);
  CHECK(s.objective == doctest::Approx(oracle.objective(std::vector<double>(s.u.samples().begin(), s.u.samples().end()))).epsilon(1e-10));
  // the single family at the returned u only bounds the minimum from below
  const auto fam = oracle.best_family(oracle.oscillations(std::vector<double>(s.u.samples().begin(), s.u.samples().end())));
  const auto fixed = oracle.solve_weighted(fam, std::vector<double>(f.samples().begin(), f.samples().end()), 1e-8);
  MESSAGE("single fixed family bounds " << fixed.dual << " .. " << fixed.primal);
  CHECK(fixed.dual <= s.objective);
  const auto all = oracle.minimum(0.005, 400);
  MESSAGE("all families: " << all.lower << " .. " << all.upper << " after " << all.iterations);
  CHECK(all.lower <= s.objective);
  CHECK(s.objective <= 1.02 * all.lower);

  SUBCASE("objective traces") {
    REQUIRE(s.objective_trace.size() == s.lower_trace.size());
    for (std::size_t k = 1; k < s.lower_trace.size(); ++k) {
      CHECK(s.lower_trace[k] >= s.lower_trace[k - 1]);
      CHECK(s.objective_trace[k] <= s.objective_trace[k - 1]);
    }
    const double min_obj = *std::min_element(s.objective_trace.begin(), s.objective_trace.end());
    for (double l : s.lower_trace) CHECK(l <= min_obj * (1 + 1e-12));
    CHECK(s.lower_bound <= s.objective);
  }
  SUBCASE("datum is feasible and truncation does not hurt") {
    const double Ff = evaluate_Feps(f, f, p.lambda, 2.0, p.eps, exact_1d());
    CHECK(s.objective <= Ff * (1 + 1e-9));
    const double Fu = evaluate_Feps(s.u, f, p.lambda, 2.0, p.eps, exact_1d());
    CHECK(Fu == doctest::Approx(s.objective).epsilon(1e-12));
    const double Ft = evaluate_Feps(truncate(s.u, f.max_abs()), f, p.lambda, 2.0, p.eps, exact_1d());
    CHECK(Ft <= Fu + 1e-12 * Fu);
  }
}

TEST_CASE("truncation post-processing bounds the solution") {
  const auto f = noisy_step(128, 0.2, 9);
  DenoiseProblem p{f, 3.0, 2.0, 0.125, {}};
  p.options.truncate = true;
  p.options.functional = exact_1d();
  const auto s = solve_Feps(p);
  CHECK(s.u.max_abs() <= f.max_abs());
}

TEST_CASE("q = 2 minimizer does not depend on the start") {
  const auto f = noisy_step(128, 0.1, 11);
  DenoiseProblem p{f, 10.0, 2.0, 0.125, {}};
  p.options.functional = exact_1d();
  p.options.tol = 1e-4;
  const auto a = solve_Feps(p, 1);
  p.options.init_perturbation = 0.5;
  const auto b = solve_Feps(p, 2);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(lq_distance(a.u, b.u, 2.0) <= 10 * p.options.tol * lq_norm(f, 2.0));
  // the perturbed run really took another path
  CHECK(lq_distance(a.u, b.u, 2.0) > 0.0);
}

TEST_CASE("q = 1 objective is positively homogeneous in the datum") {
  const auto f = noisy_step(128, 0.1, 13);
  std::vector<double> scaled(f.samples().begin(), f.samples().end());
  for (auto& x : scaled) x *= 3.0;
  const auto f3 = f.with_samples(scaled);
  DenoiseProblem p{f, 4.0, 1.0, 0.125, {}};
  p.options.functional = exact_1d();
  p.options.tol = 1e-4;
  const auto a = solve_Feps(p);
  p.f = f3;
  const auto b = solve_Feps(p);
  CHECK(b.objective == doctest::Approx(3.0 * a.objective).epsilon(3e-4));
}

TEST_CASE("almost minimizers with a tiny slack match the fixed-family oracle") {
  const auto f = noisy_step(128, 0.1, 17);
  DenoiseOptions o;
  o.functional = exact_1d();
  const auto st = almost_minimizer_study(f, 6.0, {0.125}, {1e-5}, o);
  const testgen::FamilyOracle oracle(f, enumerate_candidates(f.domain(), 0.125, ShapeKind::interval, 4), 6.0, 1.0);
  const auto all = oracle.minimum(0.002, 400);
  MESSAGE("all families: " << all.lower << " .. " << all.upper << " after " << all.iterations);
  CHECK(all.lower <= st.objectives[0]);
  CHECK(st.objectives[0] <= all.lower * (1 + 2e-3));
  CHECK(st.verdicts.at("truncation_never_increases"));
}

TEST_CASE("almost-minimizer study on a constant datum") {
  const auto f = constant_field(BoxDomain::interval(0, 1), {64, 1}, -0.4);
  const auto st = almost_minimizer_study(f, 2.0, {0.25, 0.125, 0.0625}, {1e-3, 1e-3, 1e-3});
  for (const auto& u : st.solutions) CHECK(lq_distance(u, f, 1.0) == 0.0);
  for (double d : st.distances) CHECK(d == 0.0);
  CHECK(st.verdicts.at("distance_decreasing_subsequence"));
  CHECK(st.verdicts.at("equibounded_l1"));
}

TEST_CASE("convergence study sanity cases") {
  SUBCASE("tiny fidelity weight drives both problems to the mean") {
    const auto f = noisy_step(64, 0.05, 19);
    const auto st = convergence_study(f, 1e-3, 2.0, {0.25, 0.125, 0.0625});
    double mean = 0.0;
    for (double x : f.samples()) mean += x / f.size();
    for (double d : st.relative_distances) CHECK(d <= 0.02);
    CHECK(lq_distance(st.reference, constant_field(f.domain(), f.resolution(), mean), 2.0) <= 0.01);
  }
  SUBCASE("bad ladders are rejected") {
    const auto f = noisy_step(64, 0.05, 19);
    CHECK_THROWS(convergence_study(f, 1.0, 2.0, {0.125, 0.25}));
    CHECK_THROWS(convergence_study(f, 1.0, 1.0, {0.25, 0.125}));
  }
}
