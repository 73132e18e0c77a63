#include <cmath>

#include "doctest.h"
#include "oscilla/gamma_lab.hpp"

using namespace oscilla;

namespace {

nlohmann::json without_runtime(const ExperimentReport& r) {
  auto j = r.to_json();
  j.erase("runtime_seconds");
  return j;
}

}  // namespace

TEST_CASE("pointwise limits") {
  PointwiseSpec lin;
  lin.tol = 0.02;
  const auto a = pointwise_limit_experiment(lin);
  CHECK(a.reference == doctest::Approx(0.25));
  CHECK(a.verdicts.at("within_tolerance"));

  PointwiseSpec sn;
  sn.source = AnalyticSource::sinusoid({SinusoidMode{1.0, {1.0, 0.0}, {0.0, 0.0}}});
  sn.kind = FunctionalKind::K;
  sn.tol = 0.03;
  const auto b = pointwise_limit_experiment(sn);
  CHECK(b.reference == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(b.verdicts.at("within_tolerance"));

  PointwiseSpec q;
  q.source = AnalyticSource::polynomial({{{2, 0}, 0.5}});
  q.kind = FunctionalKind::K;
  q.m = 2;
  q.resolution = 2048;
  q.tol = 0.03;
  const auto c = pointwise_limit_experiment(q);
  CHECK(c.reference == doctest::Approx(1 / (18 * std::sqrt(3.0))).epsilon(1e-5));
  CHECK(c.verdicts.at("within_tolerance"));
}

TEST_CASE("derivative mass quadrature") {
  const auto s = AnalyticSource::sinusoid({SinusoidMode{1.0, {1.0, 0.0}, {0.0, 0.0}}});
  CHECK(derivative_mass(s, BoxDomain::interval(0, 1), 1) == doctest::Approx(4.0).epsilon(1e-5));
  const auto s2 = AnalyticSource::sinusoid({SinusoidMode{1.0, {1.0, 1.0}, {0.0, 0.0}}});
  // int |grad sin(2 pi x) sin(2 pi y)| over the unit square, by a fine independent sum
  const int n = 2000;
  double want = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n, y = (j + 0.5) / n;
      const double gx = 2 * M_PI * std::cos(2 * M_PI * x) * std::sin(2 * M_PI * y);
      const double gy = 2 * M_PI * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y);
      want += std::hypot(gx, gy) / (double(n) * n);
    }
  }
  CHECK(derivative_mass(s2, BoxDomain::rectangle({0, 0}, {1, 1}), 1) == doctest::Approx(want).epsilon(1e-5));
}

TEST_CASE("recovery sequence for a step") {
  RecoverySpec r;
  r.resolution = 2048;
  r.ladder.eps = {0.125, 0.0625, 0.03125};
  r.functional.grid_lattice = true;
  const auto rep = recovery_sequence_experiment(r);
  CHECK(rep.verdicts.at("limsup_bounded"));
  CHECK(rep.verdicts.at("converges_in_L1"));

  RecoverySpec c = r;
  c.source = AnalyticSource::polynomial({{{0, 0}, 2.0}});
  c.total_variation = 0.0;
  const auto z = recovery_sequence_experiment(c);
  for (double v : z.get("K").values) CHECK(std::abs(v) < 1e-12);

  RecoverySpec smooth;
  smooth.source = AnalyticSource::sinusoid({SinusoidMode{1.0, {1.0, 0.0}, {0.0, 0.0}}});
  smooth.domain = BoxDomain::interval(0, 1);
  smooth.resolution = 2048;
  smooth.mollify = false;
  smooth.total_variation = 4.0;
  smooth.tol = 0.04;
  smooth.ladder.eps = {0.0625, 0.03125, 0.015625};
  const auto s = recovery_sequence_experiment(smooth);
  CHECK(s.verdicts.at("limsup_bounded"));
  CHECK(s.get("K").values.back() == doctest::Approx(1.0).epsilon(0.03));
  for (double d : s.get("L1_distance").values) CHECK(d == 0.0);
}

TEST_CASE("liminf probes") {
  LiminfSpec l;
  l.source = AnalyticSource::linear({1.0, 0.0});
  l.domain = BoxDomain::interval(0, 1);
  l.resolution = 1024;
  l.ladder.eps = {0.125, 0.0625, 0.03125};
  const auto rep = liminf_experiment(l);
  CHECK(rep.reference == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(rep.verdicts.at("liminf_bounded_below"));

  // zero amplitude reproduces the unperturbed ladder
  LiminfSpec z = l;
  z.amplitude_coeff = 0.0;
  const auto zr = liminf_experiment(z);
  PointwiseSpec p;
  p.kind = FunctionalKind::K;
  p.resolution = 1024;
  p.ladder.eps = l.ladder.eps;
  const auto pr = pointwise_limit_experiment(p);
  for (std::size_t k = 0; k < 3; ++k) CHECK(zr.get("K").values[k] == pr.get("value").values[k]);
}

TEST_CASE("2D step liminf against the discrete perimeter") {
  LiminfSpec l;
  l.source = AnalyticSource::step({1.0, 0.0}, 0.5);
  l.domain = BoxDomain::rectangle({0, 0}, {1, 1});
  l.resolution = 64;
  l.ladder.eps = {0.25, 0.125};
  l.functional.rho = 4;
  l.functional.orientations = 4;
  l.reference = 0.25 * 1.0;
  const auto rep = liminf_experiment(l);
  CHECK(rep.verdicts.at("liminf_bounded_below"));
}

TEST_CASE("Cantor pipeline on the zero field") {
  CantorSpec c;
  c.constant_field = true;
  c.resolution = 2187;
  c.rho = 4;
  const auto rep = cantor_experiment(c);
  for (double v : rep.get("cantor").values) CHECK(v == 0.0);
  CHECK_FALSE(rep.verdicts.at("non_cauchy"));
  CHECK_FALSE(rep.verdicts.at("control_non_cauchy"));
}

TEST_CASE("BV probe") {
  ProbeSpec p;
  p.functional.grid_lattice = true;
  const auto rep = bv_characterization_probe(p);
  CHECK(rep.verdicts.at("step_bounded"));
  CHECK(rep.verdicts.at("noise_grows"));
  CHECK(rep.verdicts.at("zero_is_zero"));
}

TEST_CASE("growth exponent") {
  CHECK(growth_exponent({0.1, 0.05, 0.025}, {1.0, 2.0, 4.0}) == doctest::Approx(1.0));
  CHECK(growth_exponent({0.1, 0.05}, {0.0, 0.0}) == 0.0);
}

TEST_CASE("experiments are deterministic") {
  LiminfSpec l;
  l.resolution = 512;
  l.ladder.eps = {0.125, 0.0625, 0.03125};
  CHECK(without_runtime(liminf_experiment(l)) == without_runtime(liminf_experiment(l)));
}

TEST_CASE("pointwise, recovery and liminf agree on a smooth field") {
  const auto src = AnalyticSource::sinusoid({SinusoidMode{0.5, {1.0, 0.0}, {0.3, 0.0}}});
  LadderSpec lad;
  lad.eps = {0.0625, 0.03125, 0.015625};
  PointwiseSpec p;
  p.source = src;
  p.kind = FunctionalKind::K;
  p.resolution = 2048;
  p.ladder = lad;
  const auto pr = pointwise_limit_experiment(p);
  RecoverySpec r;
  r.source = src;
  r.domain = BoxDomain::interval(0, 1);
  r.resolution = 2048;
  r.ladder = lad;
  r.mollify = false;
  r.total_variation = derivative_mass(src, r.domain, 1);
  r.tol = 0.03 * pr.reference;
  const auto rr = recovery_sequence_experiment(r);
  CHECK(rr.get("K").values == pr.get("value").values);
  CHECK(rr.verdicts.at("limsup_bounded"));
  LiminfSpec l;
  l.source = src;
  l.domain = BoxDomain::interval(0, 1);
  l.resolution = 2048;
  l.ladder = lad;
  const auto lr = liminf_experiment(l);
  const double limsup = rr.metrics.at("limsup").get<double>();
  const double liminf = lr.metrics.at("tail_min").get<double>();
  CHECK(lr.verdicts.at("liminf_bounded_below"));
  CHECK(liminf >= limsup * (1 - 0.05 - 0.03));
  CHECK(std::abs(pr.metrics.at("extrapolated").get<double>() - pr.reference) <= 0.03 * pr.reference);
}
