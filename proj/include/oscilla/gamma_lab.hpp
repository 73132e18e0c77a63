#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oscilla/functionals.hpp"

namespace oscilla {

struct Series {
  std::string name;
  std::vector<double> eps;
  std::vector<double> values;
};

struct ExperimentReport {
  std::string id;
  nlohmann::json inputs;
  std::vector<Series> series;
  double reference = 0.0;
  std::string reference_provenance;
  std::map<std::string, bool> verdicts;
  nlohmann::json metrics = nlohmann::json::object();
  double runtime_seconds = 0.0;

  const Series& get(const std::string& name) const;
  bool passed() const;
  nlohmann::json to_json() const;
};

/// int_Omega |D^m u|_F by midpoint quadrature of the analytic derivatives.
double derivative_mass(const AnalyticSource& source, const BoxDomain& domain, int m, int resolution = 2048);
/// int_Omega psi(grad u) with the closed-form axis-cube anisotropy
/// psi(a, b) = |a|/4 + b^2/(12|a|) for |a| >= |b|.
double axis_cube_psi(const Point& nu);
double axis_cube_psi_integral(const AnalyticSource& source, const BoxDomain& domain, int resolution = 1024);

struct PointwiseSpec {
  AnalyticSource source = AnalyticSource::linear({1.0, 0.0});
  BoxDomain domain = BoxDomain::interval(0.0, 1.0);
  int resolution = 1024;
  FunctionalKind kind = FunctionalKind::H;
  int m = 1;
  ShapeKind shape = ShapeKind::interval;
  LadderSpec ladder{{0.125, 0.0625, 0.03125, 0.015625}};
  FunctionalOptions functional{};
  double tol = 0.03;
  std::optional<double> reference;
};
ExperimentReport pointwise_limit_experiment(const PointwiseSpec& spec);

struct RecoverySpec {
  AnalyticSource source = AnalyticSource::step({1.0, 0.0}, 0.0);
  BoxDomain domain = BoxDomain::interval(-0.5, 0.5);
  int resolution = 4096;
  LadderSpec ladder{{0.125, 0.0625, 0.03125, 0.015625, 0.0078125}};
  double total_variation = 1.0;
  /// sigma(eps) = sigma_coeff * eps^sigma_power
  double sigma_coeff = 0.5;
  double sigma_power = 0.5;
  bool mollify = true;
  FunctionalOptions functional{};
  double tol = 0.02;
};
ExperimentReport recovery_sequence_experiment(const RecoverySpec& spec);

struct LiminfSpec {
  AnalyticSource source = AnalyticSource::step({1.0, 0.0}, 0.0);
  BoxDomain domain = BoxDomain::interval(-0.5, 0.5);
  int resolution = 2048;
  int m = 1;
  LadderSpec ladder{{0.125, 0.0625, 0.03125, 0.015625, 0.0078125}};
  /// a(eps) = amplitude_coeff * eps
  double amplitude_coeff = 1.0;
  std::uint64_t seed = 11;
  FunctionalOptions functional{};
  double tol = 0.05;
  std::optional<double> reference;
};
ExperimentReport liminf_experiment(const LiminfSpec& spec);

/// max H_eps / discrete TV over probe fields (steps, random piecewise constants).
double measure_poincare_constant(int trials = 20, std::uint64_t seed = 5, int resolution = 512);

struct CantorSpec {
  int depth = 40;
  int resolution = 19683;
  double eps_max = 0.125;
  int octaves = 4;
  int per_octave = 4;
  int rho = 64;
  bool constant_field = false;  // replace the Cantor field by zero (sanity run)
  std::uint64_t seed = 5;
};
ExperimentReport cantor_experiment(const CantorSpec& spec);

struct ProbeSpec {
  int resolution = 1024;
  LadderSpec ladder{{0.125, 0.0625, 0.03125, 0.015625, 0.0078125}};
  std::uint64_t seed = 3;
  FunctionalOptions functional{};
};
/// Growth exponents of H ladders for a step, grid white noise and the zero field.
ExperimentReport bv_characterization_probe(const ProbeSpec& spec);

/// Slope of log(value) against log(1/eps); 0 for an all-zero series.
double growth_exponent(const std::vector<double>& eps, const std::vector<double>& values);

}  // namespace oscilla
