#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "oscilla/packing.hpp"

namespace oscilla {

enum class FunctionalKind { H, K };
std::string kind_name(FunctionalKind k);
FunctionalKind parse_kind(const std::string& s);

enum class SolverChoice { automatic, exact1d, exact_small, greedy };
std::string solver_name(SolverChoice s);
SolverChoice parse_solver(const std::string& s);

struct FunctionalOptions {
  int rho = 4;               // center refinement
  int orientations = 16;     // rotated squares for K in 2D
  SolverChoice solver = SolverChoice::automatic;
  int exact_small_limit = 40;
  std::uint64_t seed = 1;
  int max_rounds = 50;
  bool keep_family = true;
  /// Raise rho so the center lattice spacing is at most one grid cell.
  bool grid_lattice = false;
};

struct FunctionalEstimate {
  FunctionalKind kind = FunctionalKind::H;
  ShapeKind shape = ShapeKind::interval;
  double eps = 0.0;
  int m = 1;
  double value = 0.0;
  double upper_bound = 0.0;  // same scaling as value
  Optimality packing_optimality = Optimality::exact;
  int candidate_refinement = 1;
  int orientation_count = 1;
  std::size_t candidate_count = 0;
  /// Estimated relative midpoint-rule error of a window mean, (h / eps)^2.
  double quadrature_tol = 0.0;
  PackingFamily family;

  nlohmann::json to_json() const;
};

/// eps^(n-1) times the best disjoint family of translated windows of m = 1 oscillations.
FunctionalEstimate eval_H(const ScalarField& u, const BoxDomain& domain, ShapeKind shape, double eps,
                          const FunctionalOptions& opts = {});
FunctionalEstimate eval_H(const ScalarField& u, ShapeKind shape, double eps, const FunctionalOptions& opts = {});

/// eps^(n-m) times the best disjoint family of translated and rotated cubes of order-m oscillations.
FunctionalEstimate eval_K(const ScalarField& u, const BoxDomain& domain, int m, double eps,
                          const FunctionalOptions& opts = {});
FunctionalEstimate eval_K(const ScalarField& u, int m, double eps, const FunctionalOptions& opts = {});

/// Candidate list with oscillation weights filled in (data-parallel).
std::vector<PlacementCandidate> weighted_candidates(const ScalarField& u, const BoxDomain& domain, ShapeKind shape,
                                                    double eps, int m, int rho, const std::vector<double>& orientations);
void fill_weights(const ScalarField& u, std::vector<PlacementCandidate>& candidates, int m);

/// eps^(n-m) * sum of the oscillations of u over a fixed family.
double family_value(const ScalarField& u, const PackingFamily& family, int m);

struct LadderSpec {
  std::vector<double> eps;  // explicit values; empty means geometric
  double eps_max = 0.25;
  double ratio = 0.5;
  int count = 4;
  double order = 1.0;  // extrapolation order p in V = L + c eps^p

  std::vector<double> values() const;
};

struct EpsLadder {
  FunctionalKind kind = FunctionalKind::H;
  int m = 1;
  ShapeKind shape = ShapeKind::interval;
  std::vector<double> eps;
  std::vector<FunctionalEstimate> estimates;
  double extrapolated = 0.0;
  double extrapolation_order = 1.0;
  bool non_cauchy = false;

  std::vector<double> values() const;
  nlohmann::json to_json() const;
};

/// Least-squares fit of V = L + c eps^p over the last three points; returns L.
double extrapolate(const std::vector<double>& eps, const std::vector<double>& values, double order);
/// Successive differences fail to shrink: the tail's largest step stays above
/// an absolute floor and at least 3/4 of the head's largest step.
bool detect_non_cauchy(const std::vector<double>& values);

EpsLadder sweep_eps(const ScalarField& u, FunctionalKind kind, int m, const LadderSpec& ladder,
                    ShapeKind shape, const FunctionalOptions& opts = {});

struct AnisotropyTable {
  ShapeKind shape = ShapeKind::axis_box;
  std::vector<Point> directions;
  std::vector<double> psi_values;

  /// psi~(tau) = |tau| psi(tau/|tau|), interpolated linearly in angle.
  double extended(const Point& tau, int dim) const;
  nlohmann::json to_json() const;
};

struct PsiOptions {
  int resolution = 256;
  LadderSpec ladder{{0.25, 0.125, 0.0625}};
  FunctionalOptions functional{};
};

/// psi(nu) = extrapolated H ladder of x.nu over the unit cube.
AnisotropyTable estimate_psi(ShapeKind shape, const std::vector<Point>& directions, const PsiOptions& opts = {});
/// Evenly spaced unit directions on the half circle [0, pi).
std::vector<Point> half_circle_directions(int count);

/// sum_cells psi~(grad u) h^n with forward-difference gradients.
double anisotropic_variation(const ScalarField& u, const AnisotropyTable& table);

struct BetaSearch {
  int starts = 24;
  int iterations = 200;
  std::uint64_t seed = 7;
};

struct BetaResult {
  int n = 1;
  int m = 1;
  double value = 0.0;
  /// Tensor components nu_alpha for |alpha| = m (graded order, first index descending).
  std::vector<MultiIndex> alphas;
  std::vector<double> argmax;
  int quadrature_level = 0;
  std::vector<double> trace;  // best value after each start

  nlohmann::json to_json() const;
};

/// (1/m!) max over unit symmetric m-tensors nu of int_Q |nu.x^m - mean|.
BetaResult beta_constant(int n, int m, int quadrature_level = 3, const BetaSearch& search = {});
/// (1/m!) int_Q |nu.x^m - mean| for a given tensor (unit normalization not enforced).
double beta_objective(int n, int m, const std::vector<double>& nu, int quadrature_level = 3);

}  // namespace oscilla
