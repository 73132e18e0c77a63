#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "oscilla/functionals.hpp"

namespace oscilla {

struct DenoiseOptions {
  FunctionalOptions functional{};
  int max_iterations = 60;         // outer cutting-plane iterations
  int master_iterations = 4000;    // primal-dual iterations per master solve
  double tol = 1e-3;               // stopping tolerance tau
  int bundle_size = 16;
  bool truncate = false;           // final truncation at max|f|
  double init_perturbation = 0.0;  // seeded uniform perturbation of the start, relative to max|f|
};

struct DenoiseProblem {
  ScalarField f;
  double lambda = 1.0;
  double q = 2.0;
  double eps = 0.125;
  DenoiseOptions options{};
};

struct DenoiseSolution {
  ScalarField u{BoxDomain{}, Resolution{1, 1}, std::vector<double>{0.0}};
  std::vector<double> objective_trace;  // best F_eps so far, per outer iteration
  std::vector<double> lower_trace;      // best certified lower bound so far
  double objective = 0.0;               // F_eps(u)
  double lower_bound = 0.0;
  double gap = 0.0;
  /// q = 2: sqrt(gap / lambda), a bound on ||u - u_eps||_2; q != 2: gap / objective.
  double certificate = 0.0;
  double almost_min_slack = 0.0;        // F_eps(u) - lower bound
  bool converged = false;
  int iterations = 0;

  nlohmann::json to_json() const;
};

/// lambda * sum |u - f|^q h^n
double fidelity(const ScalarField& u, const ScalarField& f, double lambda, double q);
/// K_eps(u) (m = 1) plus fidelity, with the packing solved per the functional options.
double evaluate_Feps(const ScalarField& u, const ScalarField& f, double lambda, double q, double eps,
                     const FunctionalOptions& opts);

/// Cutting-plane minimization of F_eps: the master problem over a bundle of
/// packing families is solved by a primal-dual iteration, the packing is
/// re-solved at each master solution and added to the bundle.
DenoiseSolution solve_Feps(const DenoiseProblem& problem, std::uint64_t seed = 1);

struct RofOptions {
  double anisotropy = 0.25;
  double tol = 1e-6;  // relative duality gap
  int max_iterations = 500000;
  std::uint64_t seed = 0;  // 0: start from f; otherwise a seeded random start
};

/// anisotropy * TV(u) + lambda * sum |u - f|^q h^n with forward differences and
/// Neumann boundary.
double rof_objective(const ScalarField& u, const ScalarField& f, double lambda, double q, double anisotropy = 0.25);
double neumann_tv(const ScalarField& u);
ScalarField solve_rof_reference(const ScalarField& f, double lambda, double q, const RofOptions& opts = {});

/// Minimizers of the q = 1 limit problem near u0: each flat region of u0 may be
/// shifted over the interval of levels that keeps the objective minimal.
struct MinimizerSet {
  ScalarField u0{BoxDomain{}, Resolution{1, 1}, std::vector<double>{0.0}};
  std::vector<std::vector<std::size_t>> regions;
  std::vector<std::pair<double, double>> shift_range;

  /// min over regions of the L1 distance from u to {u0 + t chi_R : t in range}.
  double distance(const ScalarField& u) const;
};
MinimizerSet rof_minimizer_set(const ScalarField& u0, const ScalarField& f, double lambda, double anisotropy = 0.25);

struct ConvergenceStudy {
  std::vector<double> eps;
  std::vector<ScalarField> solutions;
  std::vector<DenoiseSolution> runs;
  ScalarField reference{BoxDomain{}, Resolution{1, 1}, std::vector<double>{0.0}};
  std::vector<double> distances;           // ||u_eps - u0||_q (L1 to the minimizer set when q = 1)
  std::vector<double> relative_distances;  // divided by ||f||_q
  std::vector<double> objectives;          // F_eps(u_eps)
  std::vector<double> objective_errors;    // |F_eps(u_eps) - F(u0)| / F(u0)
  double reference_objective = 0.0;
  std::vector<double> norms_l1;            // ||u_eps||_1
  std::vector<double> truncation_excess;   // F_eps(T u) - F_eps(u) before truncation
  std::map<std::string, bool> verdicts;
  nlohmann::json metrics = nlohmann::json::object();

  nlohmann::json to_json() const;
};

ConvergenceStudy convergence_study(const ScalarField& f, double lambda, double q, const std::vector<double>& eps,
                                   const DenoiseOptions& opts = {}, std::uint64_t seed = 1);
/// q = 1 with window scales delta_eps and stopping slacks tau_eps (relative gaps).
ConvergenceStudy almost_minimizer_study(const ScalarField& f, double lambda, const std::vector<double>& delta,
                                        const std::vector<double>& tau, const DenoiseOptions& opts = {},
                                        std::uint64_t seed = 1);

}  // namespace oscilla
