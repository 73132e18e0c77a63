#include "oscilla/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oscilla/error.hpp"
#include "oscilla/parallel.hpp"

namespace oscilla {

std::string kind_name(FunctionalKind k) { return k == FunctionalKind::H ? "H" : "K"; }

FunctionalKind parse_kind(const std::string& s) {
  if (s == "H" || s == "h") return FunctionalKind::H;
  if (s == "K" || s == "k") return FunctionalKind::K;
  throw ValidationError("unknown functional kind: " + s);
}

std::string solver_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::automatic: return "auto";
    case SolverChoice::exact1d: return "exact1d";
    case SolverChoice::exact_small: return "exact_small";
    case SolverChoice::greedy: return "greedy";
  }
  return "auto";
}

SolverChoice parse_solver(const std::string& s) {
  if (s == "auto") return SolverChoice::automatic;
  if (s == "exact1d") return SolverChoice::exact1d;
  if (s == "exact_small") return SolverChoice::exact_small;
  if (s == "greedy") return SolverChoice::greedy;
  throw ValidationError("unknown solver: " + s);
}

nlohmann::json FunctionalEstimate::to_json() const {
  return {{"kind", kind_name(kind)},
          {"shape", shape_name(shape)},
          {"eps", eps},
          {"m", m},
          {"value", value},
          {"upper_bound", upper_bound},
          {"packing_optimality", optimality_name(packing_optimality)},
          {"candidate_refinement", candidate_refinement},
          {"orientation_count", orientation_count},
          {"candidate_count", candidate_count},
          {"family_size", family.members.size()},
          {"quadrature_tol", quadrature_tol}};
}

// --- evaluation ---------------------------------------------------------------------

void fill_weights(const ScalarField& u, std::vector<PlacementCandidate>& candidates, int m) {
  const WindowEvaluator ev(u);
  for (const auto& a : multi_indices(u.dim(), m - 1)) ev.derivative_grid(a);
  parallel_for(candidates.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) candidates[k].weight = ev.oscillation(candidates[k].window, m);
  });
}

std::vector<PlacementCandidate> weighted_candidates(const ScalarField& u, const BoxDomain& domain, ShapeKind shape,
                                                    double eps, int m, int rho, const std::vector<double>& orientations) {
  auto cands = enumerate_candidates(domain, eps, shape, rho, orientations);
  fill_weights(u, cands, m);
  return cands;
}

namespace {

FunctionalEstimate evaluate(const ScalarField& u, const BoxDomain& domain, FunctionalKind kind, ShapeKind shape, int m,
                            double eps, const FunctionalOptions& opts, const std::vector<double>& orientations) {
  require(m >= 1, "order m must be >= 1");
  require(domain.dim == u.dim(), "evaluation domain dimension mismatch");
  require(u.domain().contains(domain, 1e-9), "evaluation domain must lie inside the field's domain");
  for (int a = 0; a < u.dim(); ++a) {
    if (eps < 2.0 * u.spacing(a) * (1.0 - 1e-9)) {
      throw ValidationError("window too small for grid: eps " + std::to_string(eps) + " < 2h");
    }
  }
  int rho = opts.rho;
  if (opts.grid_lattice) {
    double h = u.spacing(0);
    for (int a = 1; a < u.dim(); ++a) h = std::min(h, u.spacing(a));
    rho = std::max(rho, static_cast<int>(std::ceil(eps / h - 1e-9)));
  }
  auto cands = weighted_candidates(u, domain, shape, eps, m, rho, orientations);
  SolverChoice solver = opts.solver;
  if (solver == SolverChoice::automatic) {
    if (u.dim() == 1) solver = SolverChoice::exact1d;
    else if (static_cast<int>(cands.size()) <= opts.exact_small_limit) solver = SolverChoice::exact_small;
    else solver = SolverChoice::greedy;
  }
  PackingSolution sol;
  switch (solver) {
    case SolverChoice::exact1d: sol = solve_exact_1d(cands); break;
    case SolverChoice::exact_small: sol = solve_exact_small(cands, opts.exact_small_limit); break;
    default: sol = solve_greedy_local(cands, opts.seed, opts.max_rounds); break;
  }
  const double scale = std::pow(eps, u.dim() - m);
  FunctionalEstimate est;
  est.kind = kind;
  est.shape = shape;
  est.eps = eps;
  est.m = m;
  est.value = scale * sol.family.total_weight;
  est.upper_bound = scale * sol.upper_bound;
  est.packing_optimality = sol.optimality;
  est.candidate_refinement = rho;
  est.orientation_count = static_cast<int>(orientations.size());
  est.candidate_count = cands.size();
  double h = 0.0;
  for (int a = 0; a < u.dim(); ++a) h = std::max(h, u.spacing(a));
  est.quadrature_tol = (h / eps) * (h / eps);
  if (opts.keep_family) est.family = std::move(sol.family);
  else est.family.total_weight = sol.family.total_weight;
  return est;
}

}  // namespace

FunctionalEstimate eval_H(const ScalarField& u, const BoxDomain& domain, ShapeKind shape, double eps,
                          const FunctionalOptions& opts) {
  if (u.dim() == 1) shape = ShapeKind::interval;
  require(u.dim() == 1 || shape != ShapeKind::interval, "interval windows need a 1D field");
  return evaluate(u, domain, FunctionalKind::H, shape, 1, eps, opts, {0.0});
}

FunctionalEstimate eval_H(const ScalarField& u, ShapeKind shape, double eps, const FunctionalOptions& opts) {
  return eval_H(u, u.domain(), shape, eps, opts);
}

FunctionalEstimate eval_K(const ScalarField& u, const BoxDomain& domain, int m, double eps,
                          const FunctionalOptions& opts) {
  if (u.dim() == 1) return evaluate(u, domain, FunctionalKind::K, ShapeKind::interval, m, eps, opts, {0.0});
  return evaluate(u, domain, FunctionalKind::K, ShapeKind::rotated_square, m, eps, opts,
                  default_orientations(opts.orientations));
}

FunctionalEstimate eval_K(const ScalarField& u, int m, double eps, const FunctionalOptions& opts) {
  return eval_K(u, u.domain(), m, eps, opts);
}

double family_value(const ScalarField& u, const PackingFamily& family, int m) {
  if (family.members.empty()) return 0.0;
  const WindowEvaluator ev(u);
  double total = 0.0;
  for (const auto& mem : family.members) total += ev.oscillation(mem.window, m);
  return std::pow(family.members.front().window.side, u.dim() - m) * total;
}

// --- ladders ----------------------------------------------------------------------

std::vector<double> LadderSpec::values() const {
  if (!eps.empty()) return eps;
  require(eps_max > 0.0 && ratio > 0.0 && ratio < 1.0 && count >= 1, "invalid geometric ladder");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = eps_max * std::pow(ratio, k);
  return out;
}

std::vector<double> EpsLadder::values() const {
  std::vector<double> v;
  for (const auto& e : estimates) v.push_back(e.value);
  return v;
}

nlohmann::json EpsLadder::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  j["m"] = m;
  j["shape"] = shape_name(shape);
  j["eps"] = eps;
  j["value"] = values();
  std::vector<std::string> opt;
  std::vector<double> ub;
  for (const auto& e : estimates) {
    opt.push_back(optimality_name(e.packing_optimality));
    ub.push_back(e.upper_bound);
  }
  j["optimality"] = opt;
  j["upper_bound"] = ub;
  j["extrapolated"] = extrapolated;
  j["extrapolation_order"] = extrapolation_order;
  j["non_cauchy"] = non_cauchy;
  return j;
}

double extrapolate(const std::vector<double>& eps, const std::vector<double>& values, double order) {
  require(eps.size() == values.size() && !eps.empty(), "extrapolation needs matching non-empty series");
  const std::size_t n = eps.size();
  const std::size_t first = n >= 3 ? n - 3 : 0;
  double mx = 0.0, mv = 0.0;
  const double cnt = static_cast<double>(n - first);
  for (std::size_t k = first; k < n; ++k) {
    mx += std::pow(eps[k], order);
    mv += values[k];
  }
  mx /= cnt;
  mv /= cnt;
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    const double dx = std::pow(eps[k], order) - mx;
    sxx += dx * dx;
    sxv += dx * (values[k] - mv);
  }
  if (sxx <= 0.0) return mv;
  return mv - (sxv / sxx) * mx;
}

bool detect_non_cauchy(const std::vector<double>& values) {
  if (values.size() < 3) return false;
  std::vector<double> d;
  double scale = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    scale = std::max(scale, std::abs(values[k]));
    if (k > 0) d.push_back(std::abs(values[k] - values[k - 1]));
  }
  const std::size_t half = d.size() / 2;
  const double head = *std::max_element(d.begin(), d.begin() + std::max<std::size_t>(half, 1));
  const double tail = *std::max_element(d.begin() + half, d.end());
  const double atol = 1e-3 * scale + 1e-12;
  return tail > atol && tail >= 0.75 * head;
}

EpsLadder sweep_eps(const ScalarField& u, FunctionalKind kind, int m, const LadderSpec& ladder, ShapeKind shape,
                    const FunctionalOptions& opts) {
  const auto eps = ladder.values();
  require(eps.size() >= 3, "an eps ladder needs at least 3 points");
  for (std::size_t k = 1; k < eps.size(); ++k) require(eps[k] < eps[k - 1], "eps ladder must be strictly decreasing");
  EpsLadder out;
  out.kind = kind;
  out.m = kind == FunctionalKind::H ? 1 : m;
  out.eps = eps;
  out.extrapolation_order = ladder.order;
  for (double e : eps) {
    out.estimates.push_back(kind == FunctionalKind::H ? eval_H(u, shape, e, opts) : eval_K(u, m, e, opts));
  }
  out.shape = out.estimates.front().shape;
  const auto v = out.values();
  out.extrapolated = extrapolate(eps, v, ladder.order);
  out.non_cauchy = detect_non_cauchy(v);
  return out;
}

// --- anisotropy -----------------------------------------------------------------------

std::vector<Point> half_circle_directions(int count) {
  require(count >= 1, "direction count must be >= 1");
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    const double t = std::numbers::pi * k / count;
    out.push_back({std::cos(t), std::sin(t)});
  }
  return out;
}

AnisotropyTable estimate_psi(ShapeKind shape, const std::vector<Point>& directions, const PsiOptions& opts) {
  require(!directions.empty(), "psi needs at least one direction");
  const int dim = shape == ShapeKind::interval ? 1 : 2;
  AnisotropyTable table;
  table.shape = shape;
  const auto domain = BoxDomain::unit_cube(dim);
  for (const auto& d : directions) {
    const double norm = dim == 1 ? std::abs(d[0]) : std::hypot(d[0], d[1]);
    require(std::abs(norm - 1.0) < 1e-9, "psi directions must be unit vectors");
    const Point nu = dim == 1 ? Point{d[0], 0.0} : d;
    const auto u = sample(AnalyticSource::linear(nu), domain, opts.resolution);
    const auto ladder = sweep_eps(u, FunctionalKind::H, 1, opts.ladder, shape, opts.functional);
    table.directions.push_back(nu);
    table.psi_values.push_back(ladder.extrapolated);
  }
  return table;
}

double AnisotropyTable::extended(const Point& tau, int dim) const {
  require(!psi_values.empty(), "empty anisotropy table");
  if (dim == 1) {
    const double t = std::abs(tau[0]);
    if (t == 0.0) return 0.0;
    double best = psi_values[0];
    for (std::size_t k = 0; k < directions.size(); ++k) {
      if ((directions[k][0] > 0) == (tau[0] > 0)) best = psi_values[k];
    }
    return t * best;
  }
  const double r = std::hypot(tau[0], tau[1]);
  if (r == 0.0) return 0.0;
  // psi(nu) = psi(-nu): interpolate in angle modulo pi
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    double a = std::atan2(directions[k][1], directions[k][0]);
    a = std::fmod(a + 2.0 * std::numbers::pi, std::numbers::pi);
    pts.push_back({a, psi_values[k]});
  }
  std::sort(pts.begin(), pts.end());
  double a = std::atan2(tau[1], tau[0]);
  a = std::fmod(a + 2.0 * std::numbers::pi, std::numbers::pi);
  const std::size_t n = pts.size();
  if (n == 1) return r * pts[0].second;
  std::size_t hi = 0;
  while (hi < n && pts[hi].first < a) ++hi;
  const auto& p1 = pts[hi % n];
  const auto& p0 = pts[(hi + n - 1) % n];
  double a0 = p0.first, a1 = p1.first;
  if (hi == 0) a0 -= std::numbers::pi;
  if (hi == n) a1 += std::numbers::pi;
  const double t = a1 > a0 ? (a - a0) / (a1 - a0) : 0.0;
  return r * ((1.0 - t) * p0.second + t * p1.second);
}

nlohmann::json AnisotropyTable::to_json() const {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : directions) dirs.push_back({d[0], d[1]});
  return {{"shape", shape_name(shape)}, {"directions", dirs}, {"psi", psi_values}};
}

double anisotropic_variation(const ScalarField& u, const AnisotropyTable& table) {
  require(table.directions.size() == table.psi_values.size() && !table.psi_values.empty(),
          "anisotropy table is inconsistent");
  if (u.dim() == 2) require(table.directions.size() >= 8, "direction table too sparse: need at least 8 directions in 2D");
  const auto grad = discrete_gradient(u);
  double total = 0.0;
  for (const auto& g : grad) total += table.extended(g, u.dim());
  return total * u.cell_volume();
}

}  // namespace oscilla
