#include "oscilla/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "oscilla/error.hpp"
#include "oscilla/parallel.hpp"

namespace oscilla {

nlohmann::json DenoiseSolution::to_json() const {
  return {{"objective", objective},
          {"lower_bound", lower_bound},
          {"gap", gap},
          {"certificate", certificate},
          {"almost_min_slack", almost_min_slack},
          {"converged", converged},
          {"iterations", iterations},
          {"objective_trace", objective_trace},
          {"lower_trace", lower_trace}};
}

double fidelity(const ScalarField& u, const ScalarField& f, double lambda, double q) {
  require(u.same_grid(f), "fidelity: grids differ");
  const auto a = u.samples();
  const auto b = f.samples();
  double s = 0.0;
  if (q == 2.0) {
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  } else if (q == 1.0) {
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), q);
  }
  return lambda * s * u.cell_volume();
}

double evaluate_Feps(const ScalarField& u, const ScalarField& f, double lambda, double q, double eps,
                     const FunctionalOptions& opts) {
  FunctionalOptions o = opts;
  o.keep_family = false;
  return eval_K(u, 1, eps, o).value + fidelity(u, f, lambda, q);
}

namespace {

// All placement candidates of one scale with their stencils. The oscillation of
// candidate k at u is sum_j w_j |v_j - sum_i w_i v_i| with v the interpolated
// node values: a seminorm of a linear image of u.
struct CandidateSet {
  std::vector<PlacementCandidate> cands;
  std::vector<WindowStencil> stencils;
  double scale = 1.0;  // eps^(n-1)
  SolverChoice solver = SolverChoice::greedy;
  FunctionalOptions opts;

  double oscillation(std::size_t k, const double* u) const {
    const auto& s = stencils[k];
    const std::size_t n = s.size();
    double mean = 0.0;
    thread_local std::vector<double> v;
    v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = s.at(u, j);
      mean += s.weights[j] * v[j];
    }
    double osc = 0.0;
    for (std::size_t j = 0; j < n; ++j) osc += s.weights[j] * std::abs(v[j] - mean);
    return osc;
  }

  // K_eps(u) and the selected family.
  std::pair<double, std::vector<std::size_t>> pack(const std::vector<double>& u) {
    parallel_for(cands.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) cands[k].weight = oscillation(k, u.data());
    });
    PackingSolution sol;
    switch (solver) {
      case SolverChoice::exact1d: sol = solve_exact_1d(cands); break;
      case SolverChoice::exact_small: sol = solve_exact_small(cands, opts.exact_small_limit); break;
      default: sol = solve_greedy_local(cands, opts.seed, opts.max_rounds); break;
    }
    std::vector<std::size_t> ids = sol.selected;
    std::sort(ids.begin(), ids.end());
    double total = 0.0;
    for (auto k : ids) total += cands[k].weight;
    return {scale * total, ids};
  }
};

CandidateSet build_candidates(const ScalarField& f, double eps, const FunctionalOptions& opts) {
  const int n = f.dim();
  for (int a = 0; a < n; ++a) {
    if (eps < 2.0 * f.spacing(a) * (1.0 - 1e-9)) {
      throw ValidationError("window too small for grid: eps " + std::to_string(eps) + " < 2h");
    }
  }
  int rho = opts.rho;
  if (opts.grid_lattice) {
    double h = f.spacing(0);
    for (int a = 1; a < n; ++a) h = std::min(h, f.spacing(a));
    rho = std::max(rho, static_cast<int>(std::ceil(eps / h - 1e-9)));
  }
  CandidateSet cs;
  cs.opts = opts;
  cs.scale = std::pow(eps, n - 1);
  if (n == 1) cs.cands = enumerate_candidates(f.domain(), eps, ShapeKind::interval, rho, {0.0});
  else cs.cands = enumerate_candidates(f.domain(), eps, ShapeKind::rotated_square, rho,
                                       default_orientations(opts.orientations));
  require(!cs.cands.empty(), "no window of size eps fits in the domain");
  cs.stencils.resize(cs.cands.size());
  parallel_for(cs.cands.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) cs.stencils[k] = build_stencil(f, cs.cands[k].window);
  });
  cs.solver = opts.solver;
  if (cs.solver == SolverChoice::automatic) {
    if (n == 1) cs.solver = SolverChoice::exact1d;
    else if (static_cast<int>(cs.cands.size()) <= opts.exact_small_limit) cs.solver = SolverChoice::exact_small;
    else cs.solver = SolverChoice::greedy;
  }
  return cs;
}

// Linear map u -> (scale * w_j (v_j - mean)) over the windows of one family, or
// a single dense row (an aggregated cut).
struct FamilyOp {
  std::vector<std::size_t> ids;
  std::vector<std::size_t> row_begin;  // per window, plus end
  std::vector<double> dense;
  std::size_t rows() const { return dense.empty() ? row_begin.back() : 1; }
};

FamilyOp make_family(const CandidateSet& cs, std::vector<std::size_t> ids) {
  FamilyOp op;
  op.ids = std::move(ids);
  op.row_begin.push_back(0);
  for (auto k : op.ids) op.row_begin.push_back(op.row_begin.back() + cs.stencils[k].size());
  return op;
}

void apply(const CandidateSet& cs, const FamilyOp& op, const double* u, double* out) {
  if (!op.dense.empty()) {
    double t = 0.0;
    for (std::size_t i = 0; i < op.dense.size(); ++i) t += op.dense[i] * u[i];
    out[0] = t;
    return;
  }
  for (std::size_t w = 0; w < op.ids.size(); ++w) {
    const auto& s = cs.stencils[op.ids[w]];
    double* r = out + op.row_begin[w];
    double mean = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      r[j] = s.at(u, j);
      mean += s.weights[j] * r[j];
    }
    for (std::size_t j = 0; j < s.size(); ++j) r[j] = cs.scale * s.weights[j] * (r[j] - mean);
  }
}

void adjoint_add(const CandidateSet& cs, const FamilyOp& op, const double* y, double* g) {
  if (!op.dense.empty()) {
    for (std::size_t i = 0; i < op.dense.size(); ++i) g[i] += op.dense[i] * y[0];
    return;
  }
  for (std::size_t w = 0; w < op.ids.size(); ++w) {
    const auto& s = cs.stencils[op.ids[w]];
    const double* r = y + op.row_begin[w];
    double total = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) total += cs.scale * s.weights[j] * r[j];
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double z = cs.scale * s.weights[j] * r[j] - s.weights[j] * total;
      const std::size_t base = j * s.taps_per_node;
      for (int t = 0; t < s.taps_per_node; ++t) g[s.tap_index[base + t]] += s.tap_weight[base + t] * z;
    }
  }
}

// Euclidean projection onto { (s_F) : sum_F max_k |s_F,k| <= 1 }.
void project_dual(std::vector<std::vector<double>>& s) {
  double total = 0.0;
  for (const auto& sf : s) {
    double mx = 0.0;
    for (double v : sf) mx = std::max(mx, std::abs(v));
    total += mx;
  }
  if (total <= 1.0) return;
  const std::size_t B = s.size();
  std::vector<std::vector<double>> sorted(B), prefix(B);
  double theta_hi = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    auto& a = sorted[b];
    a.resize(s[b].size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(s[b][k]);
    std::sort(a.begin(), a.end(), std::greater<>());
    prefix[b].assign(a.size() + 1, 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) prefix[b][k + 1] = prefix[b][k] + a[k];
    theta_hi = std::max(theta_hi, prefix[b].back());
  }
  // lambda_b(theta) solves sum_k (a_k - lambda)_+ = theta, lambda >= 0.
  auto level = [&](std::size_t b, double theta) {
    const auto& a = sorted[b];
    const auto& P = prefix[b];
    const std::size_t K = a.size();
    if (K == 0 || P[K] <= theta) return 0.0;
    // smallest j >= 1 with P_j - j * a_j+1 >= theta (a_K+1 := 0)
    std::size_t lo = 1, hi = K;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      const double next = mid < K ? a[mid] : 0.0;
      if (P[mid] - static_cast<double>(mid) * next >= theta) hi = mid;
      else lo = mid + 1;
    }
    return std::max(0.0, (P[lo] - theta) / static_cast<double>(lo));
  };
  double lo = 0.0, hi = theta_hi;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    double sum = 0.0;
    for (std::size_t b = 0; b < B; ++b) sum += level(b, mid);
    if (sum > 1.0) lo = mid;
    else hi = mid;
  }
  for (std::size_t b = 0; b < B; ++b) {
    const double lam = level(b, hi);
    for (double& v : s[b]) v = std::clamp(v, -lam, lam);
  }
}

// a sum |u - f|^q plus an optional proximal term b sum (u - c)^2.
struct Separable {
  double a;
  double q;
  const std::vector<double>* f;
  double b = 0.0;
  const std::vector<double>* c = nullptr;

  double fidelity(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = std::abs(u[i] - (*f)[i]);
      s += q == 2.0 ? d * d : q == 1.0 ? d : std::pow(d, q);
    }
    return a * s;
  }
  double value(const std::vector<double>& u) const {
    double s = fidelity(u);
    if (b > 0.0) {
      for (std::size_t i = 0; i < u.size(); ++i) s += b * (u[i] - (*c)[i]) * (u[i] - (*c)[i]);
    }
    return s;
  }

  // argmin_x (x - v)^2 / (2 tau) + a |x - f_i|^q
  double prox_fid(double v, std::size_t i, double tau) const {
    const double fi = (*f)[i];
    const double d = v - fi;
    if (q == 2.0) return fi + d / (1.0 + 2.0 * tau * a);
    const double t = tau * a;
    if (q == 1.0) return fi + (d > t ? d - t : d < -t ? d + t : 0.0);
    double lo = 0.0, hi = std::abs(d);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid + t * q * std::pow(mid, q - 1.0) > std::abs(d)) hi = mid;
      else lo = mid;
    }
    return fi + std::copysign(0.5 * (lo + hi), d);
  }

  // argmin_x (x - v)^2 / (2 tau) + b (x - c_i)^2 + a |x - f_i|^q
  double prox(double v, std::size_t i, double tau) const {
    if (b == 0.0) return prox_fid(v, i, tau);
    const double A = 1.0 / tau + 2.0 * b;
    return prox_fid((v / tau + 2.0 * b * (*c)[i]) / A, i, 1.0 / A);
  }

  // min_u <g, u> + value(u)
  double conjugate_min(const std::vector<double>& g) const {
    if (b > 0.0) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = prox_fid((*c)[i] - g[i] / (2.0 * b), i, 1.0 / (2.0 * b));
        const double d = std::abs(x - (*f)[i]);
        s += g[i] * x + b * (x - (*c)[i]) * (x - (*c)[i]) +
             a * (q == 2.0 ? d * d : q == 1.0 ? d : std::pow(d, q));
      }
      return s;
    }
    double scale = 1.0;
    if (q == 1.0) {
      double mx = 0.0;
      for (double v : g) mx = std::max(mx, std::abs(v));
      if (mx > a) scale = a / mx;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = scale * g[i];
      s += gi * (*f)[i];
      if (q == 2.0) s -= gi * gi / (4.0 * a);
      else if (q > 1.0) s -= (q - 1.0) * a * std::pow(std::abs(gi) / (q * a), q / (q - 1.0));
    }
    return s;
  }
};

// Primal-dual solver for min_u max_F ||K_F u||_1 + G(u) over a bundle of families.
class Master {
 public:
  Master(const CandidateSet& cs, std::size_t n) : cs_(cs), n_(n) {}

  std::vector<FamilyOp> families;
  std::vector<std::vector<double>> s;  // dual per family
  std::vector<double> u;

  void add(FamilyOp op) {
    s.emplace_back(op.rows(), 0.0);
    families.push_back(std::move(op));
    norm_valid_ = false;
  }
  void remove(std::size_t b) {
    families.erase(families.begin() + static_cast<long>(b));
    s.erase(s.begin() + static_cast<long>(b));
    norm_valid_ = false;
  }
  double activity(std::size_t b) const {
    double mx = 0.0;
    for (double v : s[b]) mx = std::max(mx, std::abs(v));
    return mx;
  }

  double model(const std::vector<double>& x) const {
    double best = 0.0;
    std::vector<double> r;
    for (const auto& op : families) {
      r.assign(op.rows(), 0.0);
      apply(cs_, op, x.data(), r.data());
      double t = 0.0;
      for (double v : r) t += std::abs(v);
      best = std::max(best, t);
    }
    return best;
  }

  // K^T s for the current dual.
  std::vector<double> aggregate() const {
    std::vector<double> g(n_, 0.0);
    for (std::size_t b = 0; b < families.size(); ++b) adjoint_add(cs_, families[b], s[b].data(), g.data());
    return g;
  }

  // Runs until the duality gap of min model + G is below `target` or the
  // budget is spent.
  void solve(const Separable& G, int max_iterations, double target) {
    if (!norm_valid_) estimate_norm();
    std::vector<double> ubar = u, uold(n_), g(n_);
    std::vector<double> y;
    const double L = std::max(norm_, 1e-300);
    double tau = 1.0 / L, sigma = 1.0 / L;
    const double gamma = G.q == 2.0 ? 2.0 * (G.a + G.b) : 2.0 * G.b;
    for (int it = 1; it <= max_iterations; ++it) {
      for (std::size_t b = 0; b < families.size(); ++b) {
        y.assign(families[b].rows(), 0.0);
        apply(cs_, families[b], ubar.data(), y.data());
        for (std::size_t k = 0; k < y.size(); ++k) s[b][k] += sigma * y[k];
      }
      project_dual(s);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t b = 0; b < families.size(); ++b) adjoint_add(cs_, families[b], s[b].data(), g.data());
      uold = u;
      for (std::size_t i = 0; i < n_; ++i) u[i] = G.prox(u[i] - tau * g[i], i, tau);
      double theta = 1.0;
      if (gamma > 0.0) {
        theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
        tau *= theta;
        sigma /= theta;
      }
      for (std::size_t i = 0; i < n_; ++i) ubar[i] = u[i] + theta * (u[i] - uold[i]);
      if (it % 25 == 0) {
        const double primal = model(u) + G.value(u);
        const double dual = G.conjugate_min(aggregate());
        if (primal - dual <= target) break;
      }
    }
  }

 private:
  void estimate_norm() {
    std::vector<double> x(n_), g(n_);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (double& v : x) v = U(rng);
    double nrm = 0.0;
    for (int it = 0; it < 40; ++it) {
      double xx = 0.0;
      for (double v : x) xx += v * v;
      xx = std::sqrt(xx);
      if (xx == 0.0) break;
      for (double& v : x) v /= xx;
      std::fill(g.begin(), g.end(), 0.0);
      for (const auto& op : families) {
        std::vector<double> r(op.rows());
        apply(cs_, op, x.data(), r.data());
        adjoint_add(cs_, op, r.data(), g.data());
      }
      double gg = 0.0;
      for (double v : g) gg += v * v;
      nrm = std::sqrt(std::sqrt(gg));
      x = g;
    }
    norm_ = 1.05 * nrm;
    norm_valid_ = true;
  }

  const CandidateSet& cs_;
  std::size_t n_;
  double norm_ = 1.0;
  bool norm_valid_ = false;
};

}  // namespace

DenoiseSolution solve_Feps(const DenoiseProblem& p, std::uint64_t seed) {
  require(p.lambda > 0.0 && std::isfinite(p.lambda), "lambda must be positive");
  require(p.q >= 1.0, "q must be >= 1");
  require(p.eps > 0.0, "eps must be positive");
  const auto& o = p.options;
  require(o.tol > 0.0, "tolerance must be positive");
  require(o.bundle_size >= 2, "bundle size must be >= 2");

  const ScalarField& f = p.f;
  const std::size_t N = f.size();
  const std::vector<double> fv(f.samples().begin(), f.samples().end());
  FunctionalOptions fo = o.functional;
  fo.seed = fo.seed + seed - 1;
  CandidateSet cs = build_candidates(f, p.eps, fo);
  const double a = p.lambda * f.cell_volume();
  const Separable fid{a, p.q, &fv};

  std::vector<double> u0 = fv;
  if (o.init_perturbation > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double amp = o.init_perturbation * std::max(f.max_abs(), 1e-12);
    for (double& v : u0) v += amp * U(rng);
  }

  DenoiseSolution out;
  std::vector<double> best_u;
  double best_F = std::numeric_limits<double>::infinity();
  Master master(cs, N);
  // Families are kept after the aggregate cut at index 0.
  auto consider = [&](const std::vector<double>& u) {
    auto [K, ids] = cs.pack(u);
    // every bundle family is a disjoint family too
    const double F = std::max(K, master.model(u)) + fid.fidelity(u);
    if (F < best_F) {
      best_F = F;
      best_u = u;
    }
    for (const auto& fam : master.families) {
      if (fam.dense.empty() && fam.ids == ids) return F;
    }
    if (static_cast<int>(master.families.size()) >= o.bundle_size + 1) {
      std::size_t drop = 1;
      for (std::size_t b = 1; b < master.families.size(); ++b) {
        if (master.activity(b) < 1e-14) {
          drop = b;
          break;
        }
      }
      master.remove(drop);
    }
    master.add(make_family(cs, std::move(ids)));
    return F;
  };
  {
    FamilyOp agg;
    agg.dense.assign(N, 0.0);
    master.add(std::move(agg));
  }
  // a perturbed start must not be displaced by f, or every seed follows the same path
  if (o.init_perturbation > 0.0) consider(u0);
  else consider(fv);
  master.u = best_u;

  const double fnorm = lq_norm(f, p.q);
  double lower = 0.0;
  auto required_gap = [&]() {
    if (p.q == 2.0) return p.lambda * (o.tol * fnorm) * (o.tol * fnorm);
    return o.tol * best_F;
  };
  auto certificate = [&](double gap) {
    if (p.q == 2.0) return std::sqrt(std::max(gap, 0.0) / p.lambda) / std::max(fnorm, 1e-300);
    return best_F > 0.0 ? gap / best_F : 0.0;
  };

  // Proximal weight mu: the master adds (mu/2) h^n ||u - center||^2.
  double mu = 2.0 * p.lambda;
  const double mu_min = 1e-4 * p.lambda, mu_max = 1e4 * p.lambda;
  int it = 0;
  if (best_F == 0.0) out.converged = true;
  for (; it < o.max_iterations && !out.converged; ++it) {
    // later families may certify a larger K at the center
    best_F = std::max(best_F, master.model(best_u) + fid.fidelity(best_u));
    const std::vector<double> center = best_u;
    const double F_center = best_F;
    Separable G = fid;
    G.b = 0.5 * mu * f.cell_volume();
    G.c = &center;
    const double need = required_gap();
    const double target = std::max(0.1 * need, 0.01 * (best_F - lower));
    master.solve(G, o.master_iterations, target);
    lower = std::max(lower, std::min(fid.conjugate_min(master.aggregate()), best_F));
    const double predicted = F_center - (master.model(master.u) + fid.fidelity(master.u));

    auto& agg = master.families.front().dense;
    agg = master.aggregate();
    master.s.front().assign(1, 0.0);
    for (std::size_t b = 1; b < master.s.size(); ++b) {
      for (double& v : master.s[b]) v = 0.0;
    }
    // keep the dual of the aggregate at the combined level
    master.s.front()[0] = 1.0;

    const double F = consider(master.u);
    if (F <= F_center - 0.5 * predicted) mu = std::max(0.5 * mu, mu_min);
    else if (F >= F_center) mu = std::min(2.0 * mu, mu_max);

    if (it % 10 == 9 || predicted < required_gap() || it + 1 == o.max_iterations) {
      // plain cutting-plane bound: min over u of the bundle model plus fidelity
      const auto saved_u = master.u;
      const auto saved_s = master.s;
      master.u = best_u;
      master.solve(fid, o.master_iterations, std::max(0.1 * required_gap(), 0.05 * (best_F - lower)));
      lower = std::max(lower, std::min(fid.conjugate_min(master.aggregate()), best_F));
      master.u = saved_u;
      master.s = saved_s;
    }
    const double gap = std::max(0.0, best_F - lower);
    out.objective_trace.push_back(best_F);
    out.lower_trace.push_back(lower);
    if (gap <= required_gap()) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  ScalarField u = f.with_samples(best_u);
  double F = best_F;
  if (o.truncate) {
    ScalarField t = truncate(u, f.max_abs());
    std::vector<double> tv(t.samples().begin(), t.samples().end());
    F = std::max(cs.pack(tv).first, master.model(tv)) + fid.fidelity(tv);
    u = std::move(t);
  }
  out.u = std::move(u);
  out.objective = F;
  out.lower_bound = lower;
  out.gap = std::max(0.0, F - lower);
  out.certificate = certificate(out.gap);
  out.almost_min_slack = out.gap;
  return out;
}

// --- studies -------------------------------------------------------------------------

nlohmann::json ConvergenceStudy::to_json() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& r : runs) runs_json.push_back(r.to_json());
  return {{"eps", eps},
          {"distances", distances},
          {"relative_distances", relative_distances},
          {"objectives", objectives},
          {"objective_errors", objective_errors},
          {"reference_objective", reference_objective},
          {"norms_l1", norms_l1},
          {"truncation_excess", truncation_excess},
          {"verdicts", verdicts},
          {"metrics", metrics},
          {"runs", runs_json}};
}

namespace {

void check_ladder(const std::vector<double>& eps) {
  require(!eps.empty(), "eps ladder must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    require(eps[i] > 0.0, "eps values must be positive");
    if (i > 0) require(eps[i] < eps[i - 1], "eps ladder must be strictly decreasing");
  }
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] <= v[i - 1])) return false;
  }
  return true;
}

}  // namespace

ConvergenceStudy convergence_study(const ScalarField& f, double lambda, double q, const std::vector<double>& eps,
                                   const DenoiseOptions& opts, std::uint64_t seed) {
  require(q > 1.0, "convergence_study needs q > 1");
  check_ladder(eps);
  ConvergenceStudy st;
  st.eps = eps;
  st.reference = solve_rof_reference(f, lambda, q);
  st.reference_objective = rof_objective(st.reference, f, lambda, q);
  const double fnorm = lq_norm(f, q);
  bool all_converged = true;
  for (double e : eps) {
    DenoiseProblem p{f, lambda, q, e, opts};
    DenoiseSolution sol = solve_Feps(p, seed);
    all_converged = all_converged && sol.converged;
    const double d = lq_distance(sol.u, st.reference, q);
    st.distances.push_back(d);
    st.relative_distances.push_back(fnorm > 0.0 ? d / fnorm : d);
    st.objectives.push_back(sol.objective);
    st.objective_errors.push_back(st.reference_objective > 0.0
                                      ? std::abs(sol.objective - st.reference_objective) / st.reference_objective
                                      : std::abs(sol.objective));
    st.norms_l1.push_back(lq_norm(sol.u, 1.0));
    st.truncation_excess.push_back(
        evaluate_Feps(truncate(sol.u, f.max_abs()), f, lambda, q, e, opts.functional) - sol.objective);
    st.solutions.push_back(sol.u);
    st.runs.push_back(std::move(sol));
  }
  bool tail_ok = true;
  const std::size_t from = st.distances.size() >= 3 ? st.distances.size() - 3 : 0;
  for (std::size_t i = from + 1; i < st.distances.size(); ++i) {
    tail_ok = tail_ok && st.distances[i] <= 1.1 * st.distances[i - 1];
  }
  st.verdicts["distance_tail_non_increasing"] = tail_ok;
  st.verdicts["distance_decreasing"] = decreasing(st.distances);
  st.verdicts["objective_error_decreasing"] = decreasing(st.objective_errors);
  st.verdicts["solves_converged"] = all_converged;
  st.metrics["final_relative_distance"] = st.relative_distances.back();
  st.metrics["final_objective_error"] = st.objective_errors.back();
  st.metrics["lambda"] = lambda;
  st.metrics["q"] = q;
  return st;
}

ConvergenceStudy almost_minimizer_study(const ScalarField& f, double lambda, const std::vector<double>& delta,
                                        const std::vector<double>& tau, const DenoiseOptions& opts,
                                        std::uint64_t seed) {
  check_ladder(delta);
  require(tau.size() == delta.size(), "tau schedule must match the delta schedule");
  for (double t : tau) require(t > 0.0, "tau values must be positive");
  ConvergenceStudy st;
  st.eps = delta;
  st.reference = solve_rof_reference(f, lambda, 1.0);
  st.reference_objective = rof_objective(st.reference, f, lambda, 1.0);
  const MinimizerSet set = rof_minimizer_set(st.reference, f, lambda);
  const double bound = f.max_abs() * f.domain().volume();
  bool trunc_ok = true;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    DenoiseOptions o = opts;
    o.tol = tau[i];
    o.truncate = false;
    DenoiseSolution sol = solve_Feps(DenoiseProblem{f, lambda, 1.0, delta[i], o}, seed);
    const ScalarField t = truncate(sol.u, f.max_abs());
    const double Ft = evaluate_Feps(t, f, lambda, 1.0, delta[i], opts.functional);
    const double Fu = evaluate_Feps(sol.u, f, lambda, 1.0, delta[i], opts.functional);
    st.truncation_excess.push_back(Ft - Fu);
    trunc_ok = trunc_ok && Ft <= Fu + 1e-10 * std::max(1.0, std::abs(Fu));
    st.distances.push_back(set.distance(t));
    st.relative_distances.push_back(st.distances.back() / std::max(lq_norm(f, 1.0), 1e-300));
    st.objectives.push_back(Ft);
    st.objective_errors.push_back(st.reference_objective > 0.0
                                      ? std::abs(Ft - st.reference_objective) / st.reference_objective
                                      : std::abs(Ft));
    st.norms_l1.push_back(lq_norm(t, 1.0));
    sol.u = t;
    sol.objective = Ft;
    st.solutions.push_back(t);
    st.runs.push_back(std::move(sol));
  }
  double running = st.distances.front();
  bool improves = false;
  for (std::size_t i = 1; i < st.distances.size(); ++i) {
    if (st.distances[i] < running) improves = true;
    running = std::min(running, st.distances[i]);
  }
  st.verdicts["distance_decreasing_subsequence"] =
      (improves || st.distances.front() <= 1e-12) && st.distances.back() <= st.distances.front();
  st.verdicts["truncation_never_increases"] = trunc_ok;
  st.verdicts["equibounded_l1"] =
      *std::max_element(st.norms_l1.begin(), st.norms_l1.end()) <= bound * (1.0 + 1e-9) + 1e-12;
  st.metrics["l1_bound"] = bound;
  st.metrics["lambda"] = lambda;
  st.metrics["q"] = 1.0;
  st.metrics["tau"] = tau;
  return st;
}

}  // namespace oscilla
