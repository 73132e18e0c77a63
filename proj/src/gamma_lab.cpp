#include "oscilla/gamma_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "oscilla/error.hpp"

namespace oscilla {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

nlohmann::json ladder_json(const LadderSpec& l) {
  return {{"eps", l.values()}, {"order", l.order}};
}

nlohmann::json options_json(const FunctionalOptions& o) {
  return {{"rho", o.rho},       {"orientations", o.orientations}, {"solver", solver_name(o.solver)},
          {"seed", o.seed},     {"max_rounds", o.max_rounds},     {"grid_lattice", o.grid_lattice}};
}

// largest value over the last half of the series
double tail_max(const std::vector<double>& v) {
  return *std::max_element(v.begin() + static_cast<long>(v.size() / 2), v.end());
}
double tail_min(const std::vector<double>& v) {
  return *std::min_element(v.begin() + static_cast<long>(v.size() / 2), v.end());
}

std::vector<double> uniform_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = U(rng);
  return out;
}

// A field on u's grid; mollified outputs can differ from the domain by rounding.
ScalarField on_grid_of(const ScalarField& like, const ScalarField& v) {
  require(v.resolution() == like.resolution(), "grid mismatch");
  return ScalarField(like.domain(), like.resolution(), std::vector<double>(v.samples().begin(), v.samples().end()));
}

}  // namespace

const Series& ExperimentReport::get(const std::string& name) const {
  for (const auto& s : series) {
    if (s.name == name) return s;
  }
  throw ValidationError("no series named " + name);
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& x : series) s.push_back({{"name", x.name}, {"eps", x.eps}, {"values", x.values}});
  return {{"id", id},
          {"inputs", inputs},
          {"series", s},
          {"reference", reference},
          {"reference_provenance", reference_provenance},
          {"verdicts", verdicts},
          {"metrics", metrics},
          {"runtime_seconds", runtime_seconds}};
}

// --- reference quadratures -------------------------------------------------------------

double derivative_mass(const AnalyticSource& source, const BoxDomain& domain, int m, int resolution) {
  require(source.derivative_order_supported() >= m, "derivative mass needs exact derivatives of order m");
  const int dim = domain.dim;
  const int ny = dim > 1 ? resolution : 1;
  const double hx = domain.extent(0) / resolution;
  const double hy = dim > 1 ? domain.extent(1) / resolution : 1.0;
  std::vector<MultiIndex> top;
  for (const auto& a : multi_indices(dim, m)) {
    if (a[0] + a[1] == m) top.push_back(a);
  }
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Point x{domain.lower[0] + (i + 0.5) * hx, dim > 1 ? domain.lower[1] + (j + 0.5) * hy : 0.0};
      double s = 0.0;
      for (const auto& a : top) {
        const double d = source.derivative(x, a, dim);
        s += factorial(m) / (factorial(a[0]) * factorial(a[1])) * d * d;
      }
      total += std::sqrt(s);
    }
  }
  return total * hx * hy;
}

double axis_cube_psi(const Point& nu) {
  const double a = std::max(std::abs(nu[0]), std::abs(nu[1]));
  const double b = std::min(std::abs(nu[0]), std::abs(nu[1]));
  if (a == 0.0) return 0.0;
  return 0.25 * a + b * b / (12.0 * a);
}

double axis_cube_psi_integral(const AnalyticSource& source, const BoxDomain& domain, int resolution) {
  require(source.derivative_order_supported() >= 1, "psi integral needs exact gradients");
  const int dim = domain.dim;
  const int ny = dim > 1 ? resolution : 1;
  const double hx = domain.extent(0) / resolution;
  const double hy = dim > 1 ? domain.extent(1) / resolution : 1.0;
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Point x{domain.lower[0] + (i + 0.5) * hx, dim > 1 ? domain.lower[1] + (j + 0.5) * hy : 0.0};
      const Point g{source.derivative(x, {1, 0}, dim), dim > 1 ? source.derivative(x, {0, 1}, dim) : 0.0};
      total += axis_cube_psi(g);
    }
  }
  return total * hx * hy;
}

// --- experiments ------------------------------------------------------------------------

ExperimentReport pointwise_limit_experiment(const PointwiseSpec& spec) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.id = "pointwise_limit";
  rep.inputs = {{"source", spec.source.to_json()},
                {"domain", {{"lower", spec.domain.lower}, {"upper", spec.domain.upper}, {"dim", spec.domain.dim}}},
                {"resolution", spec.resolution},
                {"kind", kind_name(spec.kind)},
                {"m", spec.m},
                {"shape", shape_name(spec.shape)},
                {"ladder", ladder_json(spec.ladder)},
                {"functional", options_json(spec.functional)},
                {"tol", spec.tol}};
  require(spec.source.derivative_order_supported() >= spec.m, "pointwise experiment needs a smooth source");
  const auto u = sample(spec.source, spec.domain, spec.resolution);
  const auto ladder = sweep_eps(u, spec.kind, spec.m, spec.ladder, spec.shape, spec.functional);
  rep.series.push_back({"value", ladder.eps, ladder.values()});
  if (spec.reference) {
    rep.reference = *spec.reference;
    rep.reference_provenance = "supplied";
  } else if (spec.kind == FunctionalKind::H) {
    if (spec.domain.dim == 1 || spec.shape == ShapeKind::axis_box) {
      rep.reference = axis_cube_psi_integral(spec.source, spec.domain);
      rep.reference_provenance = "quadrature of psi(grad u) with the closed-form axis-cube anisotropy";
    } else {
      PsiOptions po;
      po.functional = spec.functional;
      const auto table = estimate_psi(spec.shape, half_circle_directions(16), po);
      const int n = 512;
      const double hx = spec.domain.extent(0) / n, hy = spec.domain.extent(1) / n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const Point x{spec.domain.lower[0] + (i + 0.5) * hx, spec.domain.lower[1] + (j + 0.5) * hy};
          acc += table.extended({spec.source.derivative(x, {1, 0}, 2), spec.source.derivative(x, {0, 1}, 2)}, 2);
        }
      }
      rep.reference = acc * hx * hy;
      rep.reference_provenance = "quadrature of psi(grad u) with an estimated 16-direction anisotropy table";
    }
  } else {
    const double beta = spec.m == 1 ? 0.25 : beta_constant(spec.domain.dim, spec.m).value;
    rep.reference = beta * derivative_mass(spec.source, spec.domain, spec.m);
    rep.reference_provenance = "beta(n,m) times quadrature of |D^m u|";
    rep.metrics["beta"] = beta;
  }
  rep.metrics["extrapolated"] = ladder.extrapolated;
  rep.metrics["ladder"] = ladder.to_json();
  const double rel = std::abs(ladder.extrapolated - rep.reference) / std::max(std::abs(rep.reference), 1e-300);
  rep.metrics["relative_error"] = rel;
  rep.verdicts["within_tolerance"] = rep.reference == 0.0 ? std::abs(ladder.extrapolated) <= spec.tol : rel <= spec.tol;
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport recovery_sequence_experiment(const RecoverySpec& spec) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.id = "recovery_sequence";
  rep.inputs = {{"source", spec.source.to_json()},
                {"domain", {{"lower", spec.domain.lower}, {"upper", spec.domain.upper}, {"dim", spec.domain.dim}}},
                {"resolution", spec.resolution},
                {"ladder", ladder_json(spec.ladder)},
                {"total_variation", spec.total_variation},
                {"sigma_coeff", spec.sigma_coeff},
                {"sigma_power", spec.sigma_power},
                {"mollify", spec.mollify},
                {"functional", options_json(spec.functional)},
                {"tol", spec.tol}};
  const auto eps = spec.ladder.values();
  require(eps.size() >= 2, "recovery experiment needs at least two ladder points");
  const auto u = sample(spec.source, spec.domain, spec.resolution);
  const int dim = spec.domain.dim;
  // sample on an enlarged box so that the mollified field covers the whole domain
  const double sigma_max = spec.sigma_coeff * std::pow(*std::max_element(eps.begin(), eps.end()), spec.sigma_power);
  int pad = 0;
  BoxDomain big = spec.domain;
  Resolution big_res = u.resolution();
  if (spec.mollify) {
    pad = static_cast<int>(std::ceil(sigma_max / std::min(u.spacing(0), dim > 1 ? u.spacing(1) : u.spacing(0)))) + 2;
    for (int a = 0; a < dim; ++a) {
      big.lower[a] -= pad * u.spacing(a);
      big.upper[a] += pad * u.spacing(a);
      big_res[a] += 2 * pad;
    }
  }
  const auto ubig = spec.mollify ? sample(spec.source, big, big_res) : u;
  Series kseries{"K", eps, {}}, dseries{"L1_distance", eps, {}}, sseries{"sigma", eps, {}};
  for (double e : eps) {
    const double sigma = spec.sigma_coeff * std::pow(e, spec.sigma_power);
    const ScalarField ue = spec.mollify ? on_grid_of(u, mollify(ubig, Mollifier{sigma}, spec.domain)) : u;
    kseries.values.push_back(eval_K(ue, 1, e, spec.functional).value);
    dseries.values.push_back(lq_distance(ue, u, 1.0));
    sseries.values.push_back(spec.mollify ? sigma : 0.0);
  }
  rep.reference = 0.25 * spec.total_variation;
  rep.reference_provenance = "(1/4)|Du| with beta(n,1) = 1/4";
  const double limsup = tail_max(kseries.values);
  rep.metrics["limsup"] = limsup;
  bool decreasing = true;
  for (std::size_t k = 1; k < dseries.values.size(); ++k) {
    decreasing = decreasing && dseries.values[k] <= dseries.values[k - 1] * (1.0 + 1e-9) + 1e-15;
  }
  const double final_d = dseries.values.back();
  const double bound = 2.0 * sseries.values.back() * spec.total_variation + 1e-12;
  rep.metrics["final_L1_distance"] = final_d;
  rep.metrics["final_L1_bound"] = bound;
  rep.verdicts["limsup_bounded"] = limsup <= rep.reference + spec.tol;
  rep.verdicts["converges_in_L1"] = decreasing && final_d <= bound;
  rep.series = {kseries, dseries, sseries};
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport liminf_experiment(const LiminfSpec& spec) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.id = "liminf";
  rep.inputs = {{"source", spec.source.to_json()},
                {"domain", {{"lower", spec.domain.lower}, {"upper", spec.domain.upper}, {"dim", spec.domain.dim}}},
                {"resolution", spec.resolution},
                {"m", spec.m},
                {"ladder", ladder_json(spec.ladder)},
                {"amplitude_coeff", spec.amplitude_coeff},
                {"seed", spec.seed},
                {"functional", options_json(spec.functional)},
                {"tol", spec.tol}};
  const auto u = sample(spec.source, spec.domain, spec.resolution);
  const auto noise = uniform_noise(u.size(), spec.seed);
  const auto eps = spec.ladder.values();
  Series ks{"K", eps, {}};
  for (double e : eps) {
    const double a = spec.amplitude_coeff * e;
    std::vector<double> s(u.samples().begin(), u.samples().end());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += a * noise[k];
    ks.values.push_back(eval_K(u.with_samples(std::move(s)), spec.m, e, spec.functional).value);
  }
  if (spec.reference) {
    rep.reference = *spec.reference;
    rep.reference_provenance = "supplied";
  } else {
    const double beta = spec.m == 1 ? 0.25 : beta_constant(u.dim(), spec.m).value;
    rep.reference = beta * discrete_variation(u, spec.m);
    rep.reference_provenance = "beta(n,m) times the discrete variation of the unperturbed field";
  }
  const double liminf = tail_min(ks.values);
  rep.metrics["tail_min"] = liminf;
  rep.verdicts["liminf_bounded_below"] = liminf >= rep.reference * (1.0 - spec.tol);
  rep.series = {ks};
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

double measure_poincare_constant(int trials, std::uint64_t seed, int resolution) {
  const auto domain = BoxDomain::interval(0.0, 1.0);
  const double h = 1.0 / resolution;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  FunctionalOptions opts;
  opts.grid_lattice = true;
  opts.keep_family = false;
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(resolution);
    if (t % 2 == 0) {
      const int cut = 1 + static_cast<int>(U(rng) * (resolution - 2));
      const double jump = 0.5 + U(rng);
      for (int i = 0; i < resolution; ++i) s[i] = i < cut ? 0.0 : jump;
    } else {
      const int pieces = 2 + static_cast<int>(U(rng) * 12);
      double level = U(rng);
      int next = 0;
      for (int i = 0; i < resolution; ++i) {
        if (i == next) {
          level = 2.0 * U(rng) - 1.0;
          next = i + 1 + static_cast<int>(U(rng) * 2.0 * resolution / pieces);
        }
        s[i] = level;
      }
    }
    const ScalarField u(domain, {resolution, 1}, std::move(s));
    const double tv = discrete_variation(u, 1);
    if (tv <= 0.0) continue;
    for (double e : {0.25, 0.125, 0.0625, 0.03125}) {
      if (e < 2.0 * h) continue;
      best = std::max(best, eval_H(u, ShapeKind::interval, e, opts).value / tv);
    }
  }
  return best;
}

ExperimentReport cantor_experiment(const CantorSpec& spec) {
  const auto t0 = Clock::now();
  require(spec.octaves >= 4 && spec.per_octave >= 4, "cantor ladder needs >= 4 octaves with >= 4 points each");
  ExperimentReport rep;
  rep.id = "cantor";
  std::vector<double> eps;
  for (int k = 0; k <= spec.octaves * spec.per_octave; ++k) {
    eps.push_back(spec.eps_max * std::pow(2.0, -static_cast<double>(k) / spec.per_octave));
  }
  rep.inputs = {{"depth", spec.depth},
                {"resolution", spec.resolution},
                {"eps", eps},
                {"ladder_rule", "geometric, ratio 2^(-1/per_octave)"},
                {"octaves", spec.octaves},
                {"per_octave", spec.per_octave},
                {"rho", spec.rho},
                {"constant_field", spec.constant_field},
                {"seed", spec.seed},
                {"control", "sin(2 pi x) on (0,1)"}};
  const auto domain = BoxDomain::interval(0.0, 1.0);
  const auto u = spec.constant_field ? constant_field(domain, {spec.resolution, 1}, 0.0)
                                     : sample(AnalyticSource::cantor_vitali(spec.depth), domain, spec.resolution);
  const auto ctrl = sample(AnalyticSource::sinusoid({SinusoidMode{1.0, {1.0, 0.0}, {0.0, 0.0}}}), domain, spec.resolution);
  FunctionalOptions opts;
  opts.rho = spec.rho;
  opts.solver = SolverChoice::exact1d;
  opts.keep_family = false;
  Series cs{"cantor", eps, {}}, ss{"control", eps, {}};
  for (double e : eps) {
    cs.values.push_back(eval_K(u, 1, e, opts).value);
    ss.values.push_back(eval_K(ctrl, 1, e, opts).value);
  }
  const std::size_t window = static_cast<std::size_t>(2 * spec.per_octave + 1);
  const auto spread = [&](const std::vector<double>& v) {
    const auto first = v.end() - static_cast<long>(std::min(window, v.size()));
    return *std::max_element(first, v.end()) - *std::min_element(first, v.end());
  };
  const double cspread = spread(cs.values);
  const double sspread = spread(ss.values);
  const double c = measure_poincare_constant(20, spec.seed);
  const double tv = spec.constant_field ? 0.0 : 1.0;
  bool bounded = true;
  for (double v : cs.values) bounded = bounded && v >= 0.0 && v <= c * tv + 1e-9;
  rep.reference = c * tv;
  rep.reference_provenance = "measured Poincare constant times |Du| (= 1 for the Cantor-Vitali function)";
  rep.metrics["cantor_spread"] = cspread;
  rep.metrics["control_spread"] = sspread;
  rep.metrics["poincare_constant"] = c;
  rep.metrics["cantor_successive_difference_flag"] = detect_non_cauchy(cs.values);
  rep.verdicts["non_cauchy"] = cspread > 5.0 * sspread && cspread > 1e-12;
  rep.verdicts["control_non_cauchy"] = detect_non_cauchy(ss.values);
  rep.verdicts["within_poincare_bound"] = bounded;
  rep.series = {cs, ss};
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

double growth_exponent(const std::vector<double>& eps, const std::vector<double>& values) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (values[k] > 0.0) {
      xs.push_back(std::log(1.0 / eps[k]));
      ys.push_back(std::log(values[k]));
    }
  }
  if (xs.size() < 2) return 0.0;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

ExperimentReport bv_characterization_probe(const ProbeSpec& spec) {
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.id = "bv_probe";
  rep.inputs = {{"resolution", spec.resolution},
                {"ladder", ladder_json(spec.ladder)},
                {"seed", spec.seed},
                {"functional", options_json(spec.functional)},
                {"members", {"step", "white_noise_amplitude_1", "zero"}}};
  const auto domain = BoxDomain::interval(-0.5, 0.5);
  const auto step = sample(AnalyticSource::step({1.0, 0.0}, 0.0), domain, spec.resolution);
  const auto noise = step.with_samples(uniform_noise(step.size(), spec.seed));
  const auto zero = constant_field(domain, {spec.resolution, 1}, 0.0);
  const auto eps = spec.ladder.values();
  FunctionalOptions opts = spec.functional;
  opts.keep_family = false;
  for (const auto& [name, f] : {std::pair<std::string, const ScalarField*>{"step", &step}, {"white_noise", &noise}, {"zero", &zero}}) {
    Series s{name, eps, {}};
    for (double e : eps) s.values.push_back(eval_H(*f, ShapeKind::interval, e, opts).value);
    rep.metrics[name + "_growth_exponent"] = growth_exponent(eps, s.values);
    rep.series.push_back(s);
  }
  const auto& st = rep.get("step").values;
  rep.verdicts["step_bounded"] = *std::max_element(st.begin(), st.end()) <= 0.5 + 1e-9 &&
                                 rep.metrics["step_growth_exponent"].get<double>() < 0.25;
  rep.verdicts["noise_grows"] = rep.metrics["white_noise_growth_exponent"].get<double>() > 0.5;
  const auto& z = rep.get("zero").values;
  rep.verdicts["zero_is_zero"] = std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; });
  rep.reference = 0.5;
  rep.reference_provenance = "Poincare bound (1/2)|Du| for the unit step";
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace oscilla
