#include "oscilla/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "oscilla/denoise.hpp"
#include "oscilla/error.hpp"
#include "oscilla/field_io.hpp"
#include "oscilla/functionals.hpp"
#include "oscilla/gamma_lab.hpp"

namespace oscilla {

namespace {

using KeyList = std::vector<std::pair<std::string, std::string>>;

const KeyList& packing_keys() {
  static const KeyList k = {{"rho", "4"},          {"orientations", "16"}, {"solver", "auto"},
                            {"exact_small_limit", "40"}, {"max_rounds", "50"}, {"grid_lattice", "false"}};
  return k;
}

const KeyList& field_keys() {
  static const KeyList k = {{"input", ""},      {"source", ""},        {"dim", "1"},     {"resolution", "256"},
                            {"lower", ""},      {"upper", ""},         {"normal", "1,0"}, {"threshold", "0"},
                            {"frequency", "1,1"}, {"noise", "0"},      {"noise_seed", "1"}, {"cantor_depth", "40"}};
  return k;
}

KeyList concat(std::initializer_list<const KeyList*> parts) {
  KeyList out;
  for (auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

const std::set<std::string>& known_commands() {
  static const std::set<std::string> c = {"eval-h", "eval-k", "beta", "psi", "gamma", "denoise", "pack-bench", "report"};
  return c;
}

FunctionalOptions functional_options(const RunConfig& c) {
  FunctionalOptions o;
  o.rho = c.get_int("rho");
  o.orientations = c.get_int("orientations");
  o.solver = parse_solver(c.get("solver"));
  o.exact_small_limit = c.get_int("exact_small_limit");
  o.max_rounds = c.get_int("max_rounds");
  o.grid_lattice = c.get_bool("grid_lattice");
  o.seed = c.get_u64("seed");
  require(o.rho >= 1, "rho must be >= 1");
  require(o.orientations >= 1, "orientations must be >= 1");
  return o;
}

Point point_of(const RunConfig& c, const std::string& key) {
  auto v = c.get_list(key);
  require(v.size() <= 2, "key '" + key + "': at most two components");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

BoxDomain domain_of(const RunConfig& c, int dim) {
  Point lo{0.0, 0.0}, hi{1.0, 1.0};
  if (!c.get("lower", "").empty()) lo = point_of(c, "lower");
  if (!c.get("upper", "").empty()) hi = point_of(c, "upper");
  BoxDomain d = dim == 1 ? BoxDomain::interval(lo[0], hi[0]) : BoxDomain::rectangle(lo, hi);
  d.validate();
  return d;
}

AnalyticSource source_of(const RunConfig& c, const std::string& name, int dim) {
  if (name == "linear") {
    Point n = point_of(c, "normal");
    const double len = std::hypot(n[0], dim == 2 ? n[1] : 0.0);
    require(len > 0.0, "normal must be non-zero");
    return AnalyticSource::linear({n[0] / len, dim == 2 ? n[1] / len : 0.0});
  }
  if (name == "step") {
    Point n = point_of(c, "normal");
    const double len = std::hypot(n[0], dim == 2 ? n[1] : 0.0);
    require(len > 0.0, "normal must be non-zero");
    return AnalyticSource::step({n[0] / len, dim == 2 ? n[1] / len : 0.0}, c.get_double("threshold"));
  }
  if (name == "sinusoid") {
    const Point fr = point_of(c, "frequency");
    SinusoidMode mode;
    mode.frequency = {fr[0], dim == 2 ? fr[1] : 0.0};
    return AnalyticSource::sinusoid({mode});
  }
  if (name == "quadratic") return AnalyticSource::polynomial({{{2, 0}, 0.5}});
  if (name == "cantor") return AnalyticSource::cantor_vitali(c.get_int("cantor_depth"));
  throw ValidationError("unknown source '" + name + "' (linear, step, sinusoid, quadratic, cantor)");
}

ScalarField add_noise(const ScalarField& u, const RunConfig& c) {
  const double sigma = c.get_double("noise");
  require(sigma >= 0.0, "noise must be >= 0");
  if (sigma == 0.0) return u;
  std::mt19937_64 rng(c.get_u64("noise_seed"));
  std::normal_distribution<double> N(0.0, sigma * std::max(u.max_abs(), 1e-12));
  std::vector<double> v(u.samples().begin(), u.samples().end());
  for (double& x : v) x += N(rng);
  return u.with_samples(std::move(v));
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- commands -------------------------------------------------------------------

Report cmd_eval(const RunConfig& c, std::ostream& out, FunctionalKind kind) {
  const ScalarField u = field_from_config(c);
  const FunctionalOptions fo = functional_options(c);
  const auto eps = c.get_list("eps");
  Report r;
  r.kind = kind_name(kind) == "H" ? "eval-h" : "eval-k";
  const int m = kind == FunctionalKind::K ? c.get_int("m") : 1;
  ShapeKind shape = ShapeKind::interval;
  if (kind == FunctionalKind::H) {
    const std::string s = c.get("shape");
    shape = s == "auto" ? (u.dim() == 1 ? ShapeKind::interval : ShapeKind::axis_box) : parse_shape(s);
  } else if (u.dim() == 2) {
    shape = ShapeKind::rotated_square;
  }
  std::vector<FunctionalEstimate> est;
  for (double e : eps) {
    est.push_back(kind == FunctionalKind::H ? eval_H(u, shape, e, fo) : eval_K(u, m, e, fo));
    const auto& x = est.back();
    out << "eps=" << fmt(e) << " " << kind_name(kind) << "=" << fmt(x.value) << " upper_bound=" << fmt(x.upper_bound)
        << " optimality=" << optimality_name(x.packing_optimality) << "\n";
  }
  Series s{kind_name(kind), {}, {}};
  nlohmann::json rows = nlohmann::json::array();
  for (auto& x : est) {
    s.eps.push_back(x.eps);
    s.values.push_back(x.value);
    x.family.members.clear();
    rows.push_back(x.to_json());
  }
  r.result["estimates"] = rows;
  r.result["shape"] = shape_name(shape);
  r.result["m"] = m;
  if (eps.size() >= 3) {
    bool decreasing = true;
    for (std::size_t i = 1; i < eps.size(); ++i) decreasing = decreasing && eps[i] < eps[i - 1];
    if (decreasing) {
      const double lim = extrapolate(s.eps, s.values, c.get_double("order"));
      r.result["extrapolated"] = lim;
      r.result["non_cauchy"] = detect_non_cauchy(s.values);
      out << "extrapolated=" << fmt(lim) << "\n";
    }
  }
  r.series.push_back(std::move(s));
  r.plot_title = kind_name(kind) + "_eps ladder";
  return r;
}

Report cmd_beta(const RunConfig& c, std::ostream& out) {
  BetaSearch search;
  search.starts = c.get_int("starts");
  search.iterations = c.get_int("iterations");
  search.seed = c.get_u64("seed");
  const int n = c.get_int("n"), m = c.get_int("m");
  const auto res = beta_constant(n, m, c.get_int("level"), search);
  out << "beta(" << n << "," << m << ") = " << std::setprecision(10) << res.value << "\n";
  Report r;
  r.kind = "beta";
  r.result = res.to_json();
  return r;
}

Report cmd_psi(const RunConfig& c, std::ostream& out) {
  PsiOptions po;
  po.resolution = c.get_int("resolution");
  po.ladder.eps = c.get_list("eps");
  po.ladder.order = c.get_double("order");
  po.functional = functional_options(c);
  const ShapeKind shape = parse_shape(c.get("shape"));
  const auto dirs = half_circle_directions(c.get_int("directions"));
  const auto table = estimate_psi(shape, dirs, po);
  Report r;
  r.kind = "psi";
  r.result = table.to_json();
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const double angle = std::atan2(dirs[k][1], dirs[k][0]);
    out << "angle=" << fmt(angle) << " psi=" << fmt(table.psi_values[k]) << "\n";
  }
  return r;
}

Report cmd_gamma(const RunConfig& c, std::ostream& out) {
  const std::string ex = c.get("experiment");
  const FunctionalOptions fo = functional_options(c);
  const bool has_eps = !c.get("eps", "").empty();
  const bool has_res = c.get("resolution", "auto") != "auto";
  ExperimentReport er;
  if (ex == "pointwise") {
    PointwiseSpec s;
    const int dim = c.get_int("dim");
    s.domain = domain_of(c, dim);
    s.source = source_of(c, c.get("source", "linear").empty() ? "linear" : c.get("source", "linear"), dim);
    s.kind = parse_kind(c.get("kind"));
    s.m = c.get_int("m");
    s.shape = dim == 1 ? ShapeKind::interval
                       : (s.kind == FunctionalKind::K ? ShapeKind::rotated_square : parse_shape(c.get("shape") == "auto" ? "axis_box" : c.get("shape")));
    if (has_res) s.resolution = c.get_int("resolution");
    if (has_eps) s.ladder.eps = c.get_list("eps");
    s.ladder.order = c.get_double("order");
    s.functional = fo;
    s.tol = c.get_double("tol");
    er = pointwise_limit_experiment(s);
  } else if (ex == "recovery") {
    RecoverySpec s;
    if (has_res) s.resolution = c.get_int("resolution");
    if (has_eps) s.ladder.eps = c.get_list("eps");
    s.functional = fo;
    er = recovery_sequence_experiment(s);
  } else if (ex == "liminf") {
    LiminfSpec s;
    if (has_res) s.resolution = c.get_int("resolution");
    if (has_eps) s.ladder.eps = c.get_list("eps");
    s.seed = c.get_u64("seed");
    s.functional = fo;
    er = liminf_experiment(s);
  } else if (ex == "cantor") {
    CantorSpec s;
    s.depth = c.get_int("cantor_depth");
    if (has_res) s.resolution = c.get_int("resolution");
    s.seed = c.get_u64("seed");
    er = cantor_experiment(s);
  } else if (ex == "probe") {
    ProbeSpec s;
    if (has_res) s.resolution = c.get_int("resolution");
    if (has_eps) s.ladder.eps = c.get_list("eps");
    s.seed = c.get_u64("seed");
    s.functional = fo;
    er = bv_characterization_probe(s);
  } else {
    throw ValidationError("unknown experiment '" + ex + "' (pointwise, recovery, liminf, cantor, probe)");
  }
  for (const auto& [name, ok] : er.verdicts) out << name << "=" << (ok ? "true" : "false") << "\n";
  out << "passed=" << (er.passed() ? "true" : "false") << "\n";
  Report r;
  r.kind = "gamma-" + ex;
  r.result = er.to_json();
  r.series = er.series;
  r.plot_title = er.id;
  return r;
}

Report cmd_denoise(const RunConfig& c, std::ostream& out) {
  const ScalarField f = field_from_config(c);
  DenoiseOptions o;
  o.functional = functional_options(c);
  o.max_iterations = c.get_int("max_iterations");
  o.master_iterations = c.get_int("master_iterations");
  o.tol = c.get_double("tol");
  o.bundle_size = c.get_int("bundle");
  o.truncate = c.get_bool("truncate");
  o.init_perturbation = c.get_double("perturb");
  const double lambda = c.get_double("lambda"), q = c.get_double("q");
  const auto eps = c.get_list("eps");
  const std::uint64_t seed = c.get_u64("seed");
  std::string study = c.get("study");
  if (study == "auto") study = eps.size() == 1 ? "single" : (q == 1.0 ? "almost" : "convergence");
  const std::filesystem::path dir = c.get("out");
  std::filesystem::create_directories(dir);
  const std::string ext = c.get("input", "").empty() ? ".csv" : std::filesystem::path(c.get("input")).extension().string();
  const std::string stem = "denoise-" + c.hash();
  Report r;
  r.kind = "denoise";
  auto save = [&](const ScalarField& u, double e) {
    auto path = dir / (stem + "-eps" + fmt(e) + ext);
    write_field(u, path);
    return path.filename().string();
  };
  auto traces = [&](const DenoiseSolution& s, double e) {
    std::vector<double> idx;
    for (std::size_t i = 0; i < s.objective_trace.size(); ++i) idx.push_back(static_cast<double>(i + 1));
    r.series.push_back({"objective_eps" + fmt(e), idx, s.objective_trace});
    r.series.push_back({"lower_eps" + fmt(e), idx, s.lower_trace});
  };
  if (study == "single") {
    require(eps.size() == 1, "study=single takes one eps");
    const auto sol = solve_Feps(DenoiseProblem{f, lambda, q, eps[0], o}, seed);
    r.result = sol.to_json();
    r.result["output"] = save(sol.u, eps[0]);
    traces(sol, eps[0]);
    out << "F_eps=" << fmt(sol.objective) << " lower_bound=" << fmt(sol.lower_bound)
        << " certificate=" << fmt(sol.certificate) << " converged=" << (sol.converged ? "true" : "false") << "\n";
    if (!sol.converged) {
      r.result["flag"] = "iteration cap reached; best iterate returned";
    }
  } else if (study == "convergence" || study == "almost") {
    ConvergenceStudy st;
    if (study == "convergence") {
      st = convergence_study(f, lambda, q, eps, o, seed);
    } else {
      std::vector<double> tau = c.get("tau", "").empty() ? std::vector<double>(eps.size(), o.tol) : c.get_list("tau");
      st = almost_minimizer_study(f, lambda, eps, tau, o, seed);
    }
    r.result = st.to_json();
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < eps.size(); ++i) files.push_back(save(st.solutions[i], eps[i]));
    r.result["outputs"] = files;
    r.result["reference_output"] = save(st.reference, 0.0);
    r.series.push_back({"distance", st.eps, st.distances});
    r.series.push_back({"objective_error", st.eps, st.objective_errors});
    for (std::size_t i = 0; i < eps.size(); ++i) {
      out << "eps=" << fmt(eps[i]) << " distance=" << fmt(st.distances[i]) << " relative=" << fmt(st.relative_distances[i])
          << " F_eps=" << fmt(st.objectives[i]) << "\n";
    }
    out << "F_ref=" << fmt(st.reference_objective) << "\n";
    for (const auto& [name, ok] : st.verdicts) out << name << "=" << (ok ? "true" : "false") << "\n";
  } else {
    throw ValidationError("unknown study '" + study + "' (single, convergence, almost)");
  }
  r.plot_title = "denoise";
  return r;
}

// Brute force over all subsets; fine for the bench sizes.
double brute_force(const std::vector<PlacementCandidate>& c) {
  const std::size_t n = c.size();
  std::vector<std::uint32_t> conflict(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && !disjoint(c[a].window, c[b].window)) conflict[a] |= 1u << b;
    }
  }
  double best = 0.0;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    double w = 0.0;
    bool ok = true;
    for (std::size_t a = 0; a < n && ok; ++a) {
      if (s >> a & 1u) {
        ok = (conflict[a] & s) == 0;
        w += c[a].weight;
      }
    }
    if (ok) best = std::max(best, w);
  }
  return best;
}

Report cmd_pack_bench(const RunConfig& c, std::ostream& out) {
  const int instances = c.get_int("instances");
  const int maxc = c.get_int("max_candidates");
  require(instances >= 1, "instances must be >= 1");
  require(maxc >= 1 && maxc <= 20, "max_candidates must be in [1, 20]");
  std::mt19937_64 rng(c.get_u64("seed"));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int mismatches = 0, mismatches_1d = 0;
  double worst_ratio = 1.0;
  for (int t = 0; t < instances; ++t) {
    const int n = 1 + static_cast<int>(U(rng) * maxc) % maxc;
    const bool one_d = t % 2 == 0;
    std::vector<PlacementCandidate> cands;
    for (int k = 0; k < n; ++k) {
      PlacementCandidate pc;
      const double side = 0.1 + 0.3 * U(rng);
      pc.window.side = side;
      pc.window.dim = one_d ? 1 : 2;
      pc.window.shape = one_d ? ShapeKind::interval : ShapeKind::rotated_square;
      pc.window.center = {side / 2 + (1 - side) * U(rng), one_d ? 0.0 : side / 2 + (1 - side) * U(rng)};
      pc.window.angle = one_d ? 0.0 : U(rng) * std::numbers::pi / 2;
      pc.weight = U(rng);
      cands.push_back(pc);
    }
    const double bf = brute_force(cands);
    const double ex = solve_exact_small(cands, 64).family.total_weight;
    const double gr = solve_greedy_local(cands, c.get_u64("seed") + t).family.total_weight;
    if (std::abs(ex - bf) > 1e-12 * std::max(1.0, bf)) ++mismatches;
    if (one_d && std::abs(solve_exact_1d(cands).family.total_weight - ex) > 1e-12 * std::max(1.0, ex)) ++mismatches_1d;
    if (bf > 0.0) worst_ratio = std::min(worst_ratio, gr / bf);
  }
  out << "instances=" << instances << " exact_mismatches=" << mismatches << " exact1d_mismatches=" << mismatches_1d
      << " worst_greedy_ratio=" << fmt(worst_ratio) << "\n";
  Report r;
  r.kind = "pack-bench";
  r.result = {{"instances", instances},
              {"exact_mismatches", mismatches},
              {"exact1d_mismatches", mismatches_1d},
              {"worst_greedy_ratio", worst_ratio}};
  return r;
}

}  // namespace

// --- config plumbing ------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> command_keys(const std::string& command) {
  static const KeyList out_keys = {{"out", "oscilla-out"}, {"seed", "1"}};
  static const KeyList ladder = {{"eps", "0.125"}, {"order", "1"}};
  if (command == "eval-h") {
    static const KeyList extra = {{"shape", "auto"}};
    return concat({&out_keys, &field_keys(), &packing_keys(), &ladder, &extra});
  }
  if (command == "eval-k") {
    static const KeyList extra = {{"m", "1"}};
    return concat({&out_keys, &field_keys(), &packing_keys(), &ladder, &extra});
  }
  if (command == "beta") {
    static const KeyList k = {{"out", "oscilla-out"}, {"seed", "7"},   {"n", "1"},           {"m", "1"},
                              {"level", "3"},         {"starts", "24"}, {"iterations", "200"}};
    return k;
  }
  if (command == "psi") {
    static const KeyList k = {{"shape", "axis_box"}, {"directions", "8"}, {"resolution", "256"},
                              {"eps", "0.25,0.125,0.0625"}, {"order", "1"}};
    return concat({&out_keys, &packing_keys(), &k});
  }
  if (command == "gamma") {
    static const KeyList k = {{"experiment", "pointwise"}, {"kind", "H"}, {"m", "1"}, {"shape", "auto"},
                              {"dim", "1"},   {"lower", ""},     {"upper", ""},    {"source", "linear"},
                              {"normal", "1,0"}, {"threshold", "0"}, {"frequency", "1,1"}, {"cantor_depth", "40"},
                              {"resolution", "auto"}, {"eps", ""}, {"order", "1"}, {"tol", "0.03"}};
    return concat({&out_keys, &packing_keys(), &k});
  }
  if (command == "denoise") {
    static const KeyList k = {{"lambda", "8"},          {"q", "2"},         {"eps", "0.125"}, {"tol", "0.001"},
                              {"max_iterations", "60"}, {"master_iterations", "4000"}, {"bundle", "16"},
                              {"truncate", "false"},    {"perturb", "0"},   {"study", "auto"}, {"tau", ""}};
    return concat({&out_keys, &field_keys(), &packing_keys(), &k});
  }
  if (command == "pack-bench") {
    static const KeyList k = {{"out", "oscilla-out"}, {"seed", "1"}, {"instances", "200"}, {"max_candidates", "15"}};
    return k;
  }
  if (command == "report") {
    static const KeyList k = {{"out", "oscilla-out"}, {"input", ""}};
    return k;
  }
  throw ValidationError("unknown command '" + command + "'");
}

RunConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& flag_values) {
  RunConfig c;
  c.command = command;
  const auto keys = command_keys(command);
  std::set<std::string> known;
  for (const auto& [k, d] : keys) {
    known.insert(k);
    c.values[k] = d;
  }
  for (const auto* src : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *src) {
      if (k == "command") continue;
      if (!known.count(k)) throw ValidationError("unknown key '" + k + "' for command " + command);
      c.values[k] = v;
    }
  }
  return c;
}

ScalarField field_from_config(const RunConfig& c) {
  const std::string input = c.get("input", "");
  const std::string source = c.get("source", "");
  require(input.empty() != source.empty(), "exactly one of 'input' or 'source' is required");
  ScalarField u = [&] {
    if (!input.empty()) {
      if (!std::filesystem::exists(input)) throw ValidationError("input file not found: " + input);
      return read_field(input);
    }
    const int dim = c.get_int("dim");
    require(dim == 1 || dim == 2, "dim must be 1 or 2");
    const int res = c.get_int("resolution");
    require(res >= 2, "resolution must be >= 2");
    const BoxDomain d = domain_of(c, dim);
    return sample(source_of(c, source, dim), d, dim == 1 ? Resolution{res, 1} : Resolution{res, res});
  }();
  return add_noise(u, c);
}

Report execute(const RunConfig& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r;
  const std::string& cmd = c.command;
  if (cmd == "eval-h") r = cmd_eval(c, out, FunctionalKind::H);
  else if (cmd == "eval-k") r = cmd_eval(c, out, FunctionalKind::K);
  else if (cmd == "beta") r = cmd_beta(c, out);
  else if (cmd == "psi") r = cmd_psi(c, out);
  else if (cmd == "gamma") r = cmd_gamma(c, out);
  else if (cmd == "denoise") r = cmd_denoise(c, out);
  else if (cmd == "pack-bench") r = cmd_pack_bench(c, out);
  else if (cmd == "report") {
    const std::string in = c.get("input");
    require(!in.empty(), "missing required key 'input'");
    if (!std::filesystem::exists(in)) throw ValidationError("input file not found: " + in);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("report is not valid JSON: ") + e.what());
    }
    Report src = Report::from_json(j);
    const auto files = emit_report(src, c.get("out"));
    out << "json=" << files.json.string() << "\n";
    return src;
  } else {
    throw ValidationError("unknown command '" + cmd + "'");
  }
  r.config = c;
  r.runtime_seconds = seconds_since(t0);
  const auto files = emit_report(r, c.get("out"));
  out << "report=" << files.json.string() << "\n";
  return r;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"oscilla: nonlocal oscillation functionals, packing and Gamma-convergence experiments"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : known_commands()) {
    static const std::map<std::string, std::string> about = {
        {"eval-h", "H_eps of a field over translated windows"},
        {"eval-k", "K_eps of order m over translated and rotated cubes"},
        {"beta", "the isotropic constant beta(n, m)"},
        {"psi", "anisotropy table psi(nu) from H ladders of linear fields"},
        {"gamma", "pointwise, recovery, liminf, Cantor and BV-probe experiments"},
        {"denoise", "minimize K_eps + lambda |u - f|^q, or run a convergence study"},
        {"pack-bench", "compare packing solvers on random instances"},
        {"report", "re-emit a stored JSON report with its CSV and SVG files"}};
    auto* sub = app.add_subcommand(cmd, about.count(cmd) ? about.at(cmd) : "");
    subs[cmd] = sub;
    sub->add_option("--config", config_paths[cmd], "key=value config file");
    for (const auto& [key, def] : command_keys(cmd)) {
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      sub->add_option_function<std::string>(
          names,
          [&flags, cmd, key](const std::string& v) { flags[cmd][key] = v; },
          def.empty() ? std::string("(no default)") : "default " + def);
    }
  }
  auto* run = app.add_subcommand("run", "execute a key=value config file (key 'command' selects the subcommand)");
  std::string run_config;
  run->add_option("--config", run_config, "config file")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? version_string() + "\n" : app.help());
      return exit_ok;
    }
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }
  try {
    RunConfig cfg;
    if (run->parsed()) {
      auto values = read_config_file(run_config);
      auto it = values.find("command");
      if (it == values.end()) throw ValidationError("missing required key 'command' in " + run_config);
      if (!known_commands().count(it->second)) throw ValidationError("unknown command '" + it->second + "'");
      cfg = resolve_config(it->second, values, {});
    } else {
      for (const auto& [cmd, sub] : subs) {
        if (!sub->parsed()) continue;
        std::map<std::string, std::string> file_values;
        if (!config_paths[cmd].empty()) {
          file_values = read_config_file(config_paths[cmd]);
          if (auto it = file_values.find("command"); it != file_values.end() && it->second != cmd) {
            throw ValidationError("config file is for command '" + it->second + "', not '" + cmd + "'");
          }
        }
        cfg = resolve_config(cmd, file_values, flags[cmd]);
      }
    }
    execute(cfg, out);
    return exit_ok;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_solver;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace oscilla
