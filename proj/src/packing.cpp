#include "oscilla/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "oscilla/error.hpp"
#include "oscilla/field_io.hpp"

namespace oscilla {

std::string optimality_name(Optimality o) { return o == Optimality::exact ? "exact" : "heuristic"; }

std::vector<double> default_orientations(int count) {
  require(count >= 1, "orientation count must be >= 1");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = 0.5 * std::numbers::pi * k / count;
  return out;
}

// --- geometry ---------------------------------------------------------------------

namespace {

struct Shape {
  ShapeKind kind;
  int dim;
  Point center;
  double side;
  double radius;  // circumradius
  bool polygon;
  std::array<Point, 4> corners;
};

Shape make_shape(const WindowSpec& w) {
  Shape s{w.shape, w.dim, w.center, w.side, 0.5 * w.side, false, {}};
  if (w.dim == 2 && w.shape != ShapeKind::ball) {
    const auto cs = w.corners();
    s.polygon = true;
    std::copy(cs.begin(), cs.end(), s.corners.begin());
    if (w.shape != ShapeKind::diamond) s.radius = w.side * std::numbers::sqrt2 / 2.0;
  }
  return s;
}

// true when the projections of the two polygons onto the normal of some edge
// are separated (touching allowed)
bool separated(const Shape& a, const Shape& b, double tol) {
  for (const Shape* p : {&a, &b}) {
    for (int e = 0; e < 2; ++e) {
      const Point& p0 = p->corners[e];
      const Point& p1 = p->corners[e + 1];
      const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
      const Point n{-(p1[1] - p0[1]) / len, (p1[0] - p0[0]) / len};
      double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
      for (const auto& c : a.corners) {
        const double d = c[0] * n[0] + c[1] * n[1];
        amin = std::min(amin, d);
        amax = std::max(amax, d);
      }
      for (const auto& c : b.corners) {
        const double d = c[0] * n[0] + c[1] * n[1];
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
      }
      if (amax <= bmin + tol || bmax <= amin + tol) return true;
    }
  }
  return false;
}

bool shapes_disjoint(const Shape& a, const Shape& b) {
  const double tol = 1e-12 * std::max(a.side, b.side);
  const double dx = a.center[0] - b.center[0];
  const double dy = a.dim > 1 ? a.center[1] - b.center[1] : 0.0;
  if (dx * dx + dy * dy >= (a.radius + b.radius) * (a.radius + b.radius)) return true;
  if (a.dim == 1) return std::abs(dx) >= 0.5 * (a.side + b.side) - tol;
  if (a.kind == ShapeKind::ball) return std::hypot(dx, dy) >= 0.5 * (a.side + b.side) - tol;
  return separated(a, b, tol);
}

void check_same_kind(const WindowSpec& a, const WindowSpec& b) {
  require(a.dim == b.dim, "disjoint: windows of different dimension");
  const auto norm = [](ShapeKind k) { return k == ShapeKind::axis_box ? ShapeKind::rotated_square : k; };
  if (a.dim == 1) return;  // every 1D shape is an interval
  require(norm(a.shape) == norm(b.shape), "disjoint: mixed window shape kinds");
}

// Buckets candidate centers on a uniform grid; neighbors of a window are
// windows whose circumscribed balls could intersect it.
class SpatialIndex {
 public:
  explicit SpatialIndex(const std::vector<Shape>& shapes) : shapes_(shapes) {
    if (shapes.empty()) return;
    lo_ = shapes[0].center;
    Point hi = lo_;
    for (const auto& s : shapes) {
      max_r_ = std::max(max_r_, s.radius);
      for (int a = 0; a < 2; ++a) {
        lo_[a] = std::min(lo_[a], s.center[a]);
        hi[a] = std::max(hi[a], s.center[a]);
      }
    }
    cell_ = std::max(2.0 * max_r_, 1e-300);
    for (int a = 0; a < 2; ++a) {
      n_[a] = std::min<long>(4096, static_cast<long>((hi[a] - lo_[a]) / cell_) + 1);
      cell_a_[a] = std::max(cell_, (hi[a] - lo_[a]) / static_cast<double>(n_[a]) * (1.0 + 1e-12));
    }
    start_.assign(static_cast<std::size_t>(n_[0] * n_[1] + 1), 0);
    std::vector<long> key(shapes.size());
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      key[k] = bucket(shapes[k].center);
      ++start_[key[k] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    items_.resize(shapes.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < shapes.size(); ++k) items_[fill[key[k]]++] = static_cast<std::uint32_t>(k);
  }

  template <class F>
  void for_each_near(std::size_t c, F&& f) const {
    const Shape& s = shapes_[c];
    const double reach = s.radius + max_r_;
    long r0[2], r1[2];
    for (int a = 0; a < 2; ++a) {
      r0[a] = std::max(0L, static_cast<long>(std::floor((s.center[a] - reach - lo_[a]) / cell_a_[a])));
      r1[a] = std::min(n_[a] - 1, static_cast<long>(std::floor((s.center[a] + reach - lo_[a]) / cell_a_[a])));
    }
    for (long j = r0[1]; j <= r1[1]; ++j) {
      for (long i = r0[0]; i <= r1[0]; ++i) {
        const long b = i + n_[0] * j;
        for (std::size_t t = start_[b]; t < start_[b + 1]; ++t) {
          if (items_[t] != c) f(static_cast<std::size_t>(items_[t]));
        }
      }
    }
  }

 private:
  long bucket(const Point& p) const {
    long idx[2];
    for (int a = 0; a < 2; ++a) idx[a] = std::clamp(static_cast<long>((p[a] - lo_[a]) / cell_a_[a]), 0L, n_[a] - 1);
    return idx[0] + n_[0] * idx[1];
  }

  const std::vector<Shape>& shapes_;
  Point lo_{0.0, 0.0};
  double max_r_ = 0.0;
  double cell_ = 1.0;
  double cell_a_[2] = {1.0, 1.0};
  long n_[2] = {1, 1};
  std::vector<std::size_t> start_{0, 0};
  std::vector<std::uint32_t> items_;
};

PackingSolution make_solution(const std::vector<PlacementCandidate>& cands, std::vector<std::size_t> sel,
                              Optimality opt, double ub) {
  std::sort(sel.begin(), sel.end());
  PackingSolution s;
  s.optimality = opt;
  s.selected = std::move(sel);
  for (auto k : s.selected) {
    s.family.members.push_back(cands[k]);
    s.family.total_weight += cands[k].weight;
  }
  s.upper_bound = opt == Optimality::exact ? s.family.total_weight : std::max(ub, s.family.total_weight);
  return s;
}

void check_weights(const std::vector<PlacementCandidate>& cands) {
  for (const auto& c : cands) require(std::isfinite(c.weight) && c.weight >= 0.0, "candidate weights must be finite and >= 0");
}

}  // namespace

bool disjoint(const WindowSpec& a, const WindowSpec& b) {
  check_same_kind(a, b);
  return shapes_disjoint(make_shape(a), make_shape(b));
}

bool family_is_disjoint(const PackingFamily& family) {
  std::vector<Shape> shapes;
  for (const auto& m : family.members) shapes.push_back(make_shape(m.window));
  for (std::size_t a = 0; a < shapes.size(); ++a) {
    for (std::size_t b = a + 1; b < shapes.size(); ++b) {
      check_same_kind(family.members[a].window, family.members[b].window);
      if (!shapes_disjoint(shapes[a], shapes[b])) return false;
    }
  }
  return true;
}

// --- enumeration ------------------------------------------------------------------

std::vector<PlacementCandidate> enumerate_candidates(const BoxDomain& domain, double eps, ShapeKind shape, int rho,
                                                     const std::vector<double>& orientations) {
  domain.validate();
  require(rho >= 1, "center refinement rho must be >= 1");
  require(eps > 0.0 && std::isfinite(eps), "window side must be positive");
  for (int a = 0; a < domain.dim; ++a) {
    require(eps <= domain.extent(a) * (1.0 + 1e-12), "window side larger than domain extent");
  }
  require(!orientations.empty(), "orientation list must not be empty");
  const double delta = eps / rho;
  const double tol = 1e-9;
  std::vector<PlacementCandidate> out;
  if (domain.dim == 1) {
    require(shape == ShapeKind::interval || shape == ShapeKind::ball || shape == ShapeKind::diamond,
            "1D windows must be intervals");
    const double first = domain.lower[0] + 0.5 * eps;
    const long count = static_cast<long>(std::floor((domain.extent(0) - eps) / delta + tol)) + 1;
    for (long k = 0; k < count; ++k) {
      PlacementCandidate c;
      c.window = WindowSpec{ShapeKind::interval, 1, {first + k * delta, 0.0}, eps, 0.0};
      c.tag = LatticeTag{0, rho, k, 0};
      out.push_back(c);
    }
    return out;
  }
  require(shape != ShapeKind::interval, "interval windows need a 1D domain");
  const bool rotates = shape_rotates(shape);
  const Point anchor{domain.lower[0] + 0.5 * eps, domain.lower[1] + 0.5 * eps};
  const std::array<Point, 4> dc{Point{domain.lower[0], domain.lower[1]}, Point{domain.upper[0], domain.lower[1]},
                                Point{domain.upper[0], domain.upper[1]}, Point{domain.lower[0], domain.upper[1]}};
  for (std::size_t o = 0; o < orientations.size(); ++o) {
    const double theta = rotates ? orientations[o] : 0.0;
    if (!rotates && o > 0) break;
    const double c = std::cos(theta), s = std::sin(theta);
    // lattice axes e1 = (c, s), e2 = (-s, c); find the index range covering the domain
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (const auto& p : dc) {
      const double d1 = (p[0] - anchor[0]) * c + (p[1] - anchor[1]) * s;
      const double d2 = -(p[0] - anchor[0]) * s + (p[1] - anchor[1]) * c;
      lo1 = std::min(lo1, d1), hi1 = std::max(hi1, d1), lo2 = std::min(lo2, d2), hi2 = std::max(hi2, d2);
    }
    const long i0 = static_cast<long>(std::floor(lo1 / delta)), i1 = static_cast<long>(std::ceil(hi1 / delta));
    const long j0 = static_cast<long>(std::floor(lo2 / delta)), j1 = static_cast<long>(std::ceil(hi2 / delta));
    for (long j = j0; j <= j1; ++j) {
      for (long i = i0; i <= i1; ++i) {
        const Point ctr{anchor[0] + delta * (i * c - j * s), anchor[1] + delta * (i * s + j * c)};
        WindowSpec w{shape, 2, ctr, eps, theta};
        if (!w.inside(domain, tol)) continue;
        PlacementCandidate cand;
        cand.window = w;
        cand.tag = LatticeTag{static_cast<int>(o), rho, i, j};
        out.push_back(cand);
      }
    }
  }
  return out;
}

// --- exact solvers ----------------------------------------------------------------

PackingSolution solve_exact_1d(const std::vector<PlacementCandidate>& candidates) {
  check_weights(candidates);
  for (const auto& c : candidates) require(c.window.dim == 1, "solve_exact_1d needs 1D candidates");
  const std::size_t n = candidates.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto left = [&](std::size_t k) { return candidates[k].window.center[0] - 0.5 * candidates[k].window.side; };
  const auto right = [&](std::size_t k) { return candidates[k].window.center[0] + 0.5 * candidates[k].window.side; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return right(a) != right(b) ? right(a) < right(b) : a < b;
  });
  std::vector<double> rights(n);
  for (std::size_t k = 0; k < n; ++k) rights[k] = right(order[k]);
  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> pred(n, 0);
  std::vector<char> take(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = order[k];
    const double tol = 1e-12 * candidates[c].window.side;
    // number of intervals (in sorted order) ending at or before this one's left end
    const std::size_t p = static_cast<std::size_t>(std::upper_bound(rights.begin(), rights.begin() + k, left(c) + tol) -
                                                   rights.begin());
    pred[k] = p;
    const double with = best[p] + candidates[c].weight;
    if (with > best[k]) {
      best[k + 1] = with;
      take[k] = 1;
    } else {
      best[k + 1] = best[k];
    }
  }
  std::vector<std::size_t> sel;
  for (std::size_t k = n; k > 0;) {
    if (take[k - 1]) {
      sel.push_back(order[k - 1]);
      k = pred[k - 1];
    } else {
      --k;
    }
  }
  return make_solution(candidates, std::move(sel), Optimality::exact, 0.0);
}

PackingSolution solve_exact_small(const std::vector<PlacementCandidate>& candidates, int limit) {
  check_weights(candidates);
  require(limit >= 0 && limit <= 64, "exact_small limit must be in [0, 64]");
  if (static_cast<int>(candidates.size()) > limit) {
    throw SolverError("instance too large for exact_small: " + std::to_string(candidates.size()) + " > " +
                          std::to_string(limit));
  }
  const std::size_t n = candidates.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].weight != candidates[b].weight ? candidates[a].weight > candidates[b].weight : a < b;
  });
  std::vector<Shape> shapes;
  for (auto k : order) shapes.push_back(make_shape(candidates[k].window));
  std::vector<std::uint64_t> conflict(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      check_same_kind(candidates[order[a]].window, candidates[order[b]].window);
      if (!shapes_disjoint(shapes[a], shapes[b])) {
        conflict[a] |= std::uint64_t{1} << b;
        conflict[b] |= std::uint64_t{1} << a;
      }
    }
  }
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = candidates[order[k]].weight;
  double best = -1.0;
  std::uint64_t best_set = 0;
  // branch on the lowest available position (highest weight first)
  std::function<void(std::uint64_t, std::uint64_t, double)> search = [&](std::uint64_t avail, std::uint64_t set,
                                                                         double value) {
    double bound = value;
    for (std::uint64_t m = avail; m; m &= m - 1) bound += w[std::countr_zero(m)];
    if (bound <= best) return;
    if (!avail) {
      best = value;
      best_set = set;
      return;
    }
    const int k = std::countr_zero(avail);
    const std::uint64_t bit = std::uint64_t{1} << k;
    search(avail & ~bit & ~conflict[k], set | bit, value + w[k]);
    search(avail & ~bit, set, value);
  };
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  search(all, 0, 0.0);
  std::vector<std::size_t> sel;
  for (std::size_t k = 0; k < n; ++k) {
    if (best_set >> k & 1) sel.push_back(order[k]);
  }
  return make_solution(candidates, std::move(sel), Optimality::exact, 0.0);
}

// --- upper bound ------------------------------------------------------------------

double density_upper_bound(const std::vector<PlacementCandidate>& candidates) {
  double total = 0.0;
  for (const auto& c : candidates) total += c.weight;
  if (candidates.empty() || total <= 0.0) return total;
  const int dim = candidates[0].window.dim;
  Point lo{1e300, 1e300}, hi{-1e300, -1e300};
  double min_side = 1e300;
  std::vector<BoxDomain> boxes;
  boxes.reserve(candidates.size());
  for (const auto& c : candidates) {
    boxes.push_back(c.window.bounding_box());
    min_side = std::min(min_side, c.window.side);
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], boxes.back().lower[a]);
      hi[a] = std::max(hi[a], boxes.back().upper[a]);
    }
  }
  // cells of side ~ min_side/8, at most ~2^20 cells
  double cell = min_side / 8.0;
  const auto cells_for = [&](double s) {
    double n = 1.0;
    for (int a = 0; a < dim; ++a) n *= std::ceil((hi[a] - lo[a]) / s);
    return n;
  };
  while (cells_for(cell) > (1 << 20)) cell *= 1.5;
  long n[2] = {1, 1};
  for (int a = 0; a < dim; ++a) n[a] = std::max(1L, static_cast<long>(std::ceil((hi[a] - lo[a]) / cell)));
  std::vector<double> density(static_cast<std::size_t>(n[0] * n[1]), 0.0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double d = candidates[k].weight / candidates[k].window.volume();
    if (d <= 0.0) continue;
    long r0[2] = {0, 0}, r1[2] = {0, 0};
    for (int a = 0; a < dim; ++a) {
      r0[a] = std::clamp(static_cast<long>(std::floor((boxes[k].lower[a] - lo[a]) / cell)), 0L, n[a] - 1);
      r1[a] = std::clamp(static_cast<long>(std::ceil((boxes[k].upper[a] - lo[a]) / cell)) - 1, 0L, n[a] - 1);
    }
    for (long j = r0[1]; j <= r1[1]; ++j) {
      for (long i = r0[0]; i <= r1[0]; ++i) {
        double& v = density[i + n[0] * j];
        v = std::max(v, d);
      }
    }
  }
  double bound = 0.0;
  for (long j = 0; j < n[1]; ++j) {
    for (long i = 0; i < n[0]; ++i) {
      double area = 1.0;
      const long idx[2] = {i, j};
      for (int a = 0; a < dim; ++a) area *= std::min(cell, hi[a] - lo[a] - idx[a] * cell);
      bound += area * density[i + n[0] * j];
    }
  }
  return std::min(bound, total);
}

// --- greedy + local search ----------------------------------------------------------

namespace {

class LocalSearch {
 public:
  LocalSearch(const std::vector<PlacementCandidate>& c, const std::vector<Shape>& shapes, const SpatialIndex& index)
      : cands_(c), shapes_(shapes), index_(index), conf_(c.size(), 0), sel_(c.size(), 0) {}

  bool overlaps(std::size_t a, std::size_t b) const { return !shapes_disjoint(shapes_[a], shapes_[b]); }
  bool free(std::size_t k) const { return !sel_[k] && conf_[k] == 0; }
  bool selected(std::size_t k) const { return sel_[k]; }
  double total() const { return total_; }

  void select(std::size_t k) {
    sel_[k] = 1;
    total_ += cands_[k].weight;
    index_.for_each_near(k, [&](std::size_t n) {
      if (overlaps(k, n)) ++conf_[n];
    });
  }
  void deselect(std::size_t k) {
    sel_[k] = 0;
    total_ -= cands_[k].weight;
    index_.for_each_near(k, [&](std::size_t n) {
      if (overlaps(k, n)) --conf_[n];
    });
  }
  void clear() {
    std::fill(conf_.begin(), conf_.end(), 0);
    std::fill(sel_.begin(), sel_.end(), 0);
    total_ = 0.0;
  }
  std::vector<std::size_t> selection() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < sel_.size(); ++k) {
      if (sel_[k]) out.push_back(k);
    }
    return out;
  }
  void load(const std::vector<std::size_t>& sel) {
    clear();
    for (auto k : sel) select(k);
  }

  /// Inserts free candidates in the given order.
  bool fill(const std::vector<std::size_t>& order) {
    bool any = false;
    for (auto k : order) {
      if (cands_[k].weight > 0.0 && free(k)) {
        select(k);
        any = true;
      }
    }
    return any;
  }

  /// Removes one member and inserts the best disjoint set of candidates whose
  /// only conflict was that member, when that gains weight.
  bool swap_pass(const std::vector<std::size_t>& rank) {
    bool improved = false;
    for (auto s : selection()) {
      if (!sel_[s]) continue;
      std::vector<std::size_t> pool;
      index_.for_each_near(s, [&](std::size_t n) {
        if (!sel_[n] && conf_[n] == 1 && cands_[n].weight > 0.0 && overlaps(s, n)) pool.push_back(n);
      });
      if (pool.empty()) continue;
      std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
      std::vector<std::size_t> chosen;
      double gain = 0.0;
      for (auto p : pool) {
        bool ok = true;
        for (auto q : chosen) {
          if (overlaps(p, q)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          chosen.push_back(p);
          gain += cands_[p].weight;
        }
      }
      if (gain > cands_[s].weight * (1.0 + 1e-12) + 1e-300) {
        deselect(s);
        for (auto p : chosen) select(p);
        improved = true;
      }
    }
    return improved;
  }

  void improve(const std::vector<std::size_t>& order, const std::vector<std::size_t>& rank, int max_rounds) {
    fill(order);
    for (int round = 0; round < max_rounds; ++round) {
      const bool a = swap_pass(rank);
      const bool b = fill(order);
      if (!a && !b) break;
    }
  }

 private:
  const std::vector<PlacementCandidate>& cands_;
  const std::vector<Shape>& shapes_;
  const SpatialIndex& index_;
  std::vector<int> conf_;
  std::vector<char> sel_;
  double total_ = 0.0;
};

long positive_mod(long a, long m) { return ((a % m) + m) % m; }

}  // namespace

PackingSolution solve_greedy_local(const std::vector<PlacementCandidate>& candidates, std::uint64_t seed, int max_rounds) {
  check_weights(candidates);
  const std::size_t n = candidates.size();
  if (n == 0) return make_solution(candidates, {}, Optimality::heuristic, 0.0);
  for (std::size_t k = 1; k < n; ++k) check_same_kind(candidates[0].window, candidates[k].window);
  std::vector<Shape> shapes;
  shapes.reserve(n);
  for (const auto& c : candidates) shapes.push_back(make_shape(c.window));
  const SpatialIndex index(shapes);
  LocalSearch ls(candidates, shapes, index);

  // weight desc, center asc, angle asc
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.window.center[0] != y.window.center[0]) return x.window.center[0] < y.window.center[0];
    if (x.window.center[1] != y.window.center[1]) return x.window.center[1] < y.window.center[1];
    if (x.window.angle != y.window.angle) return x.window.angle < y.window.angle;
    return a < b;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;

  std::vector<std::vector<std::size_t>> starts;
  // plain greedy
  ls.fill(order);
  starts.push_back(ls.selection());

  // lattice classes: best single class, then per-block best-class patchworks
  const bool tagged = std::all_of(candidates.begin(), candidates.end(), [](const auto& c) { return c.tag.orientation >= 0; });
  if (tagged) {
    const auto class_of = [&](std::size_t k) {
      const auto& t = candidates[k].tag;
      return (static_cast<long>(t.orientation) * t.rho + positive_mod(t.i, t.rho)) * t.rho + positive_mod(t.j, t.rho);
    };
    Point lo = candidates[0].window.center, hi = lo;
    double side = 0.0;
    for (const auto& c : candidates) {
      side = std::max(side, c.window.side);
      for (int a = 0; a < 2; ++a) lo[a] = std::min(lo[a], c.window.center[a]), hi[a] = std::max(hi[a], c.window.center[a]);
    }
    const int dim = candidates[0].window.dim;
    for (int blocks : {1, 2, 4, 8, 16, 32}) {
      const double bx = (hi[0] - lo[0]) / blocks, by = (hi[1] - lo[1]) / blocks;
      if (blocks > 1 && std::max(bx, dim > 1 ? by : bx) < 1.5 * side) break;
      const auto block_of = [&](std::size_t k) {
        const auto& p = candidates[k].window.center;
        const long i = bx > 0 ? std::min<long>(blocks - 1, static_cast<long>((p[0] - lo[0]) / bx)) : 0;
        const long j = (dim > 1 && by > 0) ? std::min<long>(blocks - 1, static_cast<long>((p[1] - lo[1]) / by)) : 0;
        return i + static_cast<long>(blocks) * j;
      };
      std::unordered_map<long, std::unordered_map<long, double>> sums;
      for (std::size_t k = 0; k < n; ++k) sums[block_of(k)][class_of(k)] += candidates[k].weight;
      std::vector<std::pair<double, std::pair<long, long>>> picks;  // (score, (block, class))
      for (const auto& [b, m] : sums) {
        long best_c = 0;
        double best_v = -1.0;
        for (const auto& [c, v] : m) {
          if (v > best_v || (v == best_v && c < best_c)) best_v = v, best_c = c;
        }
        picks.push_back({best_v, {b, best_c}});
      }
      std::sort(picks.begin(), picks.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      std::unordered_map<long, long> chosen_class;
      std::unordered_map<long, int> block_rank;
      for (std::size_t r = 0; r < picks.size(); ++r) {
        chosen_class[picks[r].second.first] = picks[r].second.second;
        block_rank[picks[r].second.first] = static_cast<int>(r);
      }
      std::vector<std::size_t> members;
      for (auto k : order) {
        const long b = block_of(k);
        if (class_of(k) == chosen_class[b]) members.push_back(k);
      }
      std::stable_sort(members.begin(), members.end(),
                       [&](std::size_t a, std::size_t b) { return block_rank[block_of(a)] < block_rank[block_of(b)]; });
      ls.clear();
      ls.fill(members);
      ls.fill(order);
      starts.push_back(ls.selection());
    }
  }

  // best start, then local search
  std::vector<std::size_t> best_sel;
  double best_val = -1.0;
  for (const auto& s : starts) {
    double v = 0.0;
    for (auto k : s) v += candidates[k].weight;
    if (v > best_val) best_val = v, best_sel = s;
  }
  ls.load(best_sel);
  ls.improve(order, rank, max_rounds);
  best_sel = ls.selection();
  best_val = ls.total();

  // seeded randomized restarts on small instances
  if (n <= 64) {
    std::mt19937_64 rng(seed);
    for (int r = 0; r < 48; ++r) {
      std::vector<std::size_t> perm = order;
      // weight-biased shuffle: sort by weight times a random factor
      std::vector<double> key(n);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      for (std::size_t k = 0; k < n; ++k) key[k] = candidates[k].weight * std::pow(U(rng), 0.5);
      std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return key[a] != key[b] ? key[a] > key[b] : a < b; });
      std::vector<std::size_t> prank(n);
      for (std::size_t k = 0; k < n; ++k) prank[perm[k]] = k;
      ls.clear();
      ls.improve(perm, prank, max_rounds);
      if (ls.total() > best_val * (1.0 + 1e-12)) {
        best_val = ls.total();
        best_sel = ls.selection();
      }
    }
  }
  return make_solution(candidates, best_sel, Optimality::heuristic, density_upper_bound(candidates));
}

void write_family_csv(const PackingFamily& family, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "cx,cy,eps,theta,weight\n";
  for (const auto& m : family.members) {
    out << m.window.center[0] << ',' << m.window.center[1] << ',' << m.window.side << ',' << m.window.angle << ','
        << m.weight << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace oscilla
