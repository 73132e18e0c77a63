#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oscilla/packing.hpp"

namespace testgen {

// Best disjoint subset by enumerating all 2^n subsets.
inline double brute_force_packing(const std::vector<oscilla::PlacementCandidate>& c) {
  const std::size_t n = c.size();
  std::vector<std::uint32_t> conflict(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !oscilla::disjoint(c[i].window, c[j].window)) conflict[i] |= 1u << j;
  double best = 0.0;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    double w = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(s >> i & 1u)) continue;
      if (conflict[i] & s) ok = false;
      w += c[i].weight;
    }
    if (ok) best = std::max(best, w);
  }
  return best;
}

// Random windows of one shape inside the unit box, with random weights.
inline std::vector<oscilla::PlacementCandidate> random_instance(std::mt19937_64& rng, int n, int dim, bool rotated) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<oscilla::PlacementCandidate> out;
  for (int k = 0; k < n; ++k) {
    oscilla::PlacementCandidate p;
    p.window.dim = dim;
    p.window.shape = dim == 1 ? oscilla::ShapeKind::interval
                              : (rotated ? oscilla::ShapeKind::rotated_square : oscilla::ShapeKind::axis_box);
    p.window.side = 0.15 + 0.2 * u(rng);
    p.window.center = {0.2 + 0.6 * u(rng), dim == 1 ? 0.0 : 0.2 + 0.6 * u(rng)};
    p.window.angle = rotated ? u(rng) * 1.5707963267948966 : 0.0;
    p.weight = u(rng);
    out.push_back(p);
  }
  return out;
}

}  // namespace testgen
