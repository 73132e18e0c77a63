#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oscilla/window.hpp"

namespace oscilla {

enum class Optimality { exact, heuristic };
std::string optimality_name(Optimality o);

/// Position of a candidate on the placement lattice: orientation index and
/// integer lattice coordinates in the rotated frame. Candidates sharing
/// (orientation, i mod rho, j mod rho) are pairwise disjoint.
struct LatticeTag {
  int orientation = -1;  // -1: not on a lattice
  int rho = 1;
  long i = 0;
  long j = 0;
};

struct PlacementCandidate {
  WindowSpec window;
  double weight = 0.0;
  LatticeTag tag;
};

struct PackingFamily {
  std::vector<PlacementCandidate> members;
  double total_weight = 0.0;
};

struct PackingSolution {
  PackingFamily family;
  Optimality optimality = Optimality::heuristic;
  double upper_bound = 0.0;
  std::vector<std::size_t> selected;  // indices into the candidate list
};

/// k * (pi/2) / count for k < count: square symmetry makes [0, pi/2) enough.
std::vector<double> default_orientations(int count);

/// Lattice of centers with spacing side/rho in each orientation's frame,
/// anchored at domain.lower + side/2; only placements inside the domain are kept.
std::vector<PlacementCandidate> enumerate_candidates(const BoxDomain& domain, double eps, ShapeKind shape, int rho,
                                                     const std::vector<double>& orientations = {0.0});

/// Open-set disjointness; windows touching along their boundary are disjoint.
bool disjoint(const WindowSpec& a, const WindowSpec& b);
bool family_is_disjoint(const PackingFamily& family);

PackingSolution solve_exact_1d(const std::vector<PlacementCandidate>& candidates);
PackingSolution solve_exact_small(const std::vector<PlacementCandidate>& candidates, int limit = 40);
PackingSolution solve_greedy_local(const std::vector<PlacementCandidate>& candidates, std::uint64_t seed = 1,
                                   int max_rounds = 50);

/// Valid upper bound on any disjoint family's weight: per spatial cell, the
/// cell area times the best weight density among candidates meeting it.
double density_upper_bound(const std::vector<PlacementCandidate>& candidates);

void write_family_csv(const PackingFamily& family, const std::filesystem::path& path);

}  // namespace oscilla
