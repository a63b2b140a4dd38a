#pragma once

#include <cstdint>
#include <vector>

#include "slfv/caterpillar.hpp"
#include "slfv/rng.hpp"
#include "slfv/stats.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Node of a binary branching Brownian motion tree.
struct BBMNode {
  std::vector<std::uint8_t> key;
  std::uint32_t parent = 0xffffffff;
  double t_birth = 0.0;
  double t_death = 0.0;  // branch time, or the horizon when alive there
  Vec2 p_birth{};
  Vec2 p_death{};
  bool alive_at_horizon = false;
  SteppedPath<2> path;  // sampled on the grid when grid_dt > 0
};

struct BBMTree {
  std::vector<BBMNode> nodes;
  double V = 0.0;
  double sigma2 = 0.0;
  double horizon = 0.0;

  std::size_t particles_at_horizon() const;
  std::vector<Vec2> leaf_positions() const;
};

/// Binary BBM from p: Exp(V) lifetimes, Brownian motion with diffusion
/// constant sigma2 per coordinate, leaves truncated at T. Branch times are
/// exact; grid_dt only controls optional path sampling.
BBMTree simulate_bbm(Vec2 p, double V, double sigma2, double T, double grid_dt, RngStream& rng);

/// Summary statistics a family-structure comparison consumes: particle counts
/// at the horizon, root-to-leaf displacements, and within-tree pairwise leaf
/// distances.
struct FamilySample {
  std::vector<double> counts;
  std::vector<double> dx, dy;       // per-coordinate leaf displacement
  std::vector<double> pair_dists;   // pooled within-family leaf distances
};

FamilySample family_sample_from_forests(const std::vector<CaterpillarForest>& forests, Vec2 root);
FamilySample family_sample_from_trees(const std::vector<BBMTree>& trees, Vec2 root);

struct FamilyComparison {
  Chi2Result count_chi2;
  KsResult dx_ks, dy_ks;
  KsResult pair_dist_ks;
  double count_mean_a = 0.0, count_mean_b = 0.0;
};

/// Distributional comparison between two family samples: particle-count
/// chi-square, per-coordinate displacement KS, pairwise leaf-distance KS.
FamilyComparison compare_family_structure(const FamilySample& a, const FamilySample& b);

}  // namespace slfv
