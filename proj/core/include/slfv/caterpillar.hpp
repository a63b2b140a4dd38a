#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slfv/dual.hpp"
#include "slfv/excursion.hpp"
#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/stats.hpp"
#include "slfv/vec.hpp"

namespace slfv {

struct CaterpillarOptions {
  double grid_dt = 0.0;                   // path sampling step; 0 = key points only
  std::uint64_t max_events = 100000000;   // covering events before truncation
  double max_time = -1.0;                 // stop the run at this local time; <0 = none
};

/// A lineage pair that suppresses new branching for (log n)^{-c} after each
/// branch and dies when a branch excursion fails to coalesce. Between branch
/// windows the two legs coincide.
struct Caterpillar {
  Vec2 start{};
  int k_star = 0;                 // deciding branch; 0 when ended by max_time before any decision
  double lifetime = 0.0;          // tau_type of the deciding branch
  Outcome terminal = Outcome::Diverge;
  std::vector<double> branch_times;     // tau_br_k
  std::vector<double> branch_gaps;      // E_k = tau_br_k - (tau_br_{k-1} + (log n)^{-c})
  std::vector<Outcome> branch_outcomes; // outcome of branch k's excursion
  Vec2 p1{}, p2{};                // terminal points of the two legs
  bool ended_by_time = false;     // reached max_time while still alive
  Vec2 position_at_end{};         // c1 at the stop time (when ended_by_time)
  bool truncated = false;
  std::uint64_t events = 0;
  SteppedPath<2> path1, path2;    // recorded when grid_dt > 0, plus key points
};

/// Single caterpillar from p. Branch triggers are selective events affecting
/// the walking lineage after the suppression window of the previous branch.
Caterpillar simulate_caterpillar(Vec2 p, const ModelParams& params, RngStream& rng,
                                 const CaterpillarOptions& opts = {});

struct LifetimeReport {
  std::uint64_t runs = 0;
  double kappa_used = 0.0;      // kappa constant the Exp rate was built from
  bool kappa_self_estimated = false;
  double mean_lifetime = 0.0;
  double var_lifetime = 0.0;
  double expected_mean = 0.0;   // 1 / (kappa * lambda)
  KsResult lifetime_ks;         // vs Exp(kappa * lambda)
  double mean_gap = 0.0;
  double expected_gap = 0.0;    // 1 / (lambda log n)
  KsResult gap_ks;              // vs Exp(lambda log n)
  std::uint64_t truncated = 0;
};

/// Lifetime and branch-gap laws over many caterpillars. When `kappa` is not
/// supplied it is estimated from the realized branch counts.
LifetimeReport lifetime_statistics(std::uint64_t runs, const ModelParams& params, RngStream& rng,
                                   std::optional<double> kappa = std::nullopt,
                                   const CaterpillarOptions& opts = {});

/// Node of the branching caterpillar, keyed by a {1,2}-string.
struct ForestNode {
  std::vector<std::uint8_t> key;  // empty = root
  std::uint32_t parent = kNoParent;
  double t_birth = 0.0;
  double t_death = 0.0;           // = t_birth + lifetime when completed
  Vec2 p_birth{};
  bool alive_at_horizon = false;
  Vec2 position_at_horizon{};
  Caterpillar body;

  static constexpr std::uint32_t kNoParent = 0xffffffff;
};

struct CaterpillarForest {
  std::vector<ForestNode> nodes;
  double horizon = 0.0;
  bool truncated = false;
  int max_depth = 0;

  std::size_t alive_count() const;
  std::vector<Vec2> leaf_positions() const;
};

struct ForestOptions {
  std::size_t max_nodes = 1 << 20;
  CaterpillarOptions node;
};

/// Branching caterpillar to time T. Every node is driven by its own stream
/// keyed on the {1,2}-string, so the result does not depend on traversal
/// order.
CaterpillarForest simulate_branching_caterpillar(Vec2 p, double T, const ModelParams& params,
                                                 const RngStream& base,
                                                 const ForestOptions& opts = {});

/// Two-sided Hausdorff-style distance between path sets: sup distance on a
/// shared time grid, min over the other set, max over both directions.
double path_set_distance(const PathSet<2>& a, const PathSet<2>& b, double T, double grid_dt);

}  // namespace slfv
