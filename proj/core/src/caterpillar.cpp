#include "slfv/caterpillar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "slfv/errors.hpp"
#include "slfv/geometry.hpp"
#include "slfv/single_walk.hpp"

namespace slfv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void record_point(SteppedPath<2>& path, double t, const Vec2& p, double grid_dt,
                  bool force = false) {
  if (!force && grid_dt > 0 && !path.times.empty() && t < path.times.back() + grid_dt) return;
  path.times.push_back(t);
  path.points.push_back(p);
}

}  // namespace

Caterpillar simulate_caterpillar(Vec2 p, const ModelParams& params, RngStream& rng,
                                 const CaterpillarOptions& opts) {
  if (params.d() != 2) throw ParamError("simulate_caterpillar: planar model required");
  if (!(std::log(params.n()) > 0.0)) throw ParamError("simulate_caterpillar: n must exceed 1");
  if (!params.selection_enabled())
    throw ParamError("simulate_caterpillar: selection disabled (s_n = 0), no branch can occur");

  const double window = params.gamma_n();  // suppression window (log n)^{-c}
  const double gamma = params.gamma_n();   // divergence threshold
  const double stop_time = opts.max_time >= 0 ? opts.max_time : kInf;

  Caterpillar cat;
  cat.start = p;
  record_point(cat.path1, 0.0, p, opts.grid_dt, true);

  SingleLineageWalk walk(params, p, 0.0);
  double window_end = window;
  std::uint64_t banked_events = 0;  // events of finished walk/pair segments

  for (;;) {
    if (banked_events + walk.events() >= opts.max_events) {
      cat.truncated = true;
      cat.events = banked_events + walk.events();
      return cat;
    }
    const SingleLineageWalk::Step s = walk.step(rng, stop_time);
    if (s.deadline_hit) {
      cat.ended_by_time = true;
      cat.position_at_end = walk.position();
      cat.events = banked_events + walk.events();
      record_point(cat.path1, s.t, walk.position(), opts.grid_dt, true);
      return cat;
    }
    if (!s.moved) continue;
    record_point(cat.path1, s.t, walk.position(), opts.grid_dt);
    if (!(s.selective && s.t > window_end)) continue;

    // branch: the walking lineage moved to the first parent, the new leg
    // starts at the second
    const double tau_br = s.t;
    const Vec2 leg1 = walk.position();
    const Vec2 leg2 = s.center + s.rho * rng.unit_ball<2>();
    cat.branch_times.push_back(tau_br);
    cat.branch_gaps.push_back(tau_br - window_end);
    record_point(cat.path1, tau_br, leg1, opts.grid_dt, true);
    record_point(cat.path2, tau_br, leg2, opts.grid_dt, true);

    const double pair_deadline = tau_br + window;
    const double effective_deadline = std::min(pair_deadline, stop_time);
    PairWalk pair(params, leg1, leg2, tau_br);
    for (;;) {
      if (banked_events + walk.events() + pair.events() >= opts.max_events) {
        cat.truncated = true;
        cat.events = banked_events + walk.events() + pair.events();
        return cat;
      }
      const PairWalk::Step ps = pair.step(rng, effective_deadline);
      if (ps.deadline_hit) {
        if (stop_time < pair_deadline) {
          cat.ended_by_time = true;
          cat.position_at_end = pair.position1();
          cat.events = banked_events + walk.events() + pair.events();
          record_point(cat.path1, ps.t, pair.position1(), opts.grid_dt, true);
          record_point(cat.path2, ps.t, pair.position2(), opts.grid_dt, true);
          return cat;
        }
        // overshoot: the branch failed to resolve within the window
        cat.branch_outcomes.push_back(Outcome::Overshoot);
        cat.k_star = static_cast<int>(cat.branch_times.size());
        cat.lifetime = pair_deadline;
        cat.terminal = Outcome::Overshoot;
        cat.p1 = pair.position1();
        cat.p2 = pair.position2();
        cat.events = banked_events + walk.events() + pair.events();
        record_point(cat.path1, pair_deadline, cat.p1, opts.grid_dt, true);
        record_point(cat.path2, pair_deadline, cat.p2, opts.grid_dt, true);
        return cat;
      }
      if (ps.moved) {
        record_point(cat.path1, ps.t, pair.position1(), opts.grid_dt);
        record_point(cat.path2, ps.t, pair.position2(), opts.grid_dt);
      }
      if (ps.coalesced) {
        cat.branch_outcomes.push_back(Outcome::Coalesce);
        record_point(cat.path1, ps.t, pair.position1(), opts.grid_dt, true);
        record_point(cat.path2, ps.t, pair.position2(), opts.grid_dt, true);
        break;
      }
      if (pair.separation() >= gamma) {
        cat.branch_outcomes.push_back(Outcome::Diverge);
        cat.k_star = static_cast<int>(cat.branch_times.size());
        cat.lifetime = ps.t;
        cat.terminal = Outcome::Diverge;
        cat.p1 = pair.position1();
        cat.p2 = pair.position2();
        cat.events = banked_events + walk.events() + pair.events();
        record_point(cat.path1, ps.t, cat.p1, opts.grid_dt, true);
        record_point(cat.path2, ps.t, cat.p2, opts.grid_dt, true);
        return cat;
      }
    }
    // the branch coalesced; resume the single walk from the merged point
    banked_events += walk.events() + pair.events();
    walk = SingleLineageWalk(params, pair.position1(), pair.t());
    window_end = pair_deadline;
  }
}

LifetimeReport lifetime_statistics(std::uint64_t runs, const ModelParams& params, RngStream& rng,
                                   std::optional<double> kappa, const CaterpillarOptions& opts) {
  if (runs < 1) throw ParamError("lifetime_statistics: runs must be positive");
  LifetimeReport rep;
  rep.runs = runs;
  std::vector<double> lifetimes;
  std::vector<double> gaps;
  std::uint64_t total_branches = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    RngStream st = rng.child(i);
    const Caterpillar cat = simulate_caterpillar(Vec2{0.0, 0.0}, params, st, opts);
    if (cat.truncated || cat.ended_by_time) {
      ++rep.truncated;
      continue;
    }
    lifetimes.push_back(cat.lifetime);
    for (double g : cat.branch_gaps) gaps.push_back(g);
    total_branches += cat.branch_times.size();
  }
  if (lifetimes.empty()) return rep;

  const double log_n = std::log(params.n());
  if (kappa) {
    rep.kappa_used = *kappa;
  } else {
    // k* is geometric with success rate kappa/log n; invert the mean
    rep.kappa_used =
        log_n * static_cast<double>(lifetimes.size()) / static_cast<double>(total_branches);
    rep.kappa_self_estimated = true;
  }
  const double death_rate = rep.kappa_used * params.lambda();
  rep.mean_lifetime = mean(lifetimes);
  rep.var_lifetime = variance(lifetimes);
  rep.expected_mean = 1.0 / death_rate;
  rep.lifetime_ks =
      ks_test(lifetimes, [&](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-death_rate * x); });
  const double gap_rate = params.lambda() * log_n;
  rep.mean_gap = gaps.empty() ? 0.0 : mean(gaps);
  rep.expected_gap = 1.0 / gap_rate;
  if (!gaps.empty())
    rep.gap_ks =
        ks_test(gaps, [&](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-gap_rate * x); });
  return rep;
}

std::size_t CaterpillarForest::alive_count() const {
  std::size_t k = 0;
  for (const auto& n : nodes) k += n.alive_at_horizon ? 1 : 0;
  return k;
}

std::vector<Vec2> CaterpillarForest::leaf_positions() const {
  std::vector<Vec2> out;
  for (const auto& n : nodes)
    if (n.alive_at_horizon) out.push_back(n.position_at_horizon);
  return out;
}

namespace {

std::uint64_t key_stream_id(const std::vector<std::uint8_t>& key) {
  std::uint64_t h = 0x9AE16A3B2F90404Full;
  for (std::uint8_t d : key) h = mix64(2 * h + d);
  return h;
}

}  // namespace

CaterpillarForest simulate_branching_caterpillar(Vec2 p, double T, const ModelParams& params,
                                                 const RngStream& base, const ForestOptions& opts) {
  if (!(T > 0)) throw ParamError("simulate_branching_caterpillar: horizon must be positive");
  CaterpillarForest forest;
  forest.horizon = T;

  struct Pending {
    std::vector<std::uint8_t> key;
    std::uint32_t parent;
    double t_birth;
    Vec2 p_birth;
  };
  std::deque<Pending> queue;
  queue.push_back({{}, ForestNode::kNoParent, 0.0, p});

  while (!queue.empty()) {
    if (forest.nodes.size() >= opts.max_nodes) {
      forest.truncated = true;
      break;
    }
    Pending item = std::move(queue.front());
    queue.pop_front();

    RngStream node_rng = base.child(key_stream_id(item.key));
    CaterpillarOptions node_opts = opts.node;
    node_opts.max_time = T - item.t_birth;

    ForestNode node;
    node.key = item.key;
    node.parent = item.parent;
    node.t_birth = item.t_birth;
    node.p_birth = item.p_birth;
    node.body = simulate_caterpillar(item.p_birth, params, node_rng, node_opts);
    forest.max_depth = std::max(forest.max_depth, static_cast<int>(item.key.size()));

    if (node.body.truncated) {
      forest.truncated = true;
      node.t_death = item.t_birth + node.body.lifetime;
      forest.nodes.push_back(std::move(node));
      continue;
    }
    if (node.body.ended_by_time) {
      node.alive_at_horizon = true;
      node.position_at_horizon = node.body.position_at_end;
      node.t_death = T;  // censored at the horizon
      forest.nodes.push_back(std::move(node));
      continue;
    }
    node.t_death = item.t_birth + node.body.lifetime;
    const std::uint32_t parent_index = static_cast<std::uint32_t>(forest.nodes.size());
    for (int child = 1; child <= 2; ++child) {
      Pending next;
      next.key = node.key;
      next.key.push_back(static_cast<std::uint8_t>(child));
      next.parent = parent_index;
      next.t_birth = node.t_death;
      next.p_birth = child == 1 ? node.body.p1 : node.body.p2;
      queue.push_back(std::move(next));
    }
    forest.nodes.push_back(std::move(node));
  }
  return forest;
}

double path_set_distance(const PathSet<2>& a, const PathSet<2>& b, double T, double grid_dt) {
  if (a.paths.empty() || b.paths.empty()) throw ParamError("path_set_distance: empty path set");
  if (!(T > 0) || !(grid_dt > 0)) throw ParamError("path_set_distance: bad grid");
  std::vector<double> grid;
  for (double t = 0.0; t < T; t += grid_dt) grid.push_back(t);
  grid.push_back(T);

  auto sup_dist = [&](const SteppedPath<2>& x, const SteppedPath<2>& y) {
    double worst = 0.0;
    for (double t : grid) worst = std::max(worst, norm(x.at(t) - y.at(t)));
    return worst;
  };
  auto directed = [&](const PathSet<2>& from, const PathSet<2>& to) {
    double worst = 0.0;
    for (const auto& x : from.paths) {
      double best = kInf;
      for (const auto& y : to.paths) best = std::min(best, sup_dist(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace slfv
