#include "slfv/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "slfv/errors.hpp"

namespace slfv {

std::size_t BBMTree::particles_at_horizon() const {
  std::size_t k = 0;
  for (const auto& n : nodes) k += n.alive_at_horizon ? 1 : 0;
  return k;
}

std::vector<Vec2> BBMTree::leaf_positions() const {
  std::vector<Vec2> out;
  for (const auto& n : nodes)
    if (n.alive_at_horizon) out.push_back(n.p_death);
  return out;
}

BBMTree simulate_bbm(Vec2 p, double V, double sigma2, double T, double grid_dt, RngStream& rng) {
  if (!(V > 0)) throw ParamError("simulate_bbm: branching rate must be positive");
  if (!(sigma2 > 0)) throw ParamError("simulate_bbm: diffusion constant must be positive");
  if (!(T > 0)) throw ParamError("simulate_bbm: horizon must be positive");

  BBMTree tree;
  tree.V = V;
  tree.sigma2 = sigma2;
  tree.horizon = T;

  struct Pending {
    std::vector<std::uint8_t> key;
    std::uint32_t parent;
    double t_birth;
    Vec2 p_birth;
  };
  std::deque<Pending> queue;
  queue.push_back({{}, 0xffffffffu, 0.0, p});

  const double sd_rate = std::sqrt(sigma2);
  while (!queue.empty()) {
    if (tree.nodes.size() >= (1u << 22))
      throw ParamError("simulate_bbm: tree exceeds the node limit; V*T too large");
    Pending item = std::move(queue.front());
    queue.pop_front();

    BBMNode node;
    node.key = item.key;
    node.parent = item.parent;
    node.t_birth = item.t_birth;
    node.p_birth = item.p_birth;

    const double life = rng.exponential(V);
    const double t_end = std::min(item.t_birth + life, T);
    node.alive_at_horizon = item.t_birth + life >= T;
    node.t_death = t_end;

    // Brownian path over [t_birth, t_end]: sampled on the grid when asked,
    // otherwise just the exact endpoint increment
    Vec2 pos = item.p_birth;
    double t = item.t_birth;
    if (grid_dt > 0) {
      node.path.times.push_back(t);
      node.path.points.push_back(pos);
      for (double tg = std::ceil(t / grid_dt) * grid_dt; tg < t_end; tg += grid_dt) {
        if (tg <= t) continue;
        const double dt = tg - t;
        pos[0] += sd_rate * std::sqrt(dt) * rng.normal();
        pos[1] += sd_rate * std::sqrt(dt) * rng.normal();
        t = tg;
        node.path.times.push_back(t);
        node.path.points.push_back(pos);
      }
    }
    const double dt = t_end - t;
    if (dt > 0) {
      pos[0] += sd_rate * std::sqrt(dt) * rng.normal();
      pos[1] += sd_rate * std::sqrt(dt) * rng.normal();
    }
    node.p_death = pos;
    if (grid_dt > 0) {
      node.path.times.push_back(t_end);
      node.path.points.push_back(pos);
    }

    const std::uint32_t index = static_cast<std::uint32_t>(tree.nodes.size());
    if (!node.alive_at_horizon) {
      for (int child = 1; child <= 2; ++child) {
        Pending next;
        next.key = node.key;
        next.key.push_back(static_cast<std::uint8_t>(child));
        next.parent = index;
        next.t_birth = t_end;
        next.p_birth = pos;
        queue.push_back(std::move(next));
      }
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

namespace {

void append_family(FamilySample& s, const std::vector<Vec2>& leaves, Vec2 root) {
  s.counts.push_back(static_cast<double>(leaves.size()));
  for (const auto& q : leaves) {
    s.dx.push_back(q[0] - root[0]);
    s.dy.push_back(q[1] - root[1]);
  }
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = i + 1; j < leaves.size(); ++j)
      s.pair_dists.push_back(norm(leaves[i] - leaves[j]));
}

}  // namespace

FamilySample family_sample_from_forests(const std::vector<CaterpillarForest>& forests, Vec2 root) {
  FamilySample s;
  for (const auto& f : forests) append_family(s, f.leaf_positions(), root);
  return s;
}

FamilySample family_sample_from_trees(const std::vector<BBMTree>& trees, Vec2 root) {
  FamilySample s;
  for (const auto& t : trees) append_family(s, t.leaf_positions(), root);
  return s;
}

FamilyComparison compare_family_structure(const FamilySample& a, const FamilySample& b) {
  if (a.counts.empty() || b.counts.empty())
    throw ParamError("compare_family_structure: empty sample");
  FamilyComparison cmp;

  double max_count = 0;
  for (double c : a.counts) max_count = std::max(max_count, c);
  for (double c : b.counts) max_count = std::max(max_count, c);
  const std::size_t bins = static_cast<std::size_t>(max_count) + 1;
  std::vector<double> ha(bins, 0.0), hb(bins, 0.0);
  for (double c : a.counts) ha[static_cast<std::size_t>(c)] += 1.0;
  for (double c : b.counts) hb[static_cast<std::size_t>(c)] += 1.0;
  cmp.count_chi2 = chi2_two_sample(ha, hb);
  cmp.count_mean_a = mean(a.counts);
  cmp.count_mean_b = mean(b.counts);

  cmp.dx_ks = ks_test_two_sample(a.dx, b.dx);
  cmp.dy_ks = ks_test_two_sample(a.dy, b.dy);
  if (!a.pair_dists.empty() && !b.pair_dists.empty())
    cmp.pair_dist_ks = ks_test_two_sample(a.pair_dists, b.pair_dists);
  return cmp;
}

}  // namespace slfv
