#include <doctest.h>

#include <cmath>
#include <vector>

#include "slfv/caterpillar.hpp"
#include "slfv/errors.hpp"
#include "slfv/export.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

namespace {

// small-radius measure keeps the branch rate low enough for quick forests
ModelParams lab_params(double n, double c = 1.6, double u = 0.35, double radius = 0.3) {
  return ModelParams::create(2, RadiusMeasure::delta(radius), u, n, c);
}

}  // namespace

TEST_CASE("caterpillar rejects configurations that cannot branch") {
  RngStream rng(81, 0);
  const ModelParams neutral = ModelParams::create(2, RadiusMeasure::delta(1.0), 0.8, 1.0);
  CHECK_THROWS_AS(simulate_caterpillar({0.0, 0.0}, neutral, rng), ParamError);
}

TEST_CASE("caterpillar invariants") {
  const ModelParams p = lab_params(4096.0);
  const double window = p.gamma_n();
  RngStream base(82, 0);
  int overshoots = 0, diverges = 0;
  for (int i = 0; i < 300; ++i) {
    RngStream st = base.child(i);
    const Caterpillar cat = simulate_caterpillar({0.0, 0.0}, p, st);
    REQUIRE(!cat.truncated);
    REQUIRE(cat.k_star >= 1);
    CHECK(cat.branch_times.size() == static_cast<std::size_t>(cat.k_star));
    CHECK(cat.branch_outcomes.size() == static_cast<std::size_t>(cat.k_star));
    // all but the last branch coalesce; the last one does not
    for (int k = 0; k + 1 < cat.k_star; ++k) CHECK(cat.branch_outcomes[k] == Outcome::Coalesce);
    CHECK(cat.branch_outcomes.back() != Outcome::Coalesce);
    CHECK(cat.terminal == cat.branch_outcomes.back());
    (cat.terminal == Outcome::Overshoot ? overshoots : diverges)++;
    // lifetime bounded by the last branch window
    CHECK(cat.lifetime >= cat.branch_times.back());
    CHECK(cat.lifetime <= cat.branch_times.back() + window + 1e-12);
    // suppression: gaps nonnegative, branches separated by at least a window
    REQUIRE(cat.branch_gaps.size() == cat.branch_times.size());
    CHECK(cat.branch_times.front() >= window);
    for (double g : cat.branch_gaps) CHECK(g >= 0.0);
    for (std::size_t k = 1; k < cat.branch_times.size(); ++k)
      CHECK(cat.branch_times[k] - cat.branch_times[k - 1] >= window);
    // terminal legs: diverged pairs sit at least gamma_n apart
    if (cat.terminal == Outcome::Diverge)
      CHECK(norm(cat.p1 - cat.p2) >= p.gamma_n() - 1e-12);
    else
      CHECK(norm(cat.p1 - cat.p2) < p.gamma_n());
  }
  CHECK(diverges > 0);
}

TEST_CASE("branch gaps follow Exp(lambda log n) and k-star is geometric") {
  const ModelParams p = lab_params(4096.0);
  RngStream rng(83, 0);
  const LifetimeReport rep = lifetime_statistics(4000, p, rng);
  CHECK(rep.truncated == 0);
  CHECK(rep.gap_ks.p_value > 0.01);
  CHECK(rep.mean_gap == doctest::Approx(rep.expected_gap).epsilon(0.05));
  // lifetime against the self-estimated exponential
  CHECK(rep.kappa_self_estimated);
  CHECK(rep.kappa_used > 0.0);
  CHECK(rep.mean_lifetime > 0.0);
}

TEST_CASE("branch outcomes do not drift with the branch index") {
  const ModelParams p = lab_params(4096.0);
  RngStream base(84, 0);
  std::vector<double> ks, outcomes;
  for (int i = 0; i < 4000; ++i) {
    RngStream st = base.child(i);
    const Caterpillar cat = simulate_caterpillar({0.0, 0.0}, p, st);
    for (std::size_t k = 0; k < cat.branch_outcomes.size(); ++k) {
      ks.push_back(static_cast<double>(k + 1));
      outcomes.push_back(cat.branch_outcomes[k] == Outcome::Coalesce ? 0.0 : 1.0);
    }
  }
  // slope of a linear-probability fit of outcome on branch index; the
  // exchangeability of branch outcomes puts it at zero
  const LinearFit fit = linear_fit(ks, outcomes);
  double sxx = 0.0;
  const double mk = mean(ks);
  for (double k : ks) sxx += (k - mk) * (k - mk);
  double rss = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double r = outcomes[i] - fit.intercept - fit.slope * ks[i];
    rss += r * r;
  }
  const double slope_se = std::sqrt(rss / (ks.size() - 2) / sxx);
  CHECK(std::abs(fit.slope) < 3 * slope_se + 1e-9);
}

TEST_CASE("forest with a horizon below the minimum lifetime is the root alone") {
  const ModelParams p = lab_params(4096.0);
  RngStream rng(85, 0);
  const double T = p.gamma_n() / 2;  // below the first possible branch
  const CaterpillarForest forest = simulate_branching_caterpillar({0.0, 0.0}, T, p, rng);
  CHECK(forest.nodes.size() == 1);
  CHECK(forest.alive_count() == 1);
  CHECK(forest.max_depth == 0);
}

TEST_CASE("forest consistency and growth") {
  const ModelParams p = lab_params(1024.0);
  RngStream base(86, 0);
  double mean_alive_short = 0, mean_alive_long = 0;
  const int reps = 60;
  for (int i = 0; i < reps; ++i) {
    const CaterpillarForest forest =
        simulate_branching_caterpillar({0.0, 0.0}, 4.0, p, base.child(i));
    mean_alive_long += static_cast<double>(forest.alive_count());
    const CaterpillarForest shorter =
        simulate_branching_caterpillar({0.0, 0.0}, 1.0, p, base.child(i));
    mean_alive_short += static_cast<double>(shorter.alive_count());
    CHECK(forest.alive_count() >= 1);
    for (std::size_t k = 0; k < forest.nodes.size(); ++k) {
      const ForestNode& node = forest.nodes[k];
      if (node.parent != ForestNode::kNoParent) {
        const ForestNode& parent = forest.nodes[node.parent];
        // children are born where and when the parent died
        CHECK(node.t_birth == parent.t_death);
        const Vec2 expected = node.key.back() == 1 ? parent.body.p1 : parent.body.p2;
        CHECK(node.p_birth == expected);
        CHECK(node.key.size() == parent.key.size() + 1);
      }
      if (!node.alive_at_horizon && !node.body.truncated)
        CHECK(node.t_death - node.t_birth >= p.gamma_n());
    }
  }
  CHECK(mean_alive_long / reps > mean_alive_short / reps);
}

TEST_CASE("forest streams are keyed by node, not by traversal order") {
  const ModelParams p = lab_params(1024.0);
  RngStream base(87, 0);
  const CaterpillarForest a = simulate_branching_caterpillar({0.0, 0.0}, 2.0, p, base);
  const CaterpillarForest b = simulate_branching_caterpillar({0.0, 0.0}, 2.0, p, base);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].t_death == b.nodes[i].t_death);
    CHECK(a.nodes[i].p_birth == b.nodes[i].p_birth);
  }
}

TEST_CASE("forest export shapes") {
  const ModelParams p = lab_params(1024.0);
  RngStream rng(88, 0);
  ForestOptions opts;
  opts.node.grid_dt = 0.05;
  const CaterpillarForest forest = simulate_branching_caterpillar({0.0, 0.0}, 2.0, p, rng, opts);
  const std::string json = forest_json(forest);
  CHECK(json.find("\"nodes\"") != std::string::npos);
  const std::string csv = forest_paths_csv(forest);
  CHECK(csv.rfind("key,leg,t,x,y\n", 0) == 0);
  CHECK(csv.size() > 20);
}

TEST_CASE("path set distance") {
  SteppedPath<2> origin{{0.0}, {Vec2{0.0, 0.0}}};
  SteppedPath<2> three{{0.0}, {Vec2{3.0, 0.0}}};
  PathSet<2> a{{origin}, false};
  PathSet<2> b{{three}, false};
  CHECK(path_set_distance(a, a, 1.0, 0.1) == 0.0);
  CHECK(path_set_distance(a, b, 1.0, 0.1) == doctest::Approx(3.0));
  CHECK(path_set_distance(a, b, 1.0, 0.1) == path_set_distance(b, a, 1.0, 0.1));
  // a two-path set against one of its members
  SteppedPath<2> step{{0.0, 0.5}, {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}}};
  PathSet<2> ab{{origin, step}, false};
  CHECK(path_set_distance(ab, a, 1.0, 0.05) == doctest::Approx(1.0));
  CHECK_THROWS_AS(path_set_distance(PathSet<2>{}, a, 1.0, 0.1), ParamError);
}
