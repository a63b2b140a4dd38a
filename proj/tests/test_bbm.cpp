#include <doctest.h>

#include <cmath>
#include <vector>

#include "slfv/bbm.hpp"
#include "slfv/errors.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

TEST_CASE("yule mean: expected particle count is e^{VT}") {
  RngStream base(91, 0);
  const int trees = 100000;
  double total = 0;
  for (int i = 0; i < trees; ++i) {
    RngStream st = base.child(i);
    total += static_cast<double>(simulate_bbm({0.0, 0.0}, 1.0, 1.0, 1.0, 0.0, st)
                                     .particles_at_horizon());
  }
  const double expected = std::exp(1.0);  // Yule mean m' = V m
  CHECK(total / trees == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("particle count law is geometric") {
  RngStream base(92, 0);
  const int trees = 10000;
  const double V = 0.9, T = 1.0;
  std::vector<double> counts;
  for (int i = 0; i < trees; ++i) {
    RngStream st = base.child(i);
    counts.push_back(static_cast<double>(
        simulate_bbm({0.0, 0.0}, V, 0.5, T, 0.0, st).particles_at_horizon()));
  }
  const double success = std::exp(-V * T);
  std::size_t kmax = 0;
  for (double c : counts) kmax = std::max(kmax, static_cast<std::size_t>(c));
  std::vector<double> obs(kmax, 0.0), expected(kmax, 0.0);
  for (double c : counts) obs[static_cast<std::size_t>(c) - 1] += 1.0;
  for (std::size_t k = 0; k < kmax; ++k)
    expected[k] = trees * success * std::pow(1.0 - success, static_cast<double>(k));
  const Chi2Result chi = chi2_gof(obs, expected);
  CHECK(chi.p_value > 0.01);
}

TEST_CASE("single-particle displacement variance is sigma2 T") {
  RngStream base(93, 0);
  const double sigma2 = 0.7, T = 1.3;
  std::vector<double> xs, ys;
  for (int i = 0; i < 10000; ++i) {
    RngStream st = base.child(i);
    // V tiny: no branching in [0,T] with overwhelming probability
    const BBMTree tree = simulate_bbm({0.0, 0.0}, 1e-9, sigma2, T, 0.0, st);
    REQUIRE(tree.particles_at_horizon() == 1);
    const Vec2 q = tree.leaf_positions()[0];
    xs.push_back(q[0]);
    ys.push_back(q[1]);
  }
  CHECK(variance(xs) == doctest::Approx(sigma2 * T).epsilon(0.05));
  CHECK(variance(ys) == doctest::Approx(sigma2 * T).epsilon(0.05));
}

TEST_CASE("branch chain gaps are Exp(V) along root-to-leaf chains") {
  RngStream base(94, 0);
  const double V = 1.4;
  std::vector<double> gaps;
  for (int i = 0; i < 4000 && gaps.size() < 10000; ++i) {
    RngStream st = base.child(i);
    const BBMTree tree = simulate_bbm({0.0, 0.0}, V, 1.0, 2.0, 0.0, st);
    for (const auto& node : tree.nodes)
      if (!node.alive_at_horizon) gaps.push_back(node.t_death - node.t_birth);
  }
  // branch gaps on internal nodes are censoring-free Exp(V) draws
  const KsResult ks =
      ks_test(gaps, [&](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-V * x); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("spatial isotropy of leaf directions") {
  RngStream base(95, 0);
  std::vector<double> obs(12, 0.0);
  int total = 0;
  for (int i = 0; i < 4000; ++i) {
    RngStream st = base.child(i);
    const BBMTree tree = simulate_bbm({0.0, 0.0}, 0.8, 1.0, 1.0, 0.0, st);
    for (const auto& q : tree.leaf_positions()) {
      const double angle = std::atan2(q[1], q[0]) + 3.14159265358979323846;
      const int sector = std::min(11, static_cast<int>(angle / (2 * 3.14159265358979323846 / 12)));
      obs[sector] += 1.0;
      ++total;
    }
  }
  std::vector<double> expected(12, total / 12.0);
  CHECK(chi2_gof(obs, expected).p_value > 0.01);
}

TEST_CASE("grid paths cover the lifespan") {
  RngStream rng(96, 0);
  const BBMTree tree = simulate_bbm({1.0, -1.0}, 0.5, 1.0, 1.0, 0.01, rng);
  for (const auto& node : tree.nodes) {
    REQUIRE(!node.path.times.empty());
    CHECK(node.path.times.front() == doctest::Approx(node.t_birth));
    CHECK(node.path.times.back() == doctest::Approx(node.t_death));
    CHECK(node.path.points.front() == node.p_birth);
    CHECK(node.path.points.back() == node.p_death);
  }
  CHECK(tree.nodes.front().p_birth == Vec2{1.0, -1.0});
}

TEST_CASE("family comparison is null on identical inputs and separates laws") {
  RngStream base(97, 0);
  std::vector<BBMTree> trees_a, trees_b, trees_c;
  for (int i = 0; i < 2000; ++i) {
    RngStream sa = base.child(3 * i);
    RngStream sb = base.child(3 * i + 1);
    RngStream sc = base.child(3 * i + 2);
    trees_a.push_back(simulate_bbm({0.0, 0.0}, 1.0, 1.0, 1.0, 0.0, sa));
    trees_b.push_back(simulate_bbm({0.0, 0.0}, 1.0, 1.0, 1.0, 0.0, sb));
    trees_c.push_back(simulate_bbm({0.0, 0.0}, 2.5, 3.0, 1.0, 0.0, sc));
  }
  const FamilySample a = family_sample_from_trees(trees_a, {0.0, 0.0});
  const FamilySample b = family_sample_from_trees(trees_b, {0.0, 0.0});
  const FamilySample c = family_sample_from_trees(trees_c, {0.0, 0.0});

  const FamilyComparison self = compare_family_structure(a, a);
  CHECK(self.count_chi2.statistic == doctest::Approx(0.0));
  CHECK(self.dx_ks.statistic == doctest::Approx(0.0));
  CHECK(self.pair_dist_ks.statistic == doctest::Approx(0.0));

  const FamilyComparison same_law = compare_family_structure(a, b);
  CHECK(same_law.count_chi2.p_value > 0.01);
  CHECK(same_law.dx_ks.p_value > 0.01);

  const FamilyComparison different = compare_family_structure(a, c);
  CHECK(different.count_chi2.p_value < 1e-4);
  CHECK(different.dx_ks.p_value < 1e-4);
}

TEST_CASE("parameter validation") {
  RngStream rng(98, 0);
  CHECK_THROWS_AS(simulate_bbm({0.0, 0.0}, 0.0, 1.0, 1.0, 0.0, rng), ParamError);
  CHECK_THROWS_AS(simulate_bbm({0.0, 0.0}, 1.0, -1.0, 1.0, 0.0, rng), ParamError);
  CHECK_THROWS_AS(simulate_bbm({0.0, 0.0}, 1.0, 1.0, 0.0, 0.0, rng), ParamError);
}
