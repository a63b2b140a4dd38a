#include <doctest.h>

#include <cmath>
#include <vector>

#include "slfv/dual.hpp"
#include "slfv/errors.hpp"
#include "slfv/export.hpp"
#include "slfv/model_params.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

namespace {

ModelParams params(double u, double n, double c = 4.0) {
  return ModelParams::create(2, RadiusMeasure::delta(1.0), u, n, c);
}

Event<2> make_event(double t, Vec2 x, double r, bool selective, Vec2 z1, Vec2 z2, double q) {
  Event<2> e;
  e.t = t;
  e.x = x;
  e.r = r;
  e.selective = selective;
  e.z1 = z1;
  e.z2 = z2;
  e.q = q;
  return e;
}

}  // namespace

TEST_CASE("apply_event marks, merges and branches") {
  const ModelParams p = params(0.5, 16.0);
  auto state = DualState<2>::start({{0.0, 0.0}, {0.01, 0.0}});
  const std::vector<std::uint32_t> both = {0, 1};

  SUBCASE("no lineage marked leaves only the clock") {
    // q = 0.9: rank 1 unmarked (0.9 > 0.5), rank 2 digit = (0.9-0.5)/0.5 = 0.8 unmarked
    const auto e = make_event(0.5, {0.0, 0.0}, 0.02, false, {0.1, 0.0}, {0.0, 0.1}, 0.9);
    const auto entry = apply_event(state, e, both, p);
    CHECK(!entry);
    CHECK(state.t == 0.5);
    CHECK(state.active_count() == 2);
    CHECK(state.event_count == 0);
  }

  SUBCASE("neutral event with both marked coalesces to the first parent") {
    // q = 0.2: rank 1 marked, digit -> 0.4 marked at rank 2
    const auto e = make_event(0.5, {0.0, 0.0}, 0.02, false, {0.5, 0.0}, {0.0, 0.1}, 0.2);
    const auto entry = apply_event(state, e, both, p);
    REQUIRE(entry);
    CHECK(entry->marked == std::vector<std::uint32_t>{0, 1});
    CHECK(state.active_count() == 1);
    CHECK(state.positions[0] == Vec2{0.01, 0.0});
    CHECK(state.coalesced_to[1].has_value());
    CHECK(*state.coalesced_to[1] == 0);
    CHECK(state.location(1) == state.location(0));
    CHECK(state.coalescence_count == 1);
  }

  SUBCASE("selective event with one marked lineage branches") {
    // q = 0.2 marks rank 1; digit -> 0.4 <= 0.5 marks rank 2 as well... pick q = 0.45:
    // rank 1 marked (0.45 <= 0.5); digit = 0.9 -> rank 2 unmarked
    const auto e = make_event(0.5, {0.0, 0.0}, 0.02, true, {0.5, 0.5}, {-0.5, 0.0}, 0.45);
    const auto entry = apply_event(state, e, both, p);
    REQUIRE(entry);
    CHECK(entry->marked == std::vector<std::uint32_t>{0});
    CHECK(state.active_count() == 3);
    CHECK(state.positions[0] == Vec2{0.01, 0.01});   // x + r z1
    CHECK(state.positions[2] == Vec2{-0.01, 0.0});   // x + r z2
    CHECK(state.branch_count == 1);
  }

  SUBCASE("stale event times are rejected") {
    state.t = 1.0;
    const auto e = make_event(0.5, {0.0, 0.0}, 0.02, false, {0.0, 0.0}, {0.0, 0.0}, 0.2);
    CHECK_THROWS_AS(apply_event(state, e, both, p), SequencingError);
  }
}

TEST_CASE("neutral-only dual never grows") {
  const ModelParams p = params(0.8, 1.0);  // s_n = 0 at n = 1
  REQUIRE(!p.selection_enabled());
  RngStream rng(41, 0);
  auto traj = simulate_dual<2>({{0.0, 0.0}, {0.4, 0.0}, {0.0, 0.7}}, 3.0, p, rng);
  CHECK(traj.final_state.positions.size() == 3);
  CHECK(traj.final_state.active.size() <= 3);
  CHECK(traj.final_state.branch_count == 0);
}

TEST_CASE("impact one and coincident lineages coalesce at the first event") {
  const ModelParams p = params(1.0, 1.0);
  RngStream rng(42, 0);
  auto traj = simulate_dual<2>({{0.0, 0.0}, {0.0, 0.0}}, 50.0, p, rng);
  REQUIRE(!traj.log.empty());
  CHECK(traj.log.front().marked.size() == 2);
  CHECK(traj.final_state.active.size() == 1);
  CHECK(traj.final_state.coalescence_count == 1);
}

TEST_CASE("single-lineage displacement variance matches the diffusion constant") {
  const ModelParams p = params(1.0, 100.0);
  const int reps = 3000;
  std::vector<double> xs, ys;
  RngStream base(43, 0);
  for (int i = 0; i < reps; ++i) {
    RngStream st = base.child(i);
    auto traj = simulate_dual<2>({{0.0, 0.0}}, 1.0, p, st);
    const Vec2 q = traj.final_state.positions[0];
    xs.push_back(q[0]);
    ys.push_back(q[1]);
  }
  const double v = 0.5 * (variance(xs) + variance(ys));
  // relative se of the pooled variance estimate is about sqrt(2/(2 reps)) = 1.8%
  CHECK(std::abs(v - p.sigma2()) / p.sigma2() < 0.06);
}

TEST_CASE("jump displacement law matches the jump intensity density") {
  const ModelParams p = ModelParams::create(2, RadiusMeasure({{0.6, 0.5}, {1.0, 0.5}}), 1.0, 9.0);
  RngStream rng(44, 0);
  CoveringEventSampler<2> sampler(p);
  std::vector<std::uint32_t> hits;
  // jumps of a lineage held at the origin (re-centred each event)
  const int n_jumps = 100000;
  const int bins = 24;
  const double top = 2.0 * p.R_n();
  std::vector<double> obs(bins, 0.0);
  std::vector<Vec2> pos = {{0.0, 0.0}};
  for (int i = 0; i < n_jumps; ++i) {
    const Event<2> ev = sampler.next(pos, 0.0, rng, hits, nullptr);
    const Vec2 parent = ev.x + ev.r * ev.z1;
    const double d = norm(parent);
    const int b = std::min(bins - 1, static_cast<int>(d / top * bins));
    obs[b] += 1.0;
  }
  // expected bin mass from the radial density s -> m(s) * 2 pi s (u cancels in
  // the conditional law; every covering event is a jump at u = 1)
  std::vector<double> expected(bins, 0.0);
  double mass = 0.0;
  const int sub = 50;
  for (int b = 0; b < bins; ++b) {
    for (int k = 0; k < sub; ++k) {
      const double s = (b + (k + 0.5) / sub) * top / bins;
      expected[b] += jump_intensity_density(p, s) * 2 * 3.14159265358979323846 * s;
    }
    mass += expected[b];
  }
  for (double& e : expected) e *= n_jumps / mass;
  const Chi2Result chi = chi2_gof(obs, expected);
  CHECK(chi.p_value > 0.01);
}

TEST_CASE("pair coalescence rate matches the rescaled density") {
  const ModelParams p = params(0.7, 1.0);
  const double rho = 0.5;
  RngStream rng(45, 0);
  CoveringEventSampler<2> sampler(p);
  std::vector<std::uint32_t> hits;
  const std::vector<Vec2> pos = {{0.0, 0.0}, {rho, 0.0}};
  // pair held at separation rho: count events that would coalesce them
  const int n_events = 200000;
  int coalescing = 0;
  double t = 0;
  const ModelParams& pref = p;
  for (int i = 0; i < n_events; ++i) {
    const Event<2> ev = sampler.next(pos, t, rng, hits, nullptr);
    t = ev.t;
    if (hits.size() == 2 && mark_member(ev.q, pref.u(), 1) && mark_member(ev.q, pref.u(), 2))
      ++coalescing;
  }
  const double empirical_rate = coalescing / t;
  const double expected = pair_coalescence_rate(p, rho);
  CHECK(expected == doctest::Approx(0.7 * 0.7 * lens_volume(1.0, rho, 2)).epsilon(1e-12));
  CHECK(std::abs(empirical_rate - expected) / expected < 0.03);
}

TEST_CASE("path enumeration counts branches") {
  const ModelParams p = params(0.8, 40.0);
  RngStream base(46, 0);
  // find a trajectory with branches and verify the path count
  for (int i = 0; i < 50; ++i) {
    RngStream st = base.child(i);
    auto traj = simulate_dual<2>({{0.0, 0.0}}, 0.5, p, st);
    const PathSet<2> paths = potential_lineage_paths(traj, 4096);
    if (traj.final_state.branch_count == 0) {
      CHECK(paths.paths.size() == 1);
    } else {
      CHECK(paths.paths.size() >= 2);
      // every extra path needs a branch on its route
      CHECK(paths.paths.size() <=
            (1ull << std::min<std::uint64_t>(traj.final_state.branch_count, 40)));
    }
    CHECK(!paths.truncated);
  }
}

TEST_CASE("replaying the recorded trace reproduces the trajectory") {
  const ModelParams p = params(0.8, 30.0);
  RngStream rng(47, 0);
  std::vector<Event<2>> trace;
  auto traj = simulate_dual<2>({{0.0, 0.0}, {0.2, 0.1}}, 1.0, p, rng, {}, {}, {}, &trace);

  auto replay = DualState<2>::start({{0.0, 0.0}, {0.2, 0.1}});
  std::vector<std::uint32_t> hits;
  for (const auto& ev : trace) {
    // recompute covered active lineages from the replayed state
    hits.clear();
    for (std::uint32_t rank = 0; rank < replay.active.size(); ++rank) {
      const Vec2 q = replay.positions[replay.active[rank]];
      if (norm2(q - ev.x) <= ev.r * ev.r) hits.push_back(rank);
    }
    if (hits.empty()) {
      replay.t = ev.t;
      continue;
    }
    apply_event(replay, ev, hits, p);
  }
  CHECK(replay.positions.size() == traj.final_state.positions.size());
  for (std::size_t i = 0; i < replay.positions.size(); ++i)
    CHECK(replay.positions[i] == traj.final_state.positions[i]);
  CHECK(replay.active == traj.final_state.active);
  CHECK(replay.event_count == traj.final_state.event_count);
}

TEST_CASE("caps flag truncation instead of throwing") {
  const ModelParams p = params(0.8, 50.0);
  RngStream rng(48, 0);
  DualCaps caps;
  caps.max_events = 5;
  auto traj = simulate_dual<2>({{0.0, 0.0}}, 10.0, p, rng, caps);
  CHECK(traj.truncated);
  CHECK(traj.final_state.event_count <= 5);
}

TEST_CASE("snapshots and exports") {
  const ModelParams p = params(0.8, 20.0);
  RngStream rng(49, 0);
  auto traj = simulate_dual<2>({{0.0, 0.0}}, 1.0, p, rng, {}, {0.25, 0.5, 0.75});
  CHECK(traj.snapshots.size() == 3);
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i)
    CHECK(traj.snapshots[i].t > traj.snapshots[i - 1].t);
  const std::string j = trajectory_json(traj);
  CHECK(j.find("\"snapshots\"") != std::string::npos);
  const std::string csv = trajectory_snapshots_csv(traj, 3);
  CHECK(csv.rfind("3,", 0) == 0);
}

TEST_CASE("dual in three dimensions moves a lineage") {
  const ModelParams p = ModelParams::create(3, RadiusMeasure::delta(1.0), 0.9, 8.0);
  RngStream rng(50, 0);
  auto traj = simulate_dual<3>({{0.0, 0.0, 0.0}}, 0.2, p, rng);
  CHECK(traj.final_state.event_count > 0);
  CHECK(norm(traj.final_state.positions[0]) > 0.0);
}
