#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slfv/covering.hpp"
#include "slfv/errors.hpp"
#include "slfv/event.hpp"
#include "slfv/marks.hpp"
#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Branching-coalescing dual state. Indices are permanent: coalescence adds a
/// pointer to a lower index instead of deleting, so N never decreases and the
/// mark bookkeeping keeps the original indexing semantics.
template <int D>
struct DualState {
  std::vector<Vec<D>> positions;
  std::vector<std::optional<std::uint32_t>> coalesced_to;
  std::vector<std::uint32_t> active;  // ascending indices of non-coalesced lineages
  double t = 0.0;
  std::uint64_t event_count = 0;   // events that marked at least one lineage
  std::uint64_t branch_count = 0;  // selective events that branched
  std::uint64_t coalescence_count = 0;

  static DualState start(std::vector<Vec<D>> points, double t0 = 0.0) {
    DualState s;
    s.positions = std::move(points);
    s.coalesced_to.resize(s.positions.size());
    for (std::uint32_t i = 0; i < s.positions.size(); ++i) s.active.push_back(i);
    s.t = t0;
    return s;
  }

  std::uint32_t representative(std::uint32_t i) const {
    while (coalesced_to[i]) i = *coalesced_to[i];
    return i;
  }

  /// Current location of lineage i (follows coalescence pointers).
  Vec<D> location(std::uint32_t i) const { return positions[representative(i)]; }

  std::size_t active_count() const { return active.size(); }
};

/// Entry in the effective-event log: an applied event together with which
/// active lineages it marked. Enough to replay the trajectory and to
/// enumerate potential ancestral paths.
template <int D>
struct DualLogEntry {
  Event<D> event;
  std::vector<std::uint32_t> marked;  // dual indices, ascending
  Vec<D> parent1{};
  Vec<D> parent2{};                   // meaningful when event.selective
  std::uint32_t new_index = 0;        // lineage born at parent2, if selective
};

/// Apply one event to the dual. Covered active lineages are ranked by index;
/// the i-th covered is marked iff q lies in the i-th mark set. If no lineage
/// is marked only the clock moves. Neutral events merge all marked lineages
/// at the first parent; selective events additionally create one lineage at
/// the second parent.
template <int D>
std::optional<DualLogEntry<D>> apply_event(DualState<D>& state, const Event<D>& ev,
                                           std::span<const std::uint32_t> hit_active_ranks,
                                           const ModelParams& p, const Domain& domain = {}) {
  if (!(ev.t > state.t)) throw SequencingError("apply_event: event time not after state time");
  state.t = ev.t;

  std::vector<std::uint32_t> marked;
  for (std::size_t rank = 0; rank < hit_active_ranks.size(); ++rank) {
    if (mark_member(ev.q, p.u(), static_cast<int>(rank) + 1))
      marked.push_back(state.active[hit_active_ranks[rank]]);
  }
  if (marked.empty()) return std::nullopt;

  state.event_count++;
  const Vec<D> parent1 = domain.template wrap<D>(ev.x + ev.r * ev.z1);
  for (std::uint32_t i : marked) state.positions[i] = parent1;

  DualLogEntry<D> entry;
  entry.event = ev;
  entry.marked = marked;
  entry.parent1 = parent1;

  const std::uint32_t keep = marked.front();
  for (std::size_t m = 1; m < marked.size(); ++m) {
    state.coalesced_to[marked[m]] = keep;
    state.coalescence_count++;
    std::erase(state.active, marked[m]);
  }
  if (ev.selective) {
    const Vec<D> parent2 = domain.template wrap<D>(ev.x + ev.r * ev.z2);
    entry.parent2 = parent2;
    entry.new_index = static_cast<std::uint32_t>(state.positions.size());
    state.positions.push_back(parent2);
    state.coalesced_to.emplace_back();
    state.active.push_back(entry.new_index);
    state.branch_count++;
  }
  return entry;
}

template <int D>
struct DualSnapshot {
  double t = 0.0;
  std::vector<Vec<D>> positions;  // for every index
  std::vector<bool> active;
};

struct DualCaps {
  std::size_t max_active = 100000;
  std::uint64_t max_events = 100000000;  // marked events
};

template <int D>
struct DualTrajectory {
  std::vector<Vec<D>> initial_points;
  std::vector<DualSnapshot<D>> snapshots;
  std::vector<DualLogEntry<D>> log;
  DualState<D> final_state;
  bool truncated = false;
  EventCounters counters;
};

/// Event loop for the dual started from `points`, run to time T or a cap.
/// Deterministic given the stream.
template <int D>
DualTrajectory<D> simulate_dual(std::vector<Vec<D>> points, double T, const ModelParams& p,
                                RngStream& rng, const DualCaps& caps = {},
                                std::vector<double> observe_at = {}, Domain domain = {},
                                std::vector<Event<D>>* full_trace = nullptr) {
  if (!(T > 0)) throw ParamError("simulate_dual: horizon must be positive");
  DualTrajectory<D> out;
  out.initial_points = points;
  DualState<D>& state = (out.final_state = DualState<D>::start(std::move(points)), out.final_state);
  CoveringEventSampler<D> sampler(p, domain);

  std::sort(observe_at.begin(), observe_at.end());
  std::size_t obs = 0;
  auto snapshot_until = [&](double t) {
    while (obs < observe_at.size() && observe_at[obs] <= t) {
      DualSnapshot<D> snap;
      snap.t = observe_at[obs];
      for (std::uint32_t i = 0; i < state.positions.size(); ++i) {
        snap.positions.push_back(state.location(i));
        snap.active.push_back(!state.coalesced_to[i]);
      }
      out.snapshots.push_back(std::move(snap));
      ++obs;
    }
  };

  std::vector<Vec<D>> active_positions;
  std::vector<std::uint32_t> hits;
  for (;;) {
    if (state.active.size() >= caps.max_active || state.event_count >= caps.max_events) {
      out.truncated = true;
      break;
    }
    active_positions.clear();
    for (std::uint32_t i : state.active) active_positions.push_back(state.positions[i]);
    Event<D> ev = sampler.next(active_positions, state.t, rng, hits, &out.counters);
    if (ev.t >= T) {
      state.t = T;
      break;
    }
    if (full_trace) full_trace->push_back(ev);
    snapshot_until(ev.t);
    auto entry = apply_event(state, ev, hits, p, domain);
    if (entry) out.log.push_back(std::move(*entry));
  }
  snapshot_until(T);
  return out;
}

/// A piecewise-constant path: value at t is the position attached to the last
/// time point <= t.
template <int D>
struct SteppedPath {
  std::vector<double> times;
  std::vector<Vec<D>> points;

  Vec<D> at(double t) const {
    std::size_t lo = 0, hi = times.size();
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (times[mid] <= t) lo = mid;
      else hi = mid;
    }
    return points[lo];
  }
};

template <int D>
struct PathSet {
  std::vector<SteppedPath<D>> paths;
  bool truncated = false;
};

/// Enumerate potential ancestral lineage paths from the root of a trajectory.
/// Each selective event encountered on a route forks it: one continuation
/// follows the first parent, the other the newly created lineage. The count
/// is 2^(branch events along the route), bounded by `cap`.
template <int D>
PathSet<D> potential_lineage_paths(const DualTrajectory<D>& traj, std::size_t cap) {
  if (traj.initial_points.size() != 1)
    throw ParamError("potential_lineage_paths: trajectory must start from a single lineage");
  PathSet<D> out;
  struct Route {
    std::uint32_t lineage;
    SteppedPath<D> path;
  };
  std::vector<Route> routes;
  routes.push_back({0, {{0.0}, {traj.initial_points[0]}}});
  for (const auto& entry : traj.log) {
    const std::size_t n_now = routes.size();
    for (std::size_t k = 0; k < n_now; ++k) {
      const bool hit =
          std::binary_search(entry.marked.begin(), entry.marked.end(), routes[k].lineage);
      if (!hit) continue;
      if (entry.event.selective) {
        if (routes.size() < cap) {
          Route forked = routes[k];
          forked.lineage = entry.new_index;
          forked.path.times.push_back(entry.event.t);
          forked.path.points.push_back(entry.parent2);
          routes.push_back(std::move(forked));
        } else {
          out.truncated = true;
        }
      }
      routes[k].lineage = entry.marked.front();
      routes[k].path.times.push_back(entry.event.t);
      routes[k].path.points.push_back(entry.parent1);
    }
  }
  for (auto& r : routes) out.paths.push_back(std::move(r.path));
  return out;
}

}  // namespace slfv
