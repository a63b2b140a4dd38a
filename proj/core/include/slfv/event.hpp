#pragma once

#include <cstdint>

#include "slfv/vec.hpp"

namespace slfv {

/// One reproduction event. Parent locations are x + r*z1 and x + r*z2; q is
/// the mark value deciding which covered lineages are affected. The uniform v
/// that decides neutral/selective is consumed at construction and only the
/// flag is kept.
template <int D>
struct Event {
  double t = 0.0;
  Vec<D> x{};
  double r = 0.0;
  bool selective = false;
  Vec<D> z1{};
  Vec<D> z2{};
  double q = 0.0;
};

using Event2 = Event<2>;
using Event3 = Event<3>;

/// Telemetry counters for event generation.
struct EventCounters {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;

  EventCounters& operator+=(const EventCounters& o) {
    proposals += o.proposals;
    accepted += o.accepted;
    rejected += o.rejected;
    return *this;
  }
};

}  // namespace slfv
