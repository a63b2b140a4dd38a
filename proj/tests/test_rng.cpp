#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "slfv/rng.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

TEST_CASE("philox known-answer vectors") {
  // Random123 reference vectors for Philox4x32-10
  auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                       {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and order-independent") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // child derivation does not depend on parent draw position
  RngStream parent(42, 7);
  parent.uniform();
  RngStream c1 = parent.child(3);
  RngStream c2 = RngStream(42, 7).child(3);
  CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("distinct streams do not collide") {
  // hash the first 1000 outputs of 1000 streams; expect no repeated blocks
  std::set<std::uint64_t> seen;
  RngStream base(20260809, 0);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    RngStream st = base.child(s);
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < 1000; ++i) {
      h ^= st.next_u64();
      h *= 1099511628211ull;
    }
    CHECK(seen.insert(h).second);
  }
}

TEST_CASE("uniform moments") {
  RngStream rng(1, 1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 0.003);
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.003);
}

TEST_CASE("normal and exponential sampling laws") {
  RngStream rng(2, 9);
  std::vector<double> ns, es;
  for (int i = 0; i < 20000; ++i) ns.push_back(rng.normal());
  for (int i = 0; i < 20000; ++i) es.push_back(rng.exponential(2.5));
  const KsResult kn = ks_test(ns, [](double x) { return normal_cdf(x); });
  CHECK(kn.p_value > 0.01);
  const KsResult ke =
      ks_test(es, [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-2.5 * x); });
  CHECK(ke.p_value > 0.01);
}

TEST_CASE("unit ball sampling is uniform") {
  RngStream rng(3, 3);
  const int n = 100000;
  int inside_half = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 p = rng.unit_ball<2>();
    CHECK(norm2(p) <= 1.0);
    if (norm2(p) <= 0.25) ++inside_half;  // quarter of the area
  }
  CHECK(std::abs(inside_half / static_cast<double>(n) - 0.25) < 0.006);
}
