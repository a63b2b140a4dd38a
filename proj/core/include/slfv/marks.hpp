#pragma once

#include "slfv/errors.hpp"

namespace slfv {

/// Membership of q in the i-th mark set A_u^i.
///
/// The sets are defined by A_u^1 = [0,u], A_u^{k+1} = u A_u^k + (u + (1-u) A_u^k),
/// so that for uniform q the indicators over i are i.i.d. Bernoulli(u). Computed
/// by digit extraction: peel i-1 digits off q, answer is the i-th digit. The
/// boundary q == u counts as a member.
inline bool mark_member(double q, double u, int i) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParamError("mark_member: q must be in [0,1]");
  if (!(u > 0.0 && u <= 1.0)) throw ParamError("mark_member: u must be in (0,1]");
  if (i < 1) throw ParamError("mark_member: index must be >= 1");
  for (int step = 1; step < i; ++step) {
    if (q <= u) {
      q /= u;
    } else {
      q = (q - u) / (1.0 - u);
    }
    if (q > 1.0) q = 1.0;  // guard digit drift
  }
  return q <= u;
}

}  // namespace slfv
