#pragma once

#include <cstdint>
#include <vector>

#include "slfv/model_params.hpp"
#include "slfv/rng.hpp"
#include "slfv/stats.hpp"
#include "slfv/vec.hpp"

namespace slfv {

enum class Outcome : std::uint8_t { Coalesce, Diverge, Overshoot };

const char* outcome_name(Outcome o);

/// Distance between the two potential parents of a selective event: the event
/// radius is drawn with the covering (r^d-weighted) law, the parents uniformly
/// in that ball. Rescaled units, so the draw is at most 2 R_n.
double sample_parent_separation(const ModelParams& p, RngStream& rng);

/// Two-lineage separation process under the first-parent rule. Events whose
/// ball covers at least one of the pair are sampled exactly from the per-atom
/// inclusion-exclusion rates 2 V_r - V_r(0, sep); affected lineages jump to
/// the first parent, so a both-marked event coalesces the pair.
class PairWalk {
 public:
  PairWalk(const ModelParams& p, Vec2 a, Vec2 b, double t0 = 0.0);

  struct Step {
    double t = 0.0;            // time of the event, or the deadline
    bool deadline_hit = false; // next event fell past the deadline; state frozen there
    bool moved = false;        // at least one lineage marked
    bool coalesced = false;
  };

  /// Advance by one covering event, or stop at the deadline if the next event
  /// falls beyond it (exact by the strong Markov property; the unrealized
  /// event costs one exponential draw and nothing else).
  Step step(RngStream& rng, double deadline);

  double t() const { return t_; }
  double separation() const { return sep_; }
  const Vec2& position1() const { return a_; }
  const Vec2& position2() const { return b_; }
  std::uint64_t events() const { return events_; }
  std::uint64_t jumps() const { return jumps_; }

 private:
  double union_rate() const;

  const ModelParams* p_;
  Vec2 a_, b_;
  double sep_;
  double t_;
  std::uint64_t events_ = 0;
  std::uint64_t jumps_ = 0;
  // per-atom constants
  std::vector<double> rho_;        // scaled radii
  std::vector<double> rate_one_;   // intensity scale * 2 V_rho
  std::vector<double> scale_;      // intensity scale n^{1+d/2} w_i
  std::vector<double> shares_;     // scratch for atom selection
  double far_rate_ = 0.0;          // total when sep >= 2 max rho
  double max_rho2_ = 0.0;
};

/// Trajectory classification of a lineage-pair excursion, with the
/// inner/outer decomposition. Inner excursion i lives on [tau_out_i,
/// tau_in_i); outer excursion i+1 on [tau_in_i, tau_out_{i+1}).
struct ExcursionRecord {
  double initial_separation = 0.0;
  Outcome outcome = Outcome::Coalesce;
  bool truncated = false;
  double tau_type = 0.0;
  int i_star = 0;
  bool decided_during_outer = false;
  std::vector<double> tau_in;       // band entry times, i = 0,1,...
  std::vector<double> sep_at_in;    // separation at those times
  std::vector<double> tau_out;      // band exit times, i = 1,2,...
  std::vector<double> sep_at_out;
  std::uint64_t events = 0;
  std::uint64_t jumps = 0;
};

struct ExcursionCaps {
  std::uint64_t max_events = 100000000;
};

/// Run one excursion from the given initial separation until it coalesces,
/// diverges (separation >= gamma_n) or overshoots (clock reaches
/// (log n)^{-c}).
ExcursionRecord simulate_excursion(double initial_separation, const ModelParams& p, RngStream& rng,
                                   const ExcursionCaps& caps = {});

/// Excursion with the parent-separation law as the initial condition.
ExcursionRecord simulate_excursion(const ModelParams& p, RngStream& rng,
                                   const ExcursionCaps& caps = {});

/// Monte Carlo estimate of the divergence probability and kappa at one n.
struct KappaEstimate {
  double n = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t diverged = 0;
  std::uint64_t coalesced = 0;
  std::uint64_t overshot = 0;
  std::uint64_t truncated = 0;
  double p_hat = 0.0;           // diverged / trials
  double kappa_hat = 0.0;       // p_hat * log n
  Interval p_ci;                // Wilson, on p_hat
  Interval kappa_ci;            // p_ci scaled by log n
  double overshoot_fraction = 0.0;
  /// (diverged + overshot)/trials * log n: the branch-success rate constant;
  /// this is the scaling the caterpillar's geometric branch count obeys.
  double kappa_hat_noncoal = 0.0;
  bool unreliable = false;  // truncations exceeded 0.1% of trials

  static KappaEstimate from_counts(double n, std::uint64_t diverged, std::uint64_t coalesced,
                                   std::uint64_t overshot, std::uint64_t truncated, double level);
};

/// Runs `trials` parent-separation excursions for each n in `n_list` (the
/// params template supplies everything but n).
std::vector<KappaEstimate> estimate_kappa(const std::vector<double>& n_list, std::uint64_t trials,
                                          const ModelParams& params_template, RngStream& rng,
                                          const ExcursionCaps& caps = {}, double level = 0.95);

/// Empirical tail of the index of the deciding excursion, with a log-linear
/// decay fit over the strictly positive tail entries.
struct IStarTail {
  std::vector<double> tail;  // P[i* > m], m = 0..m_max
  double slope = 0.0;
  double r2 = 0.0;
};
IStarTail i_star_tail(std::uint64_t trials, const ModelParams& p, RngStream& rng, int m_max = 20,
                      const ExcursionCaps& caps = {});

/// Exit probability of the modulus of planar Brownian motion: probability of
/// hitting `outer` before `inner` starting from `start`, via the logarithmic
/// scale function.
double bessel_exit_probability(double inner, double outer, double start);

/// P[pair returns to separation <= 4 R_n before time K], pair started at the
/// given separation.
struct ReturnProbability {
  double estimate = 0.0;
  Interval ci;
  std::uint64_t trials = 0;
  std::uint64_t returned = 0;
  std::uint64_t truncated = 0;
};
ReturnProbability separation_return_probability(double initial, double horizon,
                                                std::uint64_t trials, const ModelParams& p,
                                                RngStream& rng, const ExcursionCaps& caps = {});

/// Embeds the pair-separation walk into a planar Brownian path simulated at
/// resolution `step`: each walk jump magnitude becomes a first-exit radius for
/// the Brownian path, and the walk's positions are the Brownian positions at
/// those exit times. Reports the walk's annulus exit frequency against the
/// closed form, and a KS comparison of embedded increments with the direct
/// jump-magnitude sampler.
struct SkorohodReport {
  double p_walk = 0.0;
  Interval p_walk_ci;
  double p_formula = 0.0;
  double rel_error = 0.0;
  KsResult increment_ks;
  bool positions_bit_equal = true;
  std::uint64_t trials = 0;
};
SkorohodReport skorohod_embed_check(std::uint64_t trials, const ModelParams& p, double step,
                                    double inner, double start, double outer, RngStream& rng,
                                    std::uint64_t ks_jumps = 10000);

}  // namespace slfv
