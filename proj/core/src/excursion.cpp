#include "slfv/excursion.hpp"

#include <algorithm>
#include <cmath>

#include "slfv/errors.hpp"
#include "slfv/geometry.hpp"
#include "slfv/marks.hpp"

namespace slfv {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Coalesce:
      return "coalesce";
    case Outcome::Diverge:
      return "diverge";
    case Outcome::Overshoot:
      return "overshoot";
  }
  return "?";
}

double sample_parent_separation(const ModelParams& p, RngStream& rng) {
  const auto& atoms = p.mu().atoms();
  double rho = p.scaled_radii().back();
  if (atoms.size() > 1) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight * std::pow(a.radius, p.d());
    double x = rng.uniform() * total;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      x -= atoms[i].weight * std::pow(atoms[i].radius, p.d());
      if (x <= 0) {
        rho = p.scaled_radii()[i];
        break;
      }
    }
  }
  if (p.d() == 2) {
    const Vec2 z1 = rng.unit_ball<2>();
    const Vec2 z2 = rng.unit_ball<2>();
    return rho * norm(z1 - z2);
  }
  const Vec3 z1 = rng.unit_ball<3>();
  const Vec3 z2 = rng.unit_ball<3>();
  return rho * norm(z1 - z2);
}

PairWalk::PairWalk(const ModelParams& p, Vec2 a, Vec2 b, double t0)
    : p_(&p), a_(a), b_(b), sep_(norm(a - b)), t_(t0) {
  const double scale = p.n() * std::pow(p.n(), 0.5 * p.d());
  for (std::size_t i = 0; i < p.mu().atoms().size(); ++i) {
    const double rho = p.scaled_radii()[i];
    rho_.push_back(rho);
    scale_.push_back(scale * p.mu().atoms()[i].weight);
    rate_one_.push_back(scale_.back() * 2.0 * ball_volume(rho, p.d()));
    far_rate_ += rate_one_.back();
    max_rho2_ = std::max(max_rho2_, rho * rho);
  }
}

double PairWalk::union_rate() const {
  if (sep_ * sep_ >= 4.0 * max_rho2_) return far_rate_;
  double r = 0.0;
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    r += rate_one_[i];
    if (sep_ < 2.0 * rho_[i]) r -= scale_[i] * lens_volume(rho_[i], sep_, p_->d());
  }
  return r;
}

PairWalk::Step PairWalk::step(RngStream& rng, double deadline) {
  const double rate = union_rate();
  const double t_next = t_ + rng.exponential(rate);
  if (t_next >= deadline) {
    t_ = deadline;
    Step s;
    s.t = deadline;
    s.deadline_hit = true;
    return s;
  }
  t_ = t_next;
  ++events_;

  // atom of the event, weighted by its share of the union rate
  std::size_t atom = 0;
  if (rho_.size() > 1) {
    shares_.resize(rho_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      shares_[i] = rate_one_[i];
      if (sep_ < 2.0 * rho_[i]) shares_[i] -= scale_[i] * lens_volume(rho_[i], sep_, p_->d());
      total += shares_[i];
    }
    double x = rng.uniform() * total;
    for (std::size_t i = 0; i < shares_.size(); ++i) {
      atom = i;
      x -= shares_[i];
      if (x <= 0) break;
    }
  }
  const double rho = rho_[atom];
  const double rho2 = rho * rho;

  // center uniform on the union of the two balls
  bool covers_both = false;
  int chosen = 0;
  Vec2 center;
  if (sep_ >= 2.0 * rho) {
    chosen = rng.bernoulli(0.5) ? 0 : 1;
    center = rng.point_in_ball(chosen == 0 ? a_ : b_, rho);
  } else {
    for (;;) {
      chosen = rng.bernoulli(0.5) ? 0 : 1;
      center = rng.point_in_ball(chosen == 0 ? a_ : b_, rho);
      covers_both = norm2(center - (chosen == 0 ? b_ : a_)) <= rho2;
      if (!covers_both || rng.bernoulli(0.5)) break;
    }
  }

  // marks: lineage 1 gets rank 1 when covered
  const double q = rng.uniform();
  const double u = p_->u();
  bool mark_a = false, mark_b = false;
  if (covers_both) {
    mark_a = q <= u;
    mark_b = mark_member(q, u, 2);
  } else if (chosen == 0) {
    mark_a = q <= u;
  } else {
    mark_b = q <= u;
  }

  Step s;
  s.t = t_;
  if (!mark_a && !mark_b) return s;

  const Vec2 parent1 = center + rho * rng.unit_ball<2>();
  s.moved = true;
  ++jumps_;
  if (mark_a) a_ = parent1;
  if (mark_b) b_ = parent1;
  if (mark_a && mark_b) {
    b_ = a_;
    sep_ = 0.0;
    s.coalesced = true;
  } else {
    sep_ = norm(a_ - b_);
  }
  return s;
}

namespace {

void require_excursion_params(const ModelParams& p) {
  if (p.d() != 2) throw ParamError("excursion: planar model required");
  if (!(std::log(p.n()) > 0.0)) throw ParamError("excursion: n must exceed 1");
}

}  // namespace

ExcursionRecord simulate_excursion(double initial_separation, const ModelParams& p, RngStream& rng,
                                   const ExcursionCaps& caps) {
  require_excursion_params(p);
  if (initial_separation < 0) throw ParamError("simulate_excursion: negative separation");

  const double R_n = p.R_n();
  const double gamma = p.gamma_n();     // divergence threshold (distance)
  const double deadline = p.gamma_n();  // overshoot deadline (time)

  ExcursionRecord rec;
  rec.initial_separation = initial_separation;

  // the 0th inner excursion opens at time 0
  int idx = 0;
  bool outer = false;

  if (initial_separation == 0.0) {
    rec.outcome = Outcome::Coalesce;
    rec.tau_type = 0.0;
    return rec;
  }
  if (initial_separation >= gamma) {
    rec.outcome = Outcome::Diverge;
    rec.tau_type = 0.0;
    return rec;
  }
  if (initial_separation >= 5.0 * R_n) {
    rec.tau_in.push_back(0.0);
    rec.sep_at_in.push_back(initial_separation);
    idx = 1;
    outer = true;
  }

  PairWalk walk(p, Vec2{0.0, 0.0}, Vec2{initial_separation, 0.0});
  for (;;) {
    if (walk.events() >= caps.max_events) {
      rec.truncated = true;
      rec.tau_type = walk.t();
      break;
    }
    const PairWalk::Step s = walk.step(rng, deadline);
    if (s.deadline_hit) {
      rec.outcome = Outcome::Overshoot;
      rec.tau_type = deadline;
      rec.i_star = idx;
      rec.decided_during_outer = outer;
      break;
    }
    if (!s.moved) continue;
    const double sep = walk.separation();
    if (s.coalesced) {
      rec.outcome = Outcome::Coalesce;
      rec.tau_type = s.t;
      rec.i_star = idx;
      rec.decided_during_outer = outer;
      break;
    }
    if (sep >= gamma) {
      rec.outcome = Outcome::Diverge;
      rec.tau_type = s.t;
      rec.i_star = idx;
      rec.decided_during_outer = outer;
      break;
    }
    if (!outer && sep >= 5.0 * R_n) {
      rec.tau_in.push_back(s.t);
      rec.sep_at_in.push_back(sep);
      ++idx;
      outer = true;
    } else if (outer && sep <= 4.0 * R_n) {
      rec.tau_out.push_back(s.t);
      rec.sep_at_out.push_back(sep);
      outer = false;
    }
  }
  rec.events = walk.events();
  rec.jumps = walk.jumps();
  return rec;
}

ExcursionRecord simulate_excursion(const ModelParams& p, RngStream& rng,
                                   const ExcursionCaps& caps) {
  require_excursion_params(p);
  return simulate_excursion(sample_parent_separation(p, rng), p, rng, caps);
}

KappaEstimate KappaEstimate::from_counts(double n, std::uint64_t diverged, std::uint64_t coalesced,
                                         std::uint64_t overshot, std::uint64_t truncated,
                                         double level) {
  KappaEstimate e;
  e.n = n;
  e.trials = diverged + coalesced + overshot + truncated;
  e.diverged = diverged;
  e.coalesced = coalesced;
  e.overshot = overshot;
  e.truncated = truncated;
  const std::uint64_t decided = diverged + coalesced + overshot;
  const double log_n = std::log(n);
  if (decided > 0) {
    e.p_hat = static_cast<double>(diverged) / static_cast<double>(decided);
    e.kappa_hat = e.p_hat * log_n;
    e.p_ci = wilson_interval(diverged, decided, level);
    e.kappa_ci = {e.p_ci.lo * log_n, e.p_ci.hi * log_n};
    e.overshoot_fraction = static_cast<double>(overshot) / static_cast<double>(decided);
    e.kappa_hat_noncoal =
        static_cast<double>(diverged + overshot) / static_cast<double>(decided) * log_n;
  }
  e.unreliable = truncated * 1000 > e.trials;
  return e;
}

std::vector<KappaEstimate> estimate_kappa(const std::vector<double>& n_list, std::uint64_t trials,
                                          const ModelParams& params_template, RngStream& rng,
                                          const ExcursionCaps& caps, double level) {
  if (trials < 1000) throw ParamError("estimate_kappa: at least 1000 trials required");
  const double e2 = std::exp(2.0);
  std::vector<KappaEstimate> out;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const double n = n_list[k];
    if (!(n > e2)) throw ParamError("estimate_kappa: every n must exceed e^2");
    const ModelParams p = ModelParams::create(params_template.d(), params_template.mu(),
                                              params_template.u(), n, params_template.c());
    RngStream level_stream = rng.child(k);
    std::uint64_t div = 0, coal = 0, over = 0, trunc = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      RngStream st = level_stream.child(i);
      const ExcursionRecord rec = simulate_excursion(p, st, caps);
      if (rec.truncated) {
        ++trunc;
      } else {
        switch (rec.outcome) {
          case Outcome::Coalesce:
            ++coal;
            break;
          case Outcome::Diverge:
            ++div;
            break;
          case Outcome::Overshoot:
            ++over;
            break;
        }
      }
    }
    out.push_back(KappaEstimate::from_counts(n, div, coal, over, trunc, level));
  }
  return out;
}

IStarTail i_star_tail(std::uint64_t trials, const ModelParams& p, RngStream& rng, int m_max,
                      const ExcursionCaps& caps) {
  std::vector<std::uint64_t> exceed(m_max + 1, 0);
  std::uint64_t decided = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    RngStream st = rng.child(i);
    const ExcursionRecord rec = simulate_excursion(p, st, caps);
    if (rec.truncated) continue;
    ++decided;
    for (int m = 0; m <= m_max; ++m)
      if (rec.i_star > m) ++exceed[m];
  }
  IStarTail out;
  if (decided == 0) return out;
  for (int m = 0; m <= m_max; ++m)
    out.tail.push_back(static_cast<double>(exceed[m]) / static_cast<double>(decided));
  std::vector<double> xs, ys;
  for (int m = 0; m <= m_max; ++m) {
    if (out.tail[m] > 0) {
      xs.push_back(m);
      ys.push_back(std::log(out.tail[m]));
    }
  }
  if (xs.size() >= 2) {
    const LinearFit fit = linear_fit(xs, ys);
    out.slope = fit.slope;
    out.r2 = fit.r2;
  }
  return out;
}

double bessel_exit_probability(double inner, double outer, double start) {
  if (!(inner > 0)) throw ParamError("bessel_exit_probability: inner must be positive");
  if (!(outer > inner)) throw ParamError("bessel_exit_probability: outer must exceed inner");
  if (!(start >= inner && start <= outer))
    throw ParamError("bessel_exit_probability: start must lie in [inner, outer]");
  return (std::log(start) - std::log(inner)) / (std::log(outer) - std::log(inner));
}

ReturnProbability separation_return_probability(double initial, double horizon,
                                                std::uint64_t trials, const ModelParams& p,
                                                RngStream& rng, const ExcursionCaps& caps) {
  require_excursion_params(p);
  if (initial < p.gamma_n())
    throw ParamError("separation_return_probability: initial separation below gamma_n");
  if (horizon < 0) throw ParamError("separation_return_probability: negative horizon");
  ReturnProbability out;
  out.trials = trials;
  const double target = 4.0 * p.R_n();
  for (std::uint64_t i = 0; i < trials; ++i) {
    RngStream st = rng.child(i);
    if (horizon == 0) break;
    if (initial <= target) {
      ++out.returned;
      continue;
    }
    PairWalk walk(p, Vec2{0.0, 0.0}, Vec2{initial, 0.0});
    for (;;) {
      if (walk.events() >= caps.max_events) {
        ++out.truncated;
        break;
      }
      const PairWalk::Step s = walk.step(st, horizon);
      if (s.deadline_hit) break;
      if (s.moved && walk.separation() <= target) {
        ++out.returned;
        break;
      }
    }
  }
  out.estimate = trials ? static_cast<double>(out.returned) / static_cast<double>(trials) : 0.0;
  if (trials) out.ci = wilson_interval(out.returned, trials, 0.95);
  return out;
}

namespace {

// One walk jump magnitude: covering-weighted radius, then |b1 + b2| with b
// uniform in the unit ball (center offset plus parent offset).
double sample_jump_magnitude(const ModelParams& p, RngStream& rng) {
  const auto& atoms = p.mu().atoms();
  double rho = p.scaled_radii().back();
  if (atoms.size() > 1) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight * std::pow(a.radius, p.d());
    double x = rng.uniform() * total;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      x -= atoms[i].weight * std::pow(atoms[i].radius, p.d());
      if (x <= 0) {
        rho = p.scaled_radii()[i];
        break;
      }
    }
  }
  const Vec2 b1 = rng.unit_ball<2>();
  const Vec2 b2 = rng.unit_ball<2>();
  return rho * norm(b1 + b2);
}

}  // namespace

SkorohodReport skorohod_embed_check(std::uint64_t trials, const ModelParams& p, double step,
                                    double inner, double start, double outer, RngStream& rng,
                                    std::uint64_t ks_jumps) {
  require_excursion_params(p);
  if (!(step > 0) || std::sqrt(step) >= p.R_n() / 10.0)
    throw ParamError("skorohod_embed_check: step too coarse, needs sqrt(step) < R_n/10");
  if (!(inner > 0 && inner < start && start < outer))
    throw ParamError("skorohod_embed_check: need 0 < inner < start < outer");

  SkorohodReport rep;
  rep.trials = trials;
  rep.p_formula = bessel_exit_probability(inner, outer, start);
  const double sd = std::sqrt(step);

  // embed one walk jump: run the Brownian path until it leaves the ball of
  // radius r around the anchor; the walk's new position is the path's position
  auto embed_jump = [&](RngStream& st, Vec2& w, const Vec2& anchor, double r) {
    const double r2 = r * r;
    while (norm2(w - anchor) < r2) {
      w[0] += sd * st.normal();
      w[1] += sd * st.normal();
    }
  };

  // increment-law check
  {
    RngStream st = rng.child(0x6b73);
    std::vector<double> embedded, direct;
    Vec2 w{0.0, 0.0};
    for (std::uint64_t m = 0; m < ks_jumps; ++m) {
      const double r = sample_jump_magnitude(p, st);
      const Vec2 anchor = w;
      embed_jump(st, w, anchor, r);
      embedded.push_back(norm(w - anchor));
    }
    for (std::uint64_t m = 0; m < ks_jumps; ++m) direct.push_back(sample_jump_magnitude(p, st));
    rep.increment_ks = ks_test_two_sample(std::move(embedded), std::move(direct));
  }

  // annulus exit frequency of the embedded walk
  std::uint64_t hit_outer = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    RngStream st = rng.child(1 + i);
    Vec2 walk{start, 0.0};
    Vec2 w = walk;
    for (;;) {
      const double r = sample_jump_magnitude(p, st);
      const Vec2 anchor = w;
      embed_jump(st, w, anchor, r);
      walk = w;
      rep.positions_bit_equal = rep.positions_bit_equal && walk[0] == w[0] && walk[1] == w[1];
      const double d = norm(walk);
      if (d >= outer) {
        ++hit_outer;
        break;
      }
      if (d <= inner) break;
    }
  }
  if (trials) {
    rep.p_walk = static_cast<double>(hit_outer) / static_cast<double>(trials);
    rep.p_walk_ci = wilson_interval(hit_outer, trials, 0.95);
    rep.rel_error = std::abs(rep.p_walk - rep.p_formula) / rep.p_formula;
  }
  return rep;
}

}  // namespace slfv
