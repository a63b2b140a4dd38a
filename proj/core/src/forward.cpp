#include "slfv/forward.hpp"

#include <algorithm>
#include <cmath>

#include "slfv/dual.hpp"
#include "slfv/errors.hpp"

namespace slfv {

AlleleField::AlleleField(double L, double h) : L_(L), h_(h) {
  if (!(L > 0) || !(h > 0)) throw ParamError("AlleleField: L and h must be positive");
  const double cells = L / h;
  nx_ = static_cast<int>(std::lround(cells));
  if (std::abs(cells - nx_) > 1e-9 || nx_ < 1)
    throw ParamError("AlleleField: grid must tile the torus exactly (L/h integer)");
  w_.assign(static_cast<std::size_t>(nx_) * nx_, 0.0);
}

AlleleField AlleleField::constant(double L, double h, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ParamError("AlleleField: value outside [0,1]");
  AlleleField f(L, h);
  std::fill(f.w_.begin(), f.w_.end(), value);
  return f;
}

AlleleField AlleleField::from_function(double L, double h,
                                       const std::function<double(Vec2)>& w0) {
  AlleleField f(L, h);
  for (int j = 0; j < f.nx_; ++j) {
    for (int i = 0; i < f.nx_; ++i) {
      const double v = w0(f.cell_center(i, j));
      if (!(v >= 0.0 && v <= 1.0)) throw ParamError("AlleleField: initial value outside [0,1]");
      f.cell(i, j) = v;
    }
  }
  return f;
}

Vec2 AlleleField::cell_center(int i, int j) const {
  return Vec2{(i + 0.5) * h_, (j + 0.5) * h_};
}

double AlleleField::value_at(const Vec2& x) const {
  const Domain dom{L_};
  int i = static_cast<int>(dom.wrap_coord(x[0]) / h_);
  int j = static_cast<int>(dom.wrap_coord(x[1]) / h_);
  i = std::clamp(i, 0, nx_ - 1);
  j = std::clamp(j, 0, nx_ - 1);
  return cell(i, j);
}

double AlleleField::spatial_mean() const {
  double s = 0;
  for (double v : w_) s += v;
  return s / static_cast<double>(w_.size());
}

void apply_forward_event(AlleleField& field, const Event<2>& ev, double u, RngStream& rng) {
  const Domain dom{field.L()};
  const Vec2 z = dom.wrap(ev.x + ev.r * ev.z1);
  bool indicator = rng.bernoulli(field.value_at(z));
  if (ev.selective) {
    const Vec2 z2 = dom.wrap(ev.x + ev.r * ev.z2);
    const bool second = rng.bernoulli(field.value_at(z2));
    indicator = indicator && second;
  }
  const double gain = indicator ? u : 0.0;

  // all cell centers within r of the event center, wrapping
  const double h = field.h();
  const int n = field.cells_per_side();
  const int i0 = static_cast<int>(std::floor((ev.x[0] - ev.r) / h));
  const int i1 = static_cast<int>(std::ceil((ev.x[0] + ev.r) / h));
  const int j0 = static_cast<int>(std::floor((ev.x[1] - ev.r) / h));
  const int j1 = static_cast<int>(std::ceil((ev.x[1] + ev.r) / h));
  const double r2 = ev.r * ev.r;
  for (int j = j0; j <= j1; ++j) {
    const int jw = ((j % n) + n) % n;
    for (int i = i0; i <= i1; ++i) {
      const int iw = ((i % n) + n) % n;
      const Vec2 center{(i + 0.5) * h, (j + 0.5) * h};
      if (norm2(center - ev.x) > r2) continue;
      double& w = field.cell(iw, jw);
      w = (1.0 - u) * w + gain;
    }
  }
  field.set_t(ev.t);
}

namespace {

void check_torus(const ModelParams& p, double L, bool* warning) {
  if (!(L > 4.0 * p.R_n()))
    throw ParamError("forward: torus side must exceed 4 R_n so no ball wraps onto itself");
  if (warning) *warning = L <= 10.0 * p.R_n();
}

Event<2> sample_forward_event(const ModelParams& p, double t0, double L, RngStream& rng) {
  // full torus intensity: n * n^{d/2} * L^2 per unit weight
  Event<2> ev;
  const double total_rate =
      p.n() * std::pow(p.n(), 0.5 * p.d()) * L * L * p.mu().total_mass();
  ev.t = t0 + rng.exponential(total_rate);
  ev.x = Vec2{rng.uniform(0.0, L), rng.uniform(0.0, L)};
  const auto& atoms = p.mu().atoms();
  ev.r = p.scaled_radii().back();
  if (atoms.size() > 1) {
    double x = rng.uniform() * p.mu().total_mass();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      x -= atoms[i].weight;
      if (x <= 0) {
        ev.r = p.scaled_radii()[i];
        break;
      }
    }
  }
  ev.q = rng.uniform();
  ev.selective = rng.uniform() < p.s_n();
  ev.z1 = rng.unit_ball<2>();
  ev.z2 = rng.unit_ball<2>();
  return ev;
}

}  // namespace

ForwardRun simulate_forward(AlleleField field0, double T, const ModelParams& p, RngStream& rng,
                            const ForwardOptions& opts) {
  if (!(T > 0)) throw ParamError("simulate_forward: horizon must be positive");
  if (p.d() != 2) throw ParamError("simulate_forward: planar model required");
  ForwardRun run{std::move(field0)};
  check_torus(p, run.field.L(), &run.small_torus_warning);

  std::vector<double> obs = opts.observe_at;
  std::sort(obs.begin(), obs.end());
  std::size_t next_obs = 0;
  auto snapshot_until = [&](double t) {
    while (next_obs < obs.size() && obs[next_obs] <= t) {
      AlleleField snap = run.field;
      snap.set_t(obs[next_obs]);
      run.snapshots.push_back(std::move(snap));
      ++next_obs;
    }
  };

  double t = run.field.t();
  for (;;) {
    Event<2> ev = sample_forward_event(p, t, run.field.L(), rng);
    if (ev.t >= T) break;
    snapshot_until(ev.t);
    apply_forward_event(run.field, ev, p.u(), rng);
    t = ev.t;
    ++run.events;
  }
  snapshot_until(T);
  run.field.set_t(T);
  return run;
}

DualityReport duality_check(const std::vector<Vec2>& points,
                            const std::function<double(Vec2)>& w0, double T,
                            std::uint64_t replicates, const ModelParams& p, double L, double h,
                            RngStream& rng, double level) {
  if (points.empty() || points.size() > 3)
    throw ParamError("duality_check: between 1 and 3 sample points");
  if (replicates < 2) throw ParamError("duality_check: need at least two replicates");
  DualityReport rep;
  check_torus(p, L, &rep.small_torus_warning);
  rep.replicates = replicates;

  const Domain dom{L};
  RngStream fwd_base = rng.child(1);
  RngStream dual_base = rng.child(2);

  // forward moments of w_T at the points
  double acc = 0.0, acc2 = 0.0;
  const AlleleField f0 = AlleleField::from_function(L, h, w0);
  for (std::uint64_t i = 0; i < replicates; ++i) {
    RngStream st = fwd_base.child(i);
    ForwardRun run = simulate_forward(f0, T, p, st, {});
    double prod = 1.0;
    for (const auto& x : points) prod *= run.field.value_at(x);
    acc += prod;
    acc2 += prod * prod;
  }
  const double nrep = static_cast<double>(replicates);
  rep.lhs = acc / nrep;
  rep.lhs_se = std::sqrt(std::max(0.0, acc2 / nrep - rep.lhs * rep.lhs) / nrep);

  // dual moments of w_0 at the ancestor positions
  acc = acc2 = 0.0;
  for (std::uint64_t i = 0; i < replicates; ++i) {
    RngStream st = dual_base.child(i);
    std::vector<Vec2> start;
    for (const auto& x : points) start.push_back(dom.wrap(x));
    DualTrajectory<2> traj = simulate_dual<2>(start, T, p, st, {}, {}, dom);
    double prod = 1.0;
    for (std::uint32_t idx : traj.final_state.active)
      prod *= w0(traj.final_state.positions[idx]);
    acc += prod;
    acc2 += prod * prod;
  }
  rep.rhs = acc / nrep;
  rep.rhs_se = std::sqrt(std::max(0.0, acc2 / nrep - rep.rhs * rep.rhs) / nrep);

  const double pooled = std::sqrt(rep.lhs_se * rep.lhs_se + rep.rhs_se * rep.rhs_se);
  rep.z = pooled > 0 ? (rep.lhs - rep.rhs) / pooled : 0.0;
  const double zcrit = normal_quantile(0.5 * (1.0 + level));
  rep.ci_overlap = std::abs(rep.lhs - rep.rhs) <= zcrit * pooled;
  return rep;
}

}  // namespace slfv
