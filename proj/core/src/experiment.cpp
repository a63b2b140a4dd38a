#include "slfv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "slfv/bbm.hpp"
#include "slfv/caterpillar.hpp"
#include "slfv/dual.hpp"
#include "slfv/errors.hpp"
#include "slfv/excursion.hpp"
#include "slfv/export.hpp"
#include "slfv/forward.hpp"
#include "slfv/single_walk.hpp"

namespace slfv {

using json = nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Run fn for replicates 0..n-1 over a worker pool. Results land in
/// index-order slots and any merge happens afterwards, so the outcome does
/// not depend on the worker count or the schedule.
template <class Row>
std::vector<Row> farm(std::uint64_t n, int workers,
                      const std::function<Row(std::uint64_t)>& fn) {
  std::vector<Row> rows(n);
  if (workers == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw ? static_cast<int>(hw) : 1;
  }
  workers = static_cast<int>(std::min<std::uint64_t>(workers, n));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) rows[i] = fn(i);
    return rows;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          rows[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

json params_json(const ModelParams& p) { return json::parse(params_audit_json(p)); }

struct RunnerOutput {
  json results;
  std::string rows_csv;
  std::uint64_t events = 0;
  std::uint64_t truncations = 0;
  bool truncation_dominated = false;
};

// ---- excursion rows shared by excursion-study and kappa-sweep ----

struct ExcursionRow {
  double n = 0.0;
  double initial_separation = 0.0;
  Outcome outcome = Outcome::Coalesce;
  bool truncated = false;
  double tau_type = 0.0;
  int i_star = 0;
  std::uint64_t events = 0;
  std::uint64_t jumps = 0;
};

std::string excursion_rows_csv(const std::vector<ExcursionRow>& rows) {
  std::string out = "replicate,n,initial_separation,outcome,truncated,tau_type,i_star,events,jumps\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += std::to_string(i) + ',' + g17(r.n) + ',' + g17(r.initial_separation) + ',';
    out += outcome_name(r.outcome);
    out += r.truncated ? ",1," : ",0,";
    out += g17(r.tau_type) + ',' + std::to_string(r.i_star) + ',' + std::to_string(r.events) +
           ',' + std::to_string(r.jumps) + '\n';
  }
  return out;
}

json kappa_estimate_json(const KappaEstimate& e) {
  json j;
  j["n"] = e.n;
  j["trials"] = e.trials;
  j["diverged"] = e.diverged;
  j["coalesced"] = e.coalesced;
  j["overshot"] = e.overshot;
  j["truncated"] = e.truncated;
  j["p_hat"] = e.p_hat;
  j["p_ci"] = json::array({e.p_ci.lo, e.p_ci.hi});
  j["kappa_hat"] = e.kappa_hat;
  j["kappa_ci"] = json::array({e.kappa_ci.lo, e.kappa_ci.hi});
  j["overshoot_fraction"] = e.overshoot_fraction;
  j["kappa_hat_noncoal"] = e.kappa_hat_noncoal;
  j["unreliable"] = e.unreliable;
  return j;
}

KappaEstimate estimate_from_rows(double n, const std::vector<ExcursionRow>& rows,
                                 std::size_t begin, std::size_t end) {
  std::uint64_t div = 0, coal = 0, over = 0, trunc = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (rows[i].truncated) {
      ++trunc;
      continue;
    }
    switch (rows[i].outcome) {
      case Outcome::Diverge: ++div; break;
      case Outcome::Coalesce: ++coal; break;
      case Outcome::Overshoot: ++over; break;
    }
  }
  return KappaEstimate::from_counts(n, div, coal, over, trunc, 0.95);
}

RunnerOutput run_excursion_study(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();
  const ExcursionCaps caps{cfg.options.max_events};
  auto rows = farm<ExcursionRow>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = base.child(i);
    const ExcursionRecord rec =
        cfg.options.initial_separation
            ? simulate_excursion(*cfg.options.initial_separation, p, st, caps)
            : simulate_excursion(p, st, caps);
    ExcursionRow row{p.n(), rec.initial_separation, rec.outcome, rec.truncated,
                     rec.tau_type, rec.i_star, rec.events, rec.jumps};
    return row;
  });
  RunnerOutput out;
  const KappaEstimate est = estimate_from_rows(p.n(), rows, 0, rows.size());
  out.results["params"] = params_json(p);
  out.results["estimate"] = kappa_estimate_json(est);
  out.rows_csv = excursion_rows_csv(rows);
  for (const auto& r : rows) {
    out.events += r.events;
    out.truncations += r.truncated ? 1 : 0;
  }
  out.truncation_dominated = est.unreliable;
  return out;
}

RunnerOutput run_kappa_sweep(const ExperimentConfig& cfg, RngStream base) {
  const auto& n_list = cfg.options.n_list;
  const ExcursionCaps caps{cfg.options.max_events};
  const std::uint64_t per_level = cfg.trials;
  const std::uint64_t total = per_level * n_list.size();

  std::vector<ModelParams> levels;
  for (double n : n_list) levels.push_back(cfg.make_params(n));

  auto rows = farm<ExcursionRow>(total, cfg.workers, [&](std::uint64_t i) {
    const std::size_t level = static_cast<std::size_t>(i / per_level);
    const std::uint64_t rep = i % per_level;
    // same stream layout as estimate_kappa: child(level).child(replicate)
    RngStream st = base.child(level).child(rep);
    const ModelParams& p = levels[level];
    const ExcursionRecord rec = simulate_excursion(p, st, caps);
    return ExcursionRow{p.n(), rec.initial_separation, rec.outcome, rec.truncated,
                        rec.tau_type, rec.i_star, rec.events, rec.jumps};
  });

  RunnerOutput out;
  out.results["params_template"] = params_json(cfg.make_params());
  json ests = json::array();
  bool dominated = false;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const KappaEstimate est =
        estimate_from_rows(n_list[k], rows, k * per_level, (k + 1) * per_level);
    dominated = dominated || est.unreliable;
    ests.push_back(kappa_estimate_json(est));
  }
  out.results["estimates"] = ests;
  out.rows_csv = excursion_rows_csv(rows);
  for (const auto& r : rows) {
    out.events += r.events;
    out.truncations += r.truncated ? 1 : 0;
  }
  out.truncation_dominated = dominated;
  return out;
}

RunnerOutput run_caterpillar_study(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();
  CaterpillarOptions opts;
  opts.max_events = cfg.options.max_events;
  opts.grid_dt = cfg.options.grid_dt;

  struct Row {
    Caterpillar cat;
  };
  auto rows = farm<Row>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = base.child(i);
    return Row{simulate_caterpillar(Vec2{0.0, 0.0}, p, st, opts)};
  });

  std::vector<double> lifetimes, gaps;
  std::vector<double> kstar_hist;
  std::uint64_t branches = 0, truncated = 0, events = 0;
  for (const auto& r : rows) {
    events += r.cat.events;
    if (r.cat.truncated || r.cat.ended_by_time) {
      ++truncated;
      continue;
    }
    lifetimes.push_back(r.cat.lifetime);
    for (double g : r.cat.branch_gaps) gaps.push_back(g);
    branches += r.cat.branch_times.size();
    const std::size_t k = static_cast<std::size_t>(r.cat.k_star);
    if (kstar_hist.size() < k + 1) kstar_hist.resize(k + 1, 0.0);
    kstar_hist[k] += 1.0;
  }

  RunnerOutput out;
  out.results["params"] = params_json(p);
  const double log_n = std::log(p.n());
  double kappa_used = cfg.options.kappa.value_or(0.0);
  const bool self_estimated = !cfg.options.kappa.has_value();
  if (self_estimated && branches > 0)
    kappa_used = log_n * static_cast<double>(lifetimes.size()) / static_cast<double>(branches);
  json res;
  res["runs"] = cfg.trials;
  res["completed"] = lifetimes.size();
  res["truncated"] = truncated;
  res["kappa_used"] = kappa_used;
  res["kappa_self_estimated"] = self_estimated;
  if (!lifetimes.empty()) {
    const double death_rate = kappa_used * p.lambda();
    res["mean_lifetime"] = mean(lifetimes);
    res["var_lifetime"] = lifetimes.size() > 1 ? variance(lifetimes) : 0.0;
    res["expected_mean_lifetime"] = 1.0 / death_rate;
    const KsResult ks = ks_test(
        lifetimes, [&](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-death_rate * x); });
    res["lifetime_ks"] = json{{"statistic", ks.statistic}, {"p_value", ks.p_value}};
    const double gap_rate = p.lambda() * log_n;
    if (!gaps.empty()) {
      res["mean_gap"] = mean(gaps);
      res["expected_mean_gap"] = 1.0 / gap_rate;
      const KsResult gks =
          ks_test(gaps, [&](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-gap_rate * x); });
      res["gap_ks"] = json{{"statistic", gks.statistic}, {"p_value", gks.p_value}};
    }
  }
  res["k_star_histogram"] = kstar_hist;
  out.results["lifetimes"] = res;

  std::string csv = "replicate,k_star,lifetime,terminal,branches,events,truncated\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = rows[i].cat;
    csv += std::to_string(i) + ',' + std::to_string(c.k_star) + ',' + g17(c.lifetime) + ',';
    csv += c.truncated || c.ended_by_time ? "none" : outcome_name(c.terminal);
    csv += ',' + std::to_string(c.branch_times.size()) + ',' + std::to_string(c.events) +
           (c.truncated ? ",1\n" : ",0\n");
  }
  out.rows_csv = std::move(csv);
  out.events = events;
  out.truncations = truncated;
  out.truncation_dominated = truncated * 1000 > cfg.trials;
  return out;
}

RunnerOutput run_forest_study(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();
  ForestOptions opts;
  opts.max_nodes = cfg.options.max_nodes;
  opts.node.max_events = cfg.options.max_events;
  opts.node.grid_dt = cfg.options.grid_dt;

  struct Row {
    std::size_t alive = 0;
    std::size_t nodes = 0;
    int max_depth = 0;
    bool truncated = false;
    std::string exported_json, exported_csv;
  };
  auto rows = farm<Row>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = base.child(i);
    const CaterpillarForest forest =
        simulate_branching_caterpillar(Vec2{0.0, 0.0}, cfg.options.T, p, st, opts);
    Row row{forest.alive_count(), forest.nodes.size(), forest.max_depth, forest.truncated, "", ""};
    if (i == 0 && cfg.options.export_paths) {
      row.exported_json = forest_json(forest);
      row.exported_csv = forest_paths_csv(forest);
    }
    return row;
  });

  RunnerOutput out;
  out.results["params"] = params_json(p);
  std::vector<double> alive;
  std::uint64_t truncated = 0;
  int depth = 0;
  for (const auto& r : rows) {
    alive.push_back(static_cast<double>(r.alive));
    truncated += r.truncated ? 1 : 0;
    depth = std::max(depth, r.max_depth);
  }
  json res;
  res["T"] = cfg.options.T;
  res["mean_alive"] = mean(alive);
  res["max_depth"] = depth;
  res["truncated"] = truncated;
  out.results["forest"] = res;
  if (cfg.options.export_paths && !rows.empty() && !cfg.out_dir.empty()) {
    atomic_write_file(cfg.out_dir + "/forest0.json", rows[0].exported_json);
    atomic_write_file(cfg.out_dir + "/forest0_paths.csv", rows[0].exported_csv);
  }
  std::string csv = "replicate,alive,nodes,max_depth,truncated\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    csv += std::to_string(i) + ',' + std::to_string(rows[i].alive) + ',' +
           std::to_string(rows[i].nodes) + ',' + std::to_string(rows[i].max_depth) +
           (rows[i].truncated ? ",1\n" : ",0\n");
  out.rows_csv = std::move(csv);
  out.truncations = truncated;
  out.truncation_dominated = truncated * 1000 > cfg.trials;
  return out;
}

json ks_json(const KsResult& k) {
  return json{{"statistic", k.statistic}, {"p_value", k.p_value}, {"n", k.n}};
}

RunnerOutput run_forest_vs_bbm(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();

  // calibration: branch-success constant from parent-separation excursions
  const ExcursionCaps caps{cfg.options.max_events};
  RngStream kappa_base = base.child(0xA);
  std::uint64_t div = 0, coal = 0, over = 0, trunc = 0;
  {
    auto counts = farm<std::uint8_t>(cfg.options.kappa_trials, cfg.workers, [&](std::uint64_t i) {
      RngStream st = kappa_base.child(i);
      const ExcursionRecord rec = simulate_excursion(p, st, caps);
      if (rec.truncated) return std::uint8_t{3};
      return static_cast<std::uint8_t>(rec.outcome);
    });
    for (std::uint8_t c : counts) {
      if (c == 3) ++trunc;
      else if (c == static_cast<std::uint8_t>(Outcome::Diverge)) ++div;
      else if (c == static_cast<std::uint8_t>(Outcome::Overshoot)) ++over;
      else ++coal;
    }
  }
  const KappaEstimate est = KappaEstimate::from_counts(p.n(), div, coal, over, trunc, 0.95);
  const double V = p.lambda() * est.kappa_hat_noncoal;

  ForestOptions fopts;
  fopts.max_nodes = cfg.options.max_nodes;
  fopts.node.max_events = cfg.options.max_events;

  RngStream forest_base = base.child(0xB);
  auto forests = farm<CaterpillarForest>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = forest_base.child(i);
    return simulate_branching_caterpillar(Vec2{0.0, 0.0}, cfg.options.T, p, st, fopts);
  });

  const std::uint64_t n_trees = cfg.options.bbm_trees ? cfg.options.bbm_trees : cfg.trials;
  RngStream bbm_base = base.child(0xC);
  auto trees = farm<BBMTree>(n_trees, cfg.workers, [&](std::uint64_t i) {
    RngStream st = bbm_base.child(i);
    return simulate_bbm(Vec2{0.0, 0.0}, V, p.sigma2(), cfg.options.T, 0.0, st);
  });

  const FamilySample fs = family_sample_from_forests(forests, Vec2{0.0, 0.0});
  const FamilySample bs = family_sample_from_trees(trees, Vec2{0.0, 0.0});
  const FamilyComparison cmp = compare_family_structure(fs, bs);

  RunnerOutput out;
  out.results["params"] = params_json(p);
  out.results["kappa_estimate"] = kappa_estimate_json(est);
  json res;
  res["T"] = cfg.options.T;
  res["V"] = V;
  res["sigma2"] = p.sigma2();
  res["forests"] = cfg.trials;
  res["bbm_trees"] = n_trees;
  res["count_chi2"] = json{{"statistic", cmp.count_chi2.statistic},
                           {"df", cmp.count_chi2.df},
                           {"p_value", cmp.count_chi2.p_value}};
  res["count_mean_forest"] = cmp.count_mean_a;
  res["count_mean_bbm"] = cmp.count_mean_b;
  res["dx_ks"] = ks_json(cmp.dx_ks);
  res["dy_ks"] = ks_json(cmp.dy_ks);
  res["pair_dist_ks"] = ks_json(cmp.pair_dist_ks);
  out.results["comparison"] = res;

  std::string csv = "side,replicate,particles\n";
  for (std::size_t i = 0; i < forests.size(); ++i)
    csv += "forest," + std::to_string(i) + ',' + std::to_string(forests[i].alive_count()) + '\n';
  for (std::size_t i = 0; i < trees.size(); ++i)
    csv += "bbm," + std::to_string(i) + ',' + std::to_string(trees[i].particles_at_horizon()) + '\n';
  out.rows_csv = std::move(csv);
  std::uint64_t forest_trunc = 0;
  for (const auto& f : forests) forest_trunc += f.truncated ? 1 : 0;
  out.truncations = forest_trunc + trunc;
  out.truncation_dominated = est.unreliable || forest_trunc * 1000 > cfg.trials;
  return out;
}

RunnerOutput run_duality_check(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();
  const auto w0 = make_initial_field(cfg.options.w0, cfg.options.L);
  const double L = cfg.options.L;
  const double h = cfg.options.h;
  const double T = cfg.options.T;
  if (cfg.options.points.empty() || cfg.options.points.size() > 3)
    throw ConfigError("options.points", "duality-check takes 1..3 points");

  const AlleleField f0 = AlleleField::from_function(L, h, w0);
  const Domain dom{L};

  // same stream layout as the library duality_check: child(1)/child(2) sides
  RngStream fwd_base = base.child(1);
  RngStream dual_base = base.child(2);
  auto fwd = farm<double>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = fwd_base.child(i);
    ForwardRun run = simulate_forward(f0, T, p, st, {});
    double prod = 1.0;
    for (const auto& x : cfg.options.points) prod *= run.field.value_at(x);
    return prod;
  });
  auto dual = farm<double>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = dual_base.child(i);
    std::vector<Vec2> start;
    for (const auto& x : cfg.options.points) start.push_back(dom.wrap(x));
    DualTrajectory<2> traj = simulate_dual<2>(start, T, p, st, {}, {}, dom);
    double prod = 1.0;
    for (std::uint32_t idx : traj.final_state.active) prod *= w0(traj.final_state.positions[idx]);
    return prod;
  });

  auto moments = [](const std::vector<double>& xs) {
    const double m = mean(xs);
    double acc2 = 0;
    for (double x : xs) acc2 += (x - m) * (x - m);
    const double se = std::sqrt(acc2 / static_cast<double>(xs.size() - 1) /
                                static_cast<double>(xs.size()));
    return std::pair<double, double>{m, se};
  };
  const auto [lhs, lhs_se] = moments(fwd);
  const auto [rhs, rhs_se] = moments(dual);
  const double pooled = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
  const double z = pooled > 0 ? (lhs - rhs) / pooled : 0.0;
  const double zcrit = normal_quantile(0.975);

  RunnerOutput out;
  out.results["params"] = params_json(p);
  json res;
  res["L"] = L;
  res["h"] = h;
  res["T"] = T;
  res["w0"] = cfg.options.w0;
  json pts = json::array();
  for (const auto& q : cfg.options.points) pts.push_back(json::array({q[0], q[1]}));
  res["points"] = pts;
  res["lhs"] = lhs;
  res["lhs_se"] = lhs_se;
  res["rhs"] = rhs;
  res["rhs_se"] = rhs_se;
  res["z"] = z;
  res["ci_overlap"] = std::abs(lhs - rhs) <= zcrit * pooled;
  res["small_torus_warning"] = L <= 10.0 * p.R_n();
  out.results["duality"] = res;

  std::string csv = "side,replicate,product\n";
  for (std::size_t i = 0; i < fwd.size(); ++i)
    csv += "forward," + std::to_string(i) + ',' + g17(fwd[i]) + '\n';
  for (std::size_t i = 0; i < dual.size(); ++i)
    csv += "dual," + std::to_string(i) + ',' + g17(dual[i]) + '\n';
  out.rows_csv = std::move(csv);
  return out;
}

RunnerOutput run_single_lineage_diffusion(const ExperimentConfig& cfg, RngStream base) {
  const ModelParams p = cfg.make_params();
  const double horizon = cfg.options.t_horizon;
  if (!(horizon > 0)) throw ConfigError("options.t_horizon", "must be positive");

  struct Row {
    double x = 0, y = 0;
    std::uint64_t events = 0;
  };
  auto rows = farm<Row>(cfg.trials, cfg.workers, [&](std::uint64_t i) {
    RngStream st = base.child(i);
    SingleLineageWalk walk(p, Vec2{0.0, 0.0}, 0.0);
    for (;;) {
      const auto s = walk.step(st, horizon);
      if (s.deadline_hit) break;
    }
    return Row{walk.position()[0], walk.position()[1], walk.events()};
  });

  std::vector<double> xs, ys;
  std::uint64_t events = 0;
  for (const auto& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
    events += r.events;
  }
  const double var_x = variance(xs);
  const double var_y = variance(ys);
  const double expected = p.sigma2() * horizon;

  RunnerOutput out;
  out.results["params"] = params_json(p);
  json res;
  res["t"] = horizon;
  res["var_x"] = var_x;
  res["var_y"] = var_y;
  res["var_mean"] = 0.5 * (var_x + var_y);
  res["expected"] = expected;
  res["rel_error"] = std::abs(0.5 * (var_x + var_y) - expected) / expected;
  out.results["diffusion"] = res;

  std::string csv = "replicate,x,y,events\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    csv += std::to_string(i) + ',' + g17(rows[i].x) + ',' + g17(rows[i].y) + ',' +
           std::to_string(rows[i].events) + '\n';
  out.rows_csv = std::move(csv);
  out.events = events;
  return out;
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RngStream base(cfg.seed, fnv1a64(cfg.kind));

  RunnerOutput r;
  if (cfg.kind == "excursion-study") r = run_excursion_study(cfg, base);
  else if (cfg.kind == "kappa-sweep") r = run_kappa_sweep(cfg, base);
  else if (cfg.kind == "caterpillar-study") r = run_caterpillar_study(cfg, base);
  else if (cfg.kind == "forest-study") r = run_forest_study(cfg, base);
  else if (cfg.kind == "forest-vs-bbm") r = run_forest_vs_bbm(cfg, base);
  else if (cfg.kind == "duality-check") r = run_duality_check(cfg, base);
  else if (cfg.kind == "single-lineage-diffusion") r = run_single_lineage_diffusion(cfg, base);
  else throw ConfigError("kind", "unknown experiment kind '" + cfg.kind + "'");

  ResultRecord record;
  record.kind = cfg.kind;
  record.config_hash = config_hash(cfg);

  json summary;
  summary["kind"] = cfg.kind;
  summary["config_hash"] = record.config_hash;
  summary["seed"] = cfg.seed;
  summary["trials"] = cfg.trials;
  summary["results"] = r.results;
  summary["truncations"] = r.truncations;
  record.summary_json = summary.dump(2) + "\n";
  record.rows_csv = r.rows_csv;

  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(record.summary_json)));
  record.content_id = buf;

  const auto t1 = std::chrono::steady_clock::now();
  record.telemetry.events = r.events;
  record.telemetry.truncations = r.truncations;
  record.telemetry.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  record.telemetry.workers = cfg.workers;
  record.exit_code = r.truncation_dominated ? 3 : 0;

  if (!cfg.out_dir.empty()) {
    record.out_dir = cfg.out_dir;
    atomic_write_file(cfg.out_dir + "/summary.json", record.summary_json);
    atomic_write_file(cfg.out_dir + "/rows.csv", record.rows_csv);
    json tj;
    tj["content_id"] = record.content_id;
    tj["config_hash"] = record.config_hash;
    tj["events"] = record.telemetry.events;
    tj["truncations"] = record.telemetry.truncations;
    tj["wall_seconds"] = record.telemetry.wall_seconds;
    tj["workers"] = record.telemetry.workers;
    tj["exit_code"] = record.exit_code;
    atomic_write_file(cfg.out_dir + "/telemetry.json", tj.dump(2) + "\n");
    atomic_write_file(cfg.out_dir + "/config.json", config_canonical_json(cfg) + "\n");
  }
  return record;
}

}  // namespace slfv
