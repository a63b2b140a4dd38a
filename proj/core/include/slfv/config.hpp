#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slfv/model_params.hpp"
#include "slfv/radius_measure.hpp"
#include "slfv/vec.hpp"

namespace slfv {

/// Per-kind knobs; unused fields are ignored by other kinds.
struct ExperimentOptions {
  std::vector<double> n_list;                  // kappa-sweep
  std::optional<double> initial_separation;    // excursion-study; default parent-sampled
  std::optional<double> kappa;                 // caterpillar-study comparison constant
  double T = 1.0;                              // forest / bbm horizon
  double grid_dt = 0.0;                        // path sampling step
  std::uint64_t max_events = 100000000;        // per-run event cap
  std::uint64_t max_nodes = 1 << 20;           // forest node cap
  std::uint64_t kappa_trials = 20000;          // forest-vs-bbm calibration excursions
  std::uint64_t bbm_trees = 0;                 // forest-vs-bbm; 0 = same as trials
  double L = 5.0;                              // torus side
  double h = 0.125;                            // grid resolution
  std::vector<Vec2> points;                    // duality sample points
  std::string w0 = "constant:0.5";             // duality initial field
  double t_horizon = 1.0;                      // single-lineage-diffusion
  bool export_paths = false;                   // forest-study path CSV
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  int workers = 1;  // 0 = hardware concurrency
  std::string out_dir;

  int d = 2;
  double u = 1.0;
  double n = 1.0;
  double c = 4.0;
  std::vector<RadiusAtom> atoms{{1.0, 1.0}};

  ExperimentOptions options;

  ModelParams make_params() const;
  ModelParams make_params(double n_override) const;
};

extern const std::vector<std::string> kExperimentKinds;

/// Parse and validate a JSON config. Throws ConfigError with the offending
/// field path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical (key-ordered, defaults filled in) JSON form; the basis of the
/// config hash and of reproducibility checks.
std::string config_canonical_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical form, as fixed-width hex.
std::string config_hash(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

/// Initial-field function named by the duality config ("constant:p" or
/// "half-plane", the indicator of x < L/2).
std::function<double(Vec2)> make_initial_field(const std::string& spec, double L);

}  // namespace slfv
