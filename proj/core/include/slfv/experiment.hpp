#pragma once

#include <cstdint>
#include <string>

#include "slfv/config.hpp"

namespace slfv {

struct Telemetry {
  std::uint64_t events = 0;
  std::uint64_t proposals = 0;
  std::uint64_t rejections = 0;
  std::uint64_t truncations = 0;
  double wall_seconds = 0.0;
  int workers = 1;
};

/// One experiment's outputs. `summary_json` and `rows_csv` are deterministic
/// functions of (config, seed); telemetry is not and is kept separate so
/// reruns compare bit-for-bit.
struct ResultRecord {
  std::string kind;
  std::string config_hash;
  std::string summary_json;
  std::string rows_csv;
  std::string content_id;  // content address (FNV-1a) of the summary bytes
  Telemetry telemetry;
  int exit_code = 0;  // 0 ok; 3 truncation-dominated
  std::string out_dir;  // populated when files were written
};

/// Dispatch an experiment: farm replicates over worker threads with
/// pre-split streams, merge deterministically, and (when the config names an
/// output directory) write summary.json, rows.csv and telemetry.json
/// atomically.
ResultRecord run_experiment(const ExperimentConfig& cfg);

}  // namespace slfv
