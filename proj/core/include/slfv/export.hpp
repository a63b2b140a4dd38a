#pragma once

#include <string>
#include <vector>

#include "slfv/caterpillar.hpp"
#include "slfv/dual.hpp"
#include "slfv/event.hpp"
#include "slfv/forward.hpp"
#include "slfv/model_params.hpp"

namespace slfv {

/// Write a file via a temp sibling and an atomic rename.
void atomic_write_file(const std::string& path, const std::string& content);

/// Parameters plus every derived quantity, as an audit JSON document.
std::string params_audit_json(const ModelParams& p);

/// Event trace, full-precision CSV: t,x...,r,selective,q,z1...,z2...
std::string event_trace_csv(const std::vector<Event<2>>& events);
std::vector<Event<2>> parse_event_trace_csv(const std::string& csv);

/// Trajectory export: metadata + snapshots as JSON, per-snapshot lineage
/// table as CSV (replicate,time,lineage,x,y,active).
std::string trajectory_json(const DualTrajectory<2>& traj);
std::string trajectory_snapshots_csv(const DualTrajectory<2>& traj, std::uint64_t replicate);

/// Forest export: JSON tree (key, times, points, branch counts, terminal
/// type) and sampled-path CSV.
std::string forest_json(const CaterpillarForest& forest);
std::string forest_paths_csv(const CaterpillarForest& forest);

/// Field rasters. The binary layout is: magic "SLFVRAST", u32 version, u32
/// cells per side, f64 L, f64 h, f64 t, then row-major f64 cell values.
std::string field_csv(const AlleleField& field);
std::string field_raster(const AlleleField& field);
AlleleField parse_field_raster(const std::string& bytes);

}  // namespace slfv
