#include "slfv/export.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slfv/errors.hpp"
#include "slfv/geometry.hpp"

namespace slfv {

using json = nlohmann::ordered_json;

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  fs::rename(tmp, target);
}

std::string params_audit_json(const ModelParams& p) {
  json j;
  j["d"] = p.d();
  j["u"] = p.u();
  j["n"] = p.n();
  j["c"] = p.c();
  json atoms = json::array();
  for (const auto& a : p.mu().atoms()) atoms.push_back(json::array({a.radius, a.weight}));
  j["atoms"] = atoms;
  json derived;
  derived["s_n"] = p.s_n();
  derived["R_n"] = p.R_n();
  derived["gamma_n"] = p.gamma_n();
  derived["lambda"] = p.lambda();
  derived["sigma2"] = p.sigma2();
  derived["total_jump_rate"] = total_jump_rate(p);
  derived["coalescence_rate_integral"] = coalescence_rate_integral(p);
  derived["neighbourhood_size"] = neighbourhood_size(p);
  derived["selection_enabled"] = p.selection_enabled();
  derived["excursion_regime_ok"] = p.excursion_regime_ok();
  j["derived"] = derived;
  return j.dump(2) + "\n";
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string event_trace_csv(const std::vector<Event<2>>& events) {
  std::string out = "t,x0,x1,r,selective,q,z10,z11,z20,z21\n";
  for (const auto& e : events) {
    append_g17(out, e.t);
    for (double v : {e.x[0], e.x[1], e.r}) {
      out += ',';
      append_g17(out, v);
    }
    out += e.selective ? ",1" : ",0";
    for (double v : {e.q, e.z1[0], e.z1[1], e.z2[0], e.z2[1]}) {
      out += ',';
      append_g17(out, v);
    }
    out += '\n';
  }
  return out;
}

std::vector<Event<2>> parse_event_trace_csv(const std::string& csv) {
  std::vector<Event<2>> events;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Event<2> e;
    int sel = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d,%lf,%lf,%lf,%lf,%lf", &e.t, &e.x[0], &e.x[1],
                    &e.r, &sel, &e.q, &e.z1[0], &e.z1[1], &e.z2[0], &e.z2[1]) != 10)
      throw std::runtime_error("event trace: malformed row '" + line + "'");
    e.selective = sel != 0;
    events.push_back(e);
  }
  return events;
}

std::string trajectory_json(const DualTrajectory<2>& traj) {
  json j;
  j["initial_points"] = json::array();
  for (const auto& q : traj.initial_points) j["initial_points"].push_back(json::array({q[0], q[1]}));
  j["truncated"] = traj.truncated;
  j["events_applied"] = traj.final_state.event_count;
  j["branches"] = traj.final_state.branch_count;
  j["coalescences"] = traj.final_state.coalescence_count;
  j["final_time"] = traj.final_state.t;
  j["lineages"] = traj.final_state.positions.size();
  j["active"] = traj.final_state.active.size();
  json snaps = json::array();
  for (const auto& s : traj.snapshots) {
    json sj;
    sj["t"] = s.t;
    json pos = json::array();
    for (std::size_t i = 0; i < s.positions.size(); ++i)
      pos.push_back(json::array({s.positions[i][0], s.positions[i][1]}));
    sj["positions"] = pos;
    json act = json::array();
    for (bool a : s.active) act.push_back(a);
    sj["active"] = act;
    snaps.push_back(sj);
  }
  j["snapshots"] = snaps;
  return j.dump(2) + "\n";
}

std::string trajectory_snapshots_csv(const DualTrajectory<2>& traj, std::uint64_t replicate) {
  std::string out;
  for (const auto& s : traj.snapshots) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      out += std::to_string(replicate);
      out += ',';
      append_g17(out, s.t);
      out += ',';
      out += std::to_string(i);
      out += ',';
      append_g17(out, s.positions[i][0]);
      out += ',';
      append_g17(out, s.positions[i][1]);
      out += s.active[i] ? ",1\n" : ",0\n";
    }
  }
  return out;
}

namespace {

std::string key_string(const std::vector<std::uint8_t>& key) {
  std::string s;
  for (std::uint8_t d : key) s += static_cast<char>('0' + d);
  return s;
}

}  // namespace

std::string forest_json(const CaterpillarForest& forest) {
  json j;
  j["horizon"] = forest.horizon;
  j["truncated"] = forest.truncated;
  j["max_depth"] = forest.max_depth;
  j["alive"] = forest.alive_count();
  json nodes = json::array();
  for (const auto& n : forest.nodes) {
    json nj;
    nj["key"] = key_string(n.key);
    nj["t_birth"] = n.t_birth;
    nj["t_death"] = n.t_death;
    nj["p_birth"] = json::array({n.p_birth[0], n.p_birth[1]});
    nj["alive_at_horizon"] = n.alive_at_horizon;
    if (n.alive_at_horizon) {
      nj["position_at_horizon"] =
          json::array({n.position_at_horizon[0], n.position_at_horizon[1]});
    } else {
      nj["k_star"] = n.body.k_star;
      nj["terminal"] = outcome_name(n.body.terminal);
      nj["p1"] = json::array({n.body.p1[0], n.body.p1[1]});
      nj["p2"] = json::array({n.body.p2[0], n.body.p2[1]});
    }
    nj["branches"] = n.body.branch_times.size();
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;
  return j.dump(2) + "\n";
}

std::string forest_paths_csv(const CaterpillarForest& forest) {
  std::string out = "key,leg,t,x,y\n";
  for (const auto& n : forest.nodes) {
    const std::string key = key_string(n.key);
    for (int leg = 1; leg <= 2; ++leg) {
      const SteppedPath<2>& path = leg == 1 ? n.body.path1 : n.body.path2;
      for (std::size_t i = 0; i < path.times.size(); ++i) {
        out += key.empty() ? "-" : key;
        out += ',';
        out += std::to_string(leg);
        out += ',';
        append_g17(out, n.t_birth + path.times[i]);
        out += ',';
        append_g17(out, path.points[i][0]);
        out += ',';
        append_g17(out, path.points[i][1]);
        out += '\n';
      }
    }
  }
  return out;
}

std::string field_csv(const AlleleField& field) {
  std::string out;
  const int n = field.cells_per_side();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i) out += ',';
      append_g17(out, field.cell(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {
constexpr char kRasterMagic[8] = {'S', 'L', 'F', 'V', 'R', 'A', 'S', 'T'};
}

std::string field_raster(const AlleleField& field) {
  std::string out(kRasterMagic, 8);
  auto push = [&out](const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
  };
  const std::uint32_t version = 1;
  const std::uint32_t side = static_cast<std::uint32_t>(field.cells_per_side());
  push(&version, 4);
  push(&side, 4);
  const double L = field.L(), h = field.h(), t = field.t();
  push(&L, 8);
  push(&h, 8);
  push(&t, 8);
  push(field.raw().data(), field.raw().size() * 8);
  return out;
}

AlleleField parse_field_raster(const std::string& bytes) {
  if (bytes.size() < 8 + 4 + 4 + 24 || std::memcmp(bytes.data(), kRasterMagic, 8) != 0)
    throw std::runtime_error("field raster: bad header");
  const char* p = bytes.data() + 8;
  std::uint32_t version, side;
  std::memcpy(&version, p, 4);
  p += 4;
  std::memcpy(&side, p, 4);
  p += 4;
  double L, h, t;
  std::memcpy(&L, p, 8);
  p += 8;
  std::memcpy(&h, p, 8);
  p += 8;
  std::memcpy(&t, p, 8);
  p += 8;
  if (version != 1) throw std::runtime_error("field raster: unknown version");
  AlleleField field(L, h);
  const std::size_t count = static_cast<std::size_t>(side) * side;
  if (bytes.size() != 8 + 8 + 24 + count * 8 ||
      side != static_cast<std::uint32_t>(field.cells_per_side()))
    throw std::runtime_error("field raster: size mismatch");
  std::memcpy(field.raw().data(), p, count * 8);
  field.set_t(t);
  return field;
}

}  // namespace slfv
