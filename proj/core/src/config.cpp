#include "slfv/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slfv/errors.hpp"

namespace slfv {

using json = nlohmann::ordered_json;

const std::vector<std::string> kExperimentKinds = {
    "excursion-study", "kappa-sweep",   "caterpillar-study",       "forest-study",
    "forest-vs-bbm",   "duality-check", "single-lineage-diffusion"};

ModelParams ExperimentConfig::make_params() const { return make_params(n); }

ModelParams ExperimentConfig::make_params(double n_override) const {
  return ModelParams::create(d, RadiusMeasure(atoms), u, n_override, c);
}

namespace {

template <class T>
T require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw ConfigError(path + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "wrong type");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.kind = require<std::string>(j, "", "kind");
  if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), cfg.kind) ==
      kExperimentKinds.end())
    throw ConfigError("kind", "unknown experiment kind '" + cfg.kind + "'");
  cfg.seed = require<std::uint64_t>(j, "", "seed");
  cfg.trials = require<std::uint64_t>(j, "", "trials");
  if (cfg.trials < 1) throw ConfigError("trials", "must be at least 1");
  cfg.workers = get_or<int>(j, "", "workers", 1);
  if (cfg.workers < 0) throw ConfigError("workers", "must be >= 0");
  cfg.out_dir = get_or<std::string>(j, "", "out", "");

  if (!j.contains("params")) throw ConfigError("params", "missing required field");
  const json& pj = j.at("params");
  cfg.d = require<int>(pj, "params.", "d");
  cfg.u = require<double>(pj, "params.", "u");
  cfg.n = require<double>(pj, "params.", "n");
  cfg.c = get_or<double>(pj, "params.", "c", 4.0);
  if (!pj.contains("atoms")) throw ConfigError("params.atoms", "missing required field");
  cfg.atoms.clear();
  const json& aj = pj.at("atoms");
  if (!aj.is_array() || aj.empty())
    throw ConfigError("params.atoms", "must be a nonempty array of [radius, weight] pairs");
  for (std::size_t i = 0; i < aj.size(); ++i) {
    const json& a = aj.at(i);
    if (!a.is_array() || a.size() != 2)
      throw ConfigError("params.atoms[" + std::to_string(i) + "]",
                        "must be a [radius, weight] pair");
    cfg.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  }

  const json oj = j.contains("options") ? j.at("options") : json::object();
  auto& o = cfg.options;
  o.n_list = get_or<std::vector<double>>(oj, "options.", "n_list", {});
  if (!std::is_sorted(o.n_list.begin(), o.n_list.end()))
    throw ConfigError("options.n_list", "must be sorted ascending");
  if (oj.contains("initial_separation"))
    o.initial_separation = oj.at("initial_separation").get<double>();
  if (oj.contains("kappa")) o.kappa = oj.at("kappa").get<double>();
  o.T = get_or<double>(oj, "options.", "T", 1.0);
  o.grid_dt = get_or<double>(oj, "options.", "grid_dt", 0.0);
  o.max_events = get_or<std::uint64_t>(oj, "options.", "max_events", 100000000ull);
  o.max_nodes = get_or<std::uint64_t>(oj, "options.", "max_nodes", 1ull << 20);
  o.kappa_trials = get_or<std::uint64_t>(oj, "options.", "kappa_trials", 20000ull);
  o.bbm_trees = get_or<std::uint64_t>(oj, "options.", "bbm_trees", 0ull);
  o.L = get_or<double>(oj, "options.", "L", 5.0);
  o.h = get_or<double>(oj, "options.", "h", 0.125);
  o.w0 = get_or<std::string>(oj, "options.", "w0", "constant:0.5");
  o.t_horizon = get_or<double>(oj, "options.", "t_horizon", 1.0);
  o.export_paths = get_or<bool>(oj, "options.", "export_paths", false);
  if (oj.contains("points")) {
    const json& pts = oj.at("points");
    if (!pts.is_array()) throw ConfigError("options.points", "must be an array of [x,y] pairs");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const json& q = pts.at(i);
      if (!q.is_array() || q.size() != 2)
        throw ConfigError("options.points[" + std::to_string(i) + "]", "must be an [x,y] pair");
      o.points.push_back(Vec2{q.at(0).get<double>(), q.at(1).get<double>()});
    }
  }

  // constructing the params surfaces any remaining domain errors now
  try {
    cfg.make_params();
  } catch (const ParamError& e) {
    throw ConfigError("params", e.what());
  }
  if (cfg.kind == "kappa-sweep" && o.n_list.empty())
    throw ConfigError("options.n_list", "kappa-sweep requires a nonempty n_list");
  if (cfg.kind == "duality-check" && o.points.empty())
    throw ConfigError("options.points", "duality-check requires sample points");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = cfg.kind;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  json pj;
  pj["d"] = cfg.d;
  pj["u"] = cfg.u;
  pj["n"] = cfg.n;
  pj["c"] = cfg.c;
  json atoms = json::array();
  for (const auto& a : cfg.atoms) atoms.push_back(json::array({a.radius, a.weight}));
  pj["atoms"] = atoms;
  j["params"] = pj;

  const auto& o = cfg.options;
  json oj;
  oj["n_list"] = o.n_list;
  if (o.initial_separation) oj["initial_separation"] = *o.initial_separation;
  if (o.kappa) oj["kappa"] = *o.kappa;
  oj["T"] = o.T;
  oj["grid_dt"] = o.grid_dt;
  oj["max_events"] = o.max_events;
  oj["max_nodes"] = o.max_nodes;
  oj["kappa_trials"] = o.kappa_trials;
  oj["bbm_trees"] = o.bbm_trees;
  oj["L"] = o.L;
  oj["h"] = o.h;
  json pts = json::array();
  for (const auto& q : o.points) pts.push_back(json::array({q[0], q[1]}));
  oj["points"] = pts;
  oj["w0"] = o.w0;
  oj["t_horizon"] = o.t_horizon;
  oj["export_paths"] = o.export_paths;
  j["options"] = oj;
  // workers and out are execution details, not part of the experiment identity
  return j.dump(2);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_canonical_json(cfg))));
  return buf;
}

std::function<double(Vec2)> make_initial_field(const std::string& spec, double L) {
  if (spec == "half-plane") {
    const double half = 0.5 * L;
    return [half](Vec2 x) { return x[0] < half ? 1.0 : 0.0; };
  }
  const std::string prefix = "constant:";
  if (spec.rfind(prefix, 0) == 0) {
    const double v = std::stod(spec.substr(prefix.size()));
    if (!(v >= 0.0 && v <= 1.0))
      throw ConfigError("options.w0", "constant value must be in [0,1]");
    return [v](Vec2) { return v; };
  }
  throw ConfigError("options.w0", "unknown initial field '" + spec + "'");
}

}  // namespace slfv
