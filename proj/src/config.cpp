#include "racegp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <set>
#include <sstream>

#include "racegp/csv.hpp"
#include "racegp/datagen.hpp"
#include "racegp/errors.hpp"
#include "racegp/kernel.hpp"

namespace racegp {

namespace fs = std::filesystem;

namespace {

using DoubleFields = std::vector<std::pair<const char*, double*>>;

DoubleFields vehicle_fields(VehicleParams& v) {
  return {{"m", &v.m},           {"I_z", &v.I_z},
          {"l_f", &v.l_f},       {"l_r", &v.l_r},
          {"h_cog", &v.h_cog},   {"mu", &v.mu},
          {"C_sf", &v.C_sf},     {"C_sr", &v.C_sr},
          {"g", &v.g},           {"delta_max", &v.delta_max},
          {"a_max", &v.a_max},   {"delta_v_max", &v.delta_v_max},
          {"v_max", &v.v_max},   {"v_min_dyn", &v.v_min_dyn}};
}

DoubleFields controller_fields(ControllerConfig& c) {
  return {{"lookahead_base", &c.lookahead_base},
          {"lookahead_gain", &c.lookahead_gain},
          {"k_speed", &c.k_speed},
          {"k_steer", &c.k_steer}};
}

DoubleFields profile_fields(RunConfig& cfg) {
  return {{"v_cap", &cfg.profile.v_cap},
          {"v_max", &cfg.profile.v_max},
          {"a_lat_max", &cfg.profile.a_lat_max},
          {"a_long_max", &cfg.profile.a_long_max},
          {"spacing", &cfg.spacing}};
}

DoubleFields gp_double_fields(GpSettings& g) {
  return {{"noise_floor", &g.noise_floor},
          {"initial_noise2", &g.initial_noise2},
          {"uncertainty_ratio", &g.uncertainty_ratio}};
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line_of(n)) + ": " + what);
}

template <typename T>
T as(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "bad value for '" + key + "'");
  }
}

void require_map(const YAML::Node& n, const std::string& section) {
  if (!n.IsMap()) fail(n, "section '" + section + "' must be a mapping");
}

void read_doubles(const YAML::Node& section, const std::string& name, const DoubleFields& fields,
                  const std::set<std::string>& extra = {}) {
  require_map(section, name);
  for (const auto& kv : section) {
    const auto key = kv.first.as<std::string>();
    const auto it = std::find_if(fields.begin(), fields.end(),
                                 [&](const auto& f) { return key == f.first; });
    if (it != fields.end()) {
      *it->second = as<double>(kv.second, name + "." + key);
    } else if (!extra.contains(key)) {
      fail(kv.first, "unknown key '" + name + "." + key + "'");
    }
  }
}

std::vector<std::string> string_list(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {n.as<std::string>()};
  if (!n.IsSequence()) fail(n, "'" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(as<std::string>(item, key));
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal();
  return (base / path).lexically_normal();
}

}  // namespace

fs::path RunConfig::raceline_for(const std::string& track) const {
  if (raceline_dir.empty()) return {};
  fs::path p = raceline_dir / (track + ".csv");
  return fs::exists(p) ? p : fs::path{};
}

const fs::path& RunConfig::track_path(const std::string& track) const {
  const auto it = tracks.find(track);
  if (it == tracks.end()) throw ConfigError("unknown track '" + track + "'");
  return it->second;
}

void RunConfig::validate() const {
  vehicle.validate();
  controller.validate(spacing);
  if (!(spacing > 0.0)) throw ConfigError("profile.spacing must be > 0");
  if (!(profile.v_cap > 0.0 && profile.v_max > 0.0 && profile.a_lat_max > 0.0 &&
        profile.a_long_max > 0.0)) {
    throw ConfigError("profile speeds and accelerations must be > 0");
  }
  if (gp.budget < 1) throw ConfigError("gp.budget must be >= 1");
  if (gp.restarts < 1) throw ConfigError("gp.restarts must be >= 1");
  if (!(gp.noise_floor > 0.0)) throw ConfigError("gp.noise_floor must be > 0");
  if (!(gp.initial_noise2 > 0.0)) throw ConfigError("gp.initial_noise2 must be > 0");
  if (!(gp.uncertainty_ratio > 0.0)) throw ConfigError("gp.uncertainty_ratio must be > 0");
  if (parallel < 1) throw ConfigError("parallel must be >= 1");
  canonical_combo(gp.combo);
  for (const auto& c : matrix.combos) canonical_combo(c);
  for (const auto& s : matrix.scenarios) Scenario::parse(s);
  for (const auto& s : matrix.sizes) size_fraction_from_string(s);
  for (const auto& t : matrix.tracks) {
    if (!tracks.contains(t)) throw ConfigError("matrix.tracks names unknown track '" + t + "'");
  }
  for (const auto& [name, path] : tracks) {
    if (!fs::exists(path)) throw ConfigError("track '" + name + "': file not found: " + path.string());
  }
  if (!raceline_dir.empty() && !fs::is_directory(raceline_dir)) {
    throw ConfigError("raceline_dir is not a directory: " + raceline_dir.string());
  }
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  require_map(root, "top level");

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "seed") {
      cfg.seed = as<std::uint64_t>(v, key);
    } else if (key == "parallel") {
      cfg.parallel = as<int>(v, key);
    } else if (key == "output_dir") {
      cfg.output_dir = resolve(base_dir, as<std::string>(v, key));
    } else if (key == "raceline_dir") {
      cfg.raceline_dir = resolve(base_dir, as<std::string>(v, key));
    } else if (key == "tracks") {
      require_map(v, key);
      for (const auto& t : v) {
        cfg.tracks[t.first.as<std::string>()] = resolve(base_dir, as<std::string>(t.second, key));
      }
    } else if (key == "vehicle") {
      read_doubles(v, key, vehicle_fields(cfg.vehicle));
    } else if (key == "controller") {
      read_doubles(v, key, controller_fields(cfg.controller));
    } else if (key == "profile") {
      read_doubles(v, key, profile_fields(cfg));
    } else if (key == "gp") {
      read_doubles(v, key, gp_double_fields(cfg.gp), {"combo", "budget", "restarts"});
      if (v["combo"]) cfg.gp.combo = canonical_combo(as<std::string>(v["combo"], "gp.combo"));
      if (v["budget"]) cfg.gp.budget = as<int>(v["budget"], "gp.budget");
      if (v["restarts"]) cfg.gp.restarts = as<int>(v["restarts"], "gp.restarts");
    } else if (key == "matrix") {
      require_map(v, key);
      const std::map<std::string, std::vector<std::string>*> lists{
          {"tracks", &cfg.matrix.tracks},   {"scenarios", &cfg.matrix.scenarios},
          {"sizes", &cfg.matrix.sizes},     {"combos", &cfg.matrix.combos},
          {"subsets", &cfg.matrix.subsets}, {"tests", &cfg.matrix.tests}};
      for (const auto& m : v) {
        const auto mk = m.first.as<std::string>();
        const auto it = lists.find(mk);
        if (it == lists.end()) fail(m.first, "unknown key 'matrix." + mk + "'");
        *it->second = string_list(m.second, "matrix." + mk);
      }
    } else {
      fail(kv.first, "unknown key '" + key + "'");
    }
  }
  if (cfg.matrix.tracks.empty()) {
    for (const auto& [name, _] : cfg.tracks) cfg.matrix.tracks.push_back(name);
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_run_config(read_text_file(path), path.parent_path());
}

std::string dump_run_config(const RunConfig& in) {
  RunConfig cfg = in;  // field tables take non-const pointers
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "parallel" << YAML::Value << cfg.parallel;
  out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir.generic_string();
  out << YAML::Key << "raceline_dir" << YAML::Value << cfg.raceline_dir.generic_string();
  out << YAML::Key << "tracks" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, path] : cfg.tracks) out << YAML::Key << name << YAML::Value << path.generic_string();
  out << YAML::EndMap;

  const auto section = [&](const char* name, const DoubleFields& fields,
                           const std::function<void()>& extra = {}) {
    out << YAML::Key << name << YAML::Value << YAML::BeginMap;
    for (const auto& [k, p] : fields) out << YAML::Key << k << YAML::Value << format_double(*p);
    if (extra) extra();
    out << YAML::EndMap;
  };
  section("vehicle", vehicle_fields(cfg.vehicle));
  section("controller", controller_fields(cfg.controller));
  section("profile", profile_fields(cfg));
  section("gp", gp_double_fields(cfg.gp), [&] {
    out << YAML::Key << "combo" << YAML::Value << cfg.gp.combo;
    out << YAML::Key << "budget" << YAML::Value << cfg.gp.budget;
    out << YAML::Key << "restarts" << YAML::Value << cfg.gp.restarts;
  });

  out << YAML::Key << "matrix" << YAML::Value << YAML::BeginMap;
  const std::vector<std::pair<const char*, const std::vector<std::string>*>> lists{
      {"tracks", &cfg.matrix.tracks},   {"scenarios", &cfg.matrix.scenarios},
      {"sizes", &cfg.matrix.sizes},     {"combos", &cfg.matrix.combos},
      {"subsets", &cfg.matrix.subsets}, {"tests", &cfg.matrix.tests}};
  for (const auto& [k, v] : lists) {
    out << YAML::Key << k << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : *v) out << s;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.output_dir.clear();  // where results go does not change them
  return hex64(fnv1a(dump_run_config(c)));
}

}  // namespace racegp
