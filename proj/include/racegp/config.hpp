#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "racegp/controller.hpp"
#include "racegp/dynamics.hpp"
#include "racegp/track.hpp"

namespace racegp {

inline constexpr const char* kToolVersion = RACEGP_VERSION;

struct GpSettings {
  std::string combo = "RQ+LIN";
  int budget = 300;  // marginal-likelihood evaluations per output
  int restarts = 5;
  double noise_floor = 1e-8;
  double initial_noise2 = 0.01;
  double uncertainty_ratio = 3.0;  // flag when mean predictive std > ratio * target std
};

/// Cartesian expansion of the study. Subsets: "full" or a sector given by
/// index ("1".."3") or class ("straight", "mild", "curvy"). Tests: "same",
/// "track:<name>" or "all-scenarios".
struct MatrixSpec {
  std::vector<std::string> tracks;
  std::vector<std::string> scenarios{"ra-noncap", "ce-noncap", "ra-cap", "ce-cap"};
  std::vector<std::string> sizes{"full", "half", "third"};
  std::vector<std::string> combos;  // empty: all twelve
  std::vector<std::string> subsets{"full"};
  std::vector<std::string> tests{"same"};
};

struct RunConfig {
  std::map<std::string, std::filesystem::path> tracks;  // name -> waypoint CSV
  std::filesystem::path raceline_dir;  // optional <name>.csv files; empty: smoothed fallback
  std::filesystem::path output_dir = "out";
  VehicleParams vehicle;
  ControllerConfig controller;
  SpeedProfileConfig profile;
  double spacing = kDefaultSpacing;
  GpSettings gp;
  MatrixSpec matrix;
  std::uint64_t seed = 0;
  int parallel = 1;

  /// Path of the raceline for a track if one is configured and present.
  std::filesystem::path raceline_for(const std::string& track) const;
  const std::filesystem::path& track_path(const std::string& track) const;
  /// Throws ConfigError on invalid values or missing files.
  void validate() const;
};

/// YAML with optional sections vehicle, controller, profile, gp, tracks,
/// matrix and top-level seed/parallel/output_dir/raceline_dir. Relative paths
/// resolve against the file's directory. Unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Canonical YAML text of every setting.
std::string dump_run_config(const RunConfig& cfg);
/// FNV-1a over the canonical dump without output_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace racegp
