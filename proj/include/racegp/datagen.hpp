#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "racegp/controller.hpp"
#include "racegp/dynamics.hpp"
#include "racegp/track.hpp"

namespace racegp {

/// Racing line x velocity profile. Exactly four values exist.
struct Scenario {
  LineKind line = LineKind::raceline;
  SpeedMode speed = SpeedMode::non_capped;

  /// "RA_NON-CAP", "CE_NON-CAP", "RA_CAP", "CE_CAP"
  std::string name() const;
  /// "ra-noncap", "ce-noncap", "ra-cap", "ce-cap"
  std::string flag() const;
  /// Accepts either spelling, case-insensitive.
  static Scenario parse(std::string_view text);
  static std::array<Scenario, 4> all();

  friend bool operator==(const Scenario&, const Scenario&) = default;
  friend auto operator<=>(const Scenario&, const Scenario&) = default;
};

struct Sample {
  VehicleState x_k;
  ControlInput u_k;
  VehicleState x_next;
  double t = 0.0;  // [s]

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  Scenario scenario;
  std::string track;

  std::size_t size() const { return samples.size(); }
};

/// Regression pair for the two mismatching states.
struct ErrorSample {
  // omega [rad/s], beta [rad], a_long [m/s^2], delta_v [rad/s]
  std::array<double, 4> features{};
  double e_omega = 0.0;
  double e_beta = 0.0;

  friend bool operator==(const ErrorSample&, const ErrorSample&) = default;
};

/// Everything besides the track that shapes the reference line of a scenario.
struct ScenarioSetup {
  SpeedProfileConfig profile;  // mode is overridden by the scenario
  std::optional<std::filesystem::path> raceline_path;
  double spacing = kDefaultSpacing;
};

RefLine scenario_refline(const Track& track, const Scenario& scenario, const ScenarioSetup& setup);

inline constexpr double kStartJitter = 0.02;  // [m]

/// Closed-loop run of the dynamic model at 60 Hz under pure pursuit. Starts at
/// s = 0 with speed 0.5 v_cap and a seeded lateral jitter. Throws
/// EpisodeDiverged when the car leaves the track by more than 1 m or stalls.
Dataset run_episode(const Track& track, const RefLine& line, const Scenario& scenario,
                    const VehicleParams& p, const ControllerConfig& c, int laps,
                    std::uint64_t seed, double v_cap);
Dataset run_episode(const Track& track, const Scenario& scenario, const ScenarioSetup& setup,
                    const VehicleParams& p, const ControllerConfig& c, int laps,
                    std::uint64_t seed);

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Two-lap episode: lap 1 is the training set, lap 2 the held-out test set.
TrainTest collect_train_test(const Track& track, const Scenario& scenario,
                             const ScenarioSetup& setup, const VehicleParams& p,
                             const ControllerConfig& c, std::uint64_t seed);

/// One E-Kin step from every x_k under u_k.
std::vector<VehicleState> ekin_replay(const Dataset& d, const VehicleParams& p);

/// Full per-sample error x_next - f_EKin(x_k, u_k).
std::vector<std::array<double, VehicleState::kSize>> full_errors(const Dataset& d,
                                                                 const VehicleParams& p);

std::vector<ErrorSample> compute_errors(const Dataset& d, const VehicleParams& p);

enum class SizeFraction { full, half, third };
std::string_view to_string(SizeFraction f);
SizeFraction size_fraction_from_string(std::string_view text);
int stride_of(SizeFraction f);

/// Every 1st/2nd/3rd sample from index 0.
std::vector<ErrorSample> downsample(const std::vector<ErrorSample>& errs, SizeFraction f);

/// Error samples whose x_k projects into the sector. Throws EmptySector.
std::vector<ErrorSample> sector_subset(const Dataset& d, const std::vector<ErrorSample>& errs,
                                       const Sector& sector, const RefLine& line);

/// Provenance written into the comment header of every output file.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string tool_version;
};

void write_dataset_csv(const Dataset& d, const std::filesystem::path& path, const Provenance& prov);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace racegp
