#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace racegp {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double w_left = 0.0;   // [m] to the left of the direction of travel
  double w_right = 0.0;  // [m] to the right

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Centerline with widths, in driving order. A closed track does not repeat
/// its first waypoint at the end.
struct Track {
  std::string name;
  std::vector<Waypoint> waypoints;
  bool closed = true;

  friend bool operator==(const Track&, const Track&) = default;
};

enum class LineKind { centerline, raceline };
enum class SpeedMode { capped, non_capped };

std::string_view to_string(LineKind kind);
std::string_view to_string(SpeedMode mode);

struct RefPoint {
  double s = 0.0;  // arclength [m]
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // [rad], continuous (not wrapped)
  double kappa = 0.0;    // signed curvature [1/m], positive turning left
  double v_ref = 0.0;    // [m/s], zero until a speed profile is applied
  double w_left = 0.0;   // distance to the left track bound
  double w_right = 0.0;  // distance to the right track bound
};

/// Uniformly resampled reference line.
struct RefLine {
  std::vector<RefPoint> points;
  LineKind kind = LineKind::centerline;
  bool closed = true;
  double length = 0.0;  // lap length; for an open line, s of the last point
  double spacing = 0.0;

  std::size_t size() const { return points.size(); }
  /// Arclength wrapped into [0, length) for closed lines.
  double wrap_s(double s) const;
  /// Linear interpolation at arclength s (wrapped for closed lines, clamped otherwise).
  RefPoint at(double s) const;
};

inline constexpr double kDefaultSpacing = 0.1;
inline constexpr double kRacelineTolerance = 0.5;

/// Four-column CSV (x, y, w_left, w_right); optional header line; '#' comments.
/// Throws ParseError or DegenerateTrack.
Track load_track(const std::filesystem::path& path, std::string name = {});
Track parse_track(std::string_view text, std::string name, const std::string& origin = "<memory>");
void save_track(const Track& track, const std::filesystem::path& path);

/// Geometry of an externally optimised raceline: seven-column CSV
/// (s, x, y, heading, kappa, v, a). Only x and y are kept.
std::vector<std::array<double, 2>> load_raceline_points(const std::filesystem::path& path);
void save_raceline(const RefLine& line, const std::filesystem::path& path);

/// Periodic (closed) or natural (open) cubic spline through the waypoints,
/// resampled at uniform arclength. Heading by central differences, curvature
/// from the circle through each point and its two neighbours.
///
/// For kind == raceline the geometry comes from raceline_path when given and
/// from smooth_raceline otherwise. Throws RacelineTrackMismatch if the
/// raceline leaves the track by more than kRacelineTolerance.
RefLine build_refline(const Track& track, LineKind kind = LineKind::centerline,
                      const std::optional<std::filesystem::path>& raceline_path = std::nullopt,
                      double spacing = kDefaultSpacing);

/// Resamples an arbitrary closed polyline (with widths) into a RefLine.
RefLine resample_polyline(const std::vector<Waypoint>& pts, bool closed, LineKind kind,
                          double spacing = kDefaultSpacing);

/// Minimum-curvature raceline inside the track bounds: lateral offsets of the
/// centerline minimise the summed squared second differences of the path,
/// with every offset kept at least margin from the bounds. Solved by an
/// active-set method capped at the given number of iterations.
std::vector<Waypoint> smooth_raceline(const Track& track, double margin = 0.3,
                                      int iterations = 200, double node_spacing = 1.0);

struct SpeedProfileConfig {
  SpeedMode mode = SpeedMode::non_capped;
  double v_cap = 7.5;       // capped reference speed [m/s]
  double v_max = 10.0;      // ceiling of the non-capped profile [m/s]
  double a_lat_max = 6.0;   // [m/s^2]
  double a_long_max = 4.0;  // [m/s^2]
};

/// Capped: v = min(v_cap, sqrt(a_lat/|kappa|)). Non-capped: the curvature
/// limit clipped to v_max, then forward/backward passes so that v^2 changes by
/// at most 2 a_long_max per metre.
RefLine speed_profile(RefLine line, const SpeedProfileConfig& cfg);

enum class CurvatureClass { straight, mild, curvy };
std::string_view to_string(CurvatureClass c);
CurvatureClass curvature_class_from_string(std::string_view name);

/// Arclength window [s_start, s_end) of a closed line; s_end may exceed the
/// lap length, in which case the window wraps through s = 0.
struct Sector {
  int index = 1;  // 1..3 in arclength order starting from the chosen phase
  double s_start = 0.0;
  double s_end = 0.0;
  CurvatureClass curvature_class = CurvatureClass::straight;
  double mean_abs_kappa = 0.0;

  bool contains(double s, double lap_length) const;
};

/// Three equal-length windows whose phase maximises the spread of mean |kappa|;
/// ranked lowest/middle/highest as straight/mild/curvy (ties keep arclength order).
std::array<Sector, 3> split_sectors(const RefLine& line);
const Sector& sector_of_class(const std::array<Sector, 3>& sectors, CurvatureClass c);

struct Projection {
  std::size_t index = 0;  // nearest resampled point
  double s = 0.0;
  double offset = 0.0;  // signed lateral offset, positive to the left
};

/// Nearest resampled point by Euclidean distance; ties go to the smaller s.
Projection lookup(const RefLine& line, double x, double y);

}  // namespace racegp
