#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "racegp/config.hpp"
#include "racegp/track.hpp"

namespace testing {

inline racegp::Track circle_track(double radius, int n, double width = 1.0) {
  racegp::Track t;
  t.name = "circle";
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    t.waypoints.push_back({radius * std::cos(a), radius * std::sin(a), width, width});
  }
  return t;
}

// Rounded rectangle: two straights joined by semicircles, counter-clockwise.
inline racegp::Track stadium_track(double straight, double radius, double width = 1.1,
                                   double step = 0.5) {
  racegp::Track t;
  t.name = "stadium";
  const auto push = [&](double x, double y) { t.waypoints.push_back({x, y, width, width}); };
  const int ns = static_cast<int>(straight / step);
  const int na = static_cast<int>(std::numbers::pi * radius / step);
  for (int i = 0; i < ns; ++i) push(-straight / 2 + straight * i / ns, -radius);
  for (int i = 0; i < na; ++i) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * i / na;
    push(straight / 2 + radius * std::cos(a), radius * std::sin(a));
  }
  for (int i = 0; i < ns; ++i) push(straight / 2 - straight * i / ns, radius);
  for (int i = 0; i < na; ++i) {
    const double a = std::numbers::pi / 2 + std::numbers::pi * i / na;
    push(-straight / 2 + radius * std::cos(a), radius * std::sin(a));
  }
  return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("racegp_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small closed track written to dir, with a config that uses it. Laps are
// short so a cell fits in well under a second.
inline racegp::RunConfig small_config(const std::filesystem::path& dir, int budget = 20) {
  auto oval = stadium_track(14.0, 5.0);
  oval.name = "oval";
  racegp::save_track(oval, dir / "oval.csv");
  auto wide = stadium_track(10.0, 6.0);
  wide.name = "wide";
  racegp::save_track(wide, dir / "wide.csv");
  racegp::RunConfig cfg;
  cfg.tracks = {{"oval", dir / "oval.csv"}, {"wide", dir / "wide.csv"}};
  cfg.output_dir = dir / "out";
  cfg.profile.v_max = 6.0;
  cfg.profile.v_cap = 5.0;
  cfg.gp.budget = budget;
  cfg.gp.restarts = 2;
  cfg.matrix.tracks = {"oval"};
  return cfg;
}

}  // namespace testing
