#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"
#include "racegp/track.hpp"
#include "support.hpp"

using namespace racegp;
using testing::circle_track;
using testing::stadium_track;

namespace {

std::string to_csv(const Track& t) {
  std::ostringstream out;
  out << "x,y,w_left,w_right\n";
  for (const auto& w : t.waypoints) out << w.x << ',' << w.y << ',' << w.w_left << ',' << w.w_right << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("track loading") {
  const Track circle = circle_track(10.0, 100);
  const Track t = parse_track(to_csv(circle), "c");
  CHECK(t.waypoints.size() == 100);
  CHECK(t.closed);
  CHECK(parse_track(to_csv(circle), "c") == t);

  SUBCASE("short row names its line") {
    std::string text = to_csv(circle);
    text += "1.0,2.0\n";
    try {
      parse_track(text, "c", "bad.csv");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 102);
      CHECK(std::string(e.what()).find("bad.csv:102") != std::string::npos);
    }
  }
  SUBCASE("too few points") {
    CHECK_THROWS_AS(parse_track("0,0,1,1\n1,0,1,1\n2,0,1,1\n", "c"), DegenerateTrack);
  }
  SUBCASE("file round trip") {
    testing::TempDir dir("track");
    save_track(t, dir.path() / "c.csv");
    const Track back = load_track(dir.path() / "c.csv");
    CHECK(back.name == "c");
    REQUIRE(back.waypoints.size() == t.waypoints.size());
    CHECK(back.waypoints[17] == t.waypoints[17]);
  }
}

TEST_CASE("reference line geometry") {
  SUBCASE("circle curvature and length") {
    const double R = 10.0;
    const RefLine line = build_refline(circle_track(R, 100));
    CHECK(line.closed);
    CHECK(line.length == doctest::Approx(2 * std::numbers::pi * R).epsilon(1e-3));
    for (const auto& p : line.points) CHECK(p.kappa == doctest::Approx(1.0 / R).epsilon(0.01));
  }
  SUBCASE("straight segment has zero curvature") {
    std::vector<Waypoint> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({0.5 * i, 0.0, 1.0, 1.0});
    const RefLine line = resample_polyline(pts, false, LineKind::centerline);
    for (const auto& p : line.points) CHECK(std::abs(p.kappa) < 1e-9);
  }
  SUBCASE("length close to the polygon perimeter") {
    const Track t = stadium_track(20.0, 5.0, 1.0, 0.25);
    double perimeter = 0.0;
    const auto& w = t.waypoints;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto& a = w[i];
      const auto& b = w[(i + 1) % w.size()];
      perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    CHECK(build_refline(t).length == doctest::Approx(perimeter).epsilon(1e-3));
  }
  SUBCASE("uniform spacing and interpolation") {
    const RefLine line = build_refline(circle_track(10.0, 80));
    for (std::size_t i = 1; i < line.size(); ++i) {
      CHECK(line.points[i].s - line.points[i - 1].s == doctest::Approx(line.spacing));
    }
    const RefPoint a = line.at(line.length + 1.0);
    const RefPoint b = line.at(1.0);
    CHECK(a.x == doctest::Approx(b.x));
    CHECK(a.y == doctest::Approx(b.y));
  }
}

TEST_CASE("speed profiles") {
  SpeedProfileConfig cfg;
  SUBCASE("capped on a straight is v_cap") {
    std::vector<Waypoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({0.5 * i, 0.0, 1.0, 1.0});
    cfg.mode = SpeedMode::capped;
    const RefLine line = speed_profile(resample_polyline(pts, false, LineKind::centerline), cfg);
    for (const auto& p : line.points) CHECK(p.v_ref == doctest::Approx(cfg.v_cap));
  }
  SUBCASE("non-capped on a circle is constant") {
    cfg.mode = SpeedMode::non_capped;
    const RefLine line = speed_profile(build_refline(circle_track(3.0, 60)), cfg);
    const double kappa = line.points.front().kappa;
    const double expected = std::min(cfg.v_max, std::sqrt(cfg.a_lat_max / kappa));
    for (const auto& p : line.points) CHECK(p.v_ref == doctest::Approx(expected).epsilon(0.01));
  }
  SUBCASE("acceleration bound holds between hairpins") {
    cfg.mode = SpeedMode::non_capped;
    const RefLine line = speed_profile(build_refline(stadium_track(30.0, 2.0)), cfg);
    double vmin = 1e9, vmax = 0.0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const auto& a = line.points[i];
      const auto& b = line.points[(i + 1) % line.size()];
      CHECK(std::abs(b.v_ref * b.v_ref - a.v_ref * a.v_ref) <=
            2.0 * cfg.a_long_max * line.spacing + 1e-9);
      CHECK(a.v_ref <= std::sqrt(cfg.a_lat_max / std::max(std::abs(a.kappa), 1e-12)) + 1e-9);
      vmin = std::min(vmin, a.v_ref);
      vmax = std::max(vmax, a.v_ref);
    }
    CHECK(vmax == doctest::Approx(cfg.v_max));
    CHECK(vmin < 0.5 * cfg.v_max);
  }
  SUBCASE("forward-backward oracle on 20 points") {
    // straight between two tight corners, coarse spacing
    RefLine line;
    line.closed = false;
    line.spacing = 1.0;
    for (int i = 0; i < 20; ++i) {
      RefPoint p;
      p.s = i;
      p.kappa = (i == 0 || i == 19) ? 1.0 : 0.0;
      line.points.push_back(p);
    }
    line.length = 19.0;
    cfg.mode = SpeedMode::non_capped;
    cfg.v_max = 10.0;
    cfg.a_lat_max = 4.0;
    cfg.a_long_max = 2.0;
    const RefLine out = speed_profile(line, cfg);
    // v^2 grows by 2 a ds per metre away from the nearer corner, capped at v_max^2
    for (int i = 0; i < 20; ++i) {
      const double d = std::min(i, 19 - i);
      const double v2 = std::min(100.0, 4.0 + 4.0 * d);
      CHECK(out.points[i].v_ref == doctest::Approx(std::sqrt(v2)).epsilon(1e-12));
    }
  }
  cfg.v_cap = 0.0;
  CHECK_THROWS_AS(speed_profile(build_refline(circle_track(3.0, 60)), cfg), ConfigError);
}

TEST_CASE("sectors") {
  SUBCASE("partition of the lap") {
    const RefLine line = build_refline(stadium_track(20.0, 4.0));
    const auto sec = split_sectors(line);
    CHECK(sec[0].s_end == doctest::Approx(sec[1].s_start));
    CHECK(sec[1].s_end == doctest::Approx(sec[2].s_start));
    CHECK(sec[2].s_end - sec[0].s_start == doctest::Approx(line.length));
    for (double s = 0.0; s < line.length; s += 0.37) {
      int hits = 0;
      for (const auto& x : sec) hits += x.contains(s, line.length);
      CHECK(hits == 1);
    }
  }
  SUBCASE("uniform curvature keeps arclength order") {
    const auto sec = split_sectors(build_refline(circle_track(10.0, 200)));
    CHECK(sec[0].curvature_class == CurvatureClass::straight);
    CHECK(sec[1].curvature_class == CurvatureClass::mild);
    CHECK(sec[2].curvature_class == CurvatureClass::curvy);
  }
  SUBCASE("hairpin window is curvy") {
    // straight, hairpin, S-curve, return straight, wide closing turn
    Track t;
    t.name = "mixed";
    double x = 0.0, y = 0.0, h = 0.0;
    const double ds = 0.05;
    int k = 0;
    const auto advance = [&](double len, double kappa) {
      const int n = static_cast<int>(std::lround(len / ds));
      for (int i = 0; i < n; ++i, ++k) {
        if (k % 10 == 0) t.waypoints.push_back({x, y, 1.0, 1.0});
        h += kappa * ds;
        x += ds * std::cos(h - 0.5 * kappa * ds);
        y += ds * std::sin(h - 0.5 * kappa * ds);
      }
    };
    const double pi = std::numbers::pi;
    advance(40.0, 0.0);
    advance(2.0 * pi, 0.5);  // 180 deg at R = 2
    advance(pi, -0.25);      // S-curve: 45 deg right, 45 deg left at R = 4
    advance(pi, 0.25);
    advance(x, 0.0);         // back to x = 0
    const double r = y / 2.0;
    advance(pi * r, 1.0 / r);
    const RefLine line = resample_polyline(t.waypoints, true, LineKind::centerline);
    const auto sec = split_sectors(line);
    const Sector& curvy = sector_of_class(sec, CurvatureClass::curvy);
    // the hairpin starts at s = 40 and spans 2 pi m
    CHECK(std::hypot(x, y) < 0.05);
    CHECK(curvy.contains(40.0 + std::numbers::pi, line.length));
    CHECK(curvy.mean_abs_kappa >= sector_of_class(sec, CurvatureClass::mild).mean_abs_kappa);
  }
  CHECK(curvature_class_from_string("curvy") == CurvatureClass::curvy);
}

TEST_CASE("lookup") {
  const RefLine line = build_refline(circle_track(10.0, 100));
  SUBCASE("exactly on a point") {
    const auto& p = line.points[37];
    const Projection pr = lookup(line, p.x, p.y);
    CHECK(pr.index == 37);
    CHECK(std::abs(pr.offset) < 1e-12);
  }
  SUBCASE("left of a straight is positive") {
    std::vector<Waypoint> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({0.5 * i, 0.0, 1.0, 1.0});
    const RefLine straight = resample_polyline(pts, false, LineKind::centerline);
    CHECK(lookup(straight, 4.0, 1.0).offset == doctest::Approx(1.0));
    CHECK(lookup(straight, 4.0, -1.0).offset == doctest::Approx(-1.0));
  }
  SUBCASE("matches an exhaustive scan") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-12.0, 12.0);
    for (int k = 0; k < 200; ++k) {
      const double x = U(rng), y = U(rng);
      std::size_t best = 0;
      double bd = 1e300;
      for (std::size_t i = 0; i < line.size(); ++i) {
        const double d = std::hypot(x - line.points[i].x, y - line.points[i].y);
        if (d < bd) {
          bd = d;
          best = i;
        }
      }
      CHECK(lookup(line, x, y).index == best);
    }
  }
}

TEST_CASE("smoothed raceline") {
  const Track t = stadium_track(20.0, 4.0, 1.1);
  const auto pts = smooth_raceline(t, 0.3);
  const RefLine center = build_refline(t);
  double max_offset = 0.0;
  for (const auto& w : pts) {
    const Projection pr = lookup(center, w.x, w.y);
    CHECK(std::abs(pr.offset) <= 1.1 - 0.3 + 0.05);
    max_offset = std::max(max_offset, std::abs(pr.offset));
    CHECK(w.w_left > 0.0);
    CHECK(w.w_right > 0.0);
  }
  // cutting the corners uses most of the available width
  CHECK(max_offset > 0.5);

  // less integrated squared curvature than the centerline
  const RefLine race = build_refline(t, LineKind::raceline);
  double kc = 0.0, kr = 0.0;
  for (const auto& p : center.points) kc += p.kappa * p.kappa * center.spacing;
  for (const auto& p : race.points) kr += p.kappa * p.kappa * race.spacing;
  CHECK(kr < 0.95 * kc);

  SUBCASE("external raceline file round trip") {
    testing::TempDir dir("raceline");
    save_raceline(race, dir.path() / "r.csv");
    const RefLine loaded = build_refline(t, LineKind::raceline, dir.path() / "r.csv");
    CHECK(loaded.length == doctest::Approx(race.length).epsilon(1e-3));
  }
  SUBCASE("raceline off the track is rejected") {
    testing::TempDir dir("raceline_bad");
    RefLine far = race;
    for (auto& p : far.points) p.y += 5.0;
    save_raceline(far, dir.path() / "r.csv");
    CHECK_THROWS_AS(build_refline(t, LineKind::raceline, dir.path() / "r.csv"), RacelineTrackMismatch);
  }
}
