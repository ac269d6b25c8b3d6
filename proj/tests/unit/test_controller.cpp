#include <doctest.h>

#include <cmath>

#include "racegp/controller.hpp"
#include "racegp/datagen.hpp"
#include "racegp/errors.hpp"
#include "support.hpp"

using namespace racegp;

namespace {

RefLine straight_line(double y0 = 0.0) {
  std::vector<Waypoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({0.5 * i, y0, 1.0, 1.0});
  RefLine line = resample_polyline(pts, false, LineKind::centerline);
  for (auto& p : line.points) p.v_ref = 4.0;
  return line;
}

}  // namespace

TEST_CASE("pure pursuit steering") {
  VehicleParams p;
  ControllerConfig c;
  SUBCASE("aligned on a straight") {
    const VehicleState s{10.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0};
    CHECK(std::abs(pure_pursuit_steer(s, straight_line(), c, p)) < 1e-12);
  }
  SUBCASE("aligned on a circle") {
    const double R = 20.0;
    const RefLine line = build_refline(testing::circle_track(R, 400));
    const auto& q = line.points[0];
    const VehicleState s{q.x, q.y, 0.0, 2.0, q.heading, 0.0, 0.0};
    const double expected = std::atan(p.wheelbase() / R);
    CHECK(pure_pursuit_steer(s, line, c, p) == doctest::Approx(expected).epsilon(0.05));
  }
  SUBCASE("mirror symmetry") {
    const VehicleState left{10.0, 0.3, 0.0, 3.0, 0.1, 0.0, 0.0};
    const VehicleState right{10.0, -0.3, 0.0, 3.0, -0.1, 0.0, 0.0};
    const double a = pure_pursuit_steer(left, straight_line(), c, p);
    const double b = pure_pursuit_steer(right, straight_line(), c, p);
    CHECK(a < 0.0);
    CHECK(a == doctest::Approx(-b).epsilon(1e-9));
  }
}

TEST_CASE("control step") {
  VehicleParams p;
  ControllerConfig c;
  const RefLine line = straight_line();
  SUBCASE("on target gives zero input") {
    const VehicleState s{10.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0};
    const ControlInput u = control_step(s, line, c, p);
    CHECK(std::abs(u.a_long) < 1e-12);
    CHECK(std::abs(u.delta_v) < 1e-12);
  }
  SUBCASE("proportional speed law") {
    p.a_max = 5.0;
    c.k_speed = 2.0;
    const VehicleState s{10.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0};
    CHECK(control_step(s, line, c, p).a_long == doctest::Approx(2.0));
  }
  SUBCASE("steering velocity saturates") {
    c.k_steer = 20.0;
    const VehicleState s{10.0, 0.0, -0.4, 4.0, 0.0, 0.0, 0.0};
    CHECK(control_step(s, line, c, p).delta_v == p.delta_v_max);
  }
}

TEST_CASE("controller config validation") {
  ControllerConfig c;
  CHECK_NOTHROW(c.validate());
  c.lookahead_base = 0.05;
  CHECK_THROWS_AS(c.validate(0.1), ConfigError);
  c = {};
  c.k_steer = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("closed-loop lap stays on track") {
  const Track t = testing::stadium_track(14.0, 5.0);
  VehicleParams p;
  ControllerConfig c;
  ScenarioSetup setup;
  setup.profile.v_max = 6.0;
  for (const Scenario& sc : Scenario::all()) {
    CAPTURE(sc.name());
    const RefLine line = scenario_refline(t, sc, setup);
    const RefLine center = build_refline(t);
    const Dataset d = run_episode(t, line, sc, p, c, 1, 0, setup.profile.v_cap);
    REQUIRE(d.size() > 100);
    double worst = 0.0;
    for (const auto& s : d.samples) {
      const Projection pr = lookup(center, s.x_next.x, s.x_next.y);
      worst = std::max(worst, std::abs(pr.offset));
    }
    CHECK(worst < 1.1);
  }
}
