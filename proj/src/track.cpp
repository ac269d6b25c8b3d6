#include "racegp/track.hpp"

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"

namespace racegp {

namespace {

constexpr double kPi = std::numbers::pi;

double dist(double x0, double y0, double x1, double y1) { return std::hypot(x1 - x0, y1 - y0); }

// Thin RAII wrapper over a GSL spline.
class Spline {
 public:
  Spline(const std::vector<double>& t, const std::vector<double>& v, bool periodic)
      : spline_(gsl_spline_alloc(periodic ? gsl_interp_cspline_periodic : gsl_interp_cspline,
                                 t.size()),
                &gsl_spline_free),
        acc_(gsl_interp_accel_alloc(), &gsl_interp_accel_free),
        lo_(t.front()),
        hi_(t.back()) {
    if (gsl_spline_init(spline_.get(), t.data(), v.data(), t.size()) != GSL_SUCCESS) {
      throw DegenerateTrack("spline initialisation failed");
    }
  }
  // t*k/n rounding can land one ulp past the last knot, where GSL returns NaN
  double operator()(double t) const {
    return gsl_spline_eval(spline_.get(), std::clamp(t, lo_, hi_), acc_.get());
  }

 private:
  std::unique_ptr<gsl_spline, decltype(&gsl_spline_free)> spline_;
  std::unique_ptr<gsl_interp_accel, decltype(&gsl_interp_accel_free)> acc_;
  double lo_, hi_;
};

struct GslErrorsOff {
  GslErrorsOff() { gsl_set_error_handler_off(); }
};
const GslErrorsOff gsl_errors_off;

double signed_curvature(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double ax = x1 - x0, ay = y1 - y0;
  const double bx = x2 - x1, by = y2 - y1;
  const double cross = ax * by - ay * bx;
  const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * dist(x0, y0, x2, y2);
  if (denom <= 0.0) return 0.0;
  return 2.0 * cross / denom;
}

void finish_geometry(RefLine& line) {
  auto& pts = line.points;
  const std::size_t n = pts.size();
  const auto prev = [&](std::size_t i) { return line.closed ? (i + n - 1) % n : (i == 0 ? 0 : i - 1); };
  const auto next = [&](std::size_t i) {
    return line.closed ? (i + 1) % n : std::min(i + 1, n - 1);
  };
  double unwrap = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const RefPoint& a = pts[prev(i)];
    const RefPoint& b = pts[next(i)];
    double h = std::atan2(b.y - a.y, b.x - a.x);
    if (i > 0) {
      double d = h + unwrap - last;
      while (d > kPi) {
        unwrap -= 2.0 * kPi;
        d -= 2.0 * kPi;
      }
      while (d < -kPi) {
        unwrap += 2.0 * kPi;
        d += 2.0 * kPi;
      }
    }
    pts[i].heading = h + unwrap;
    last = pts[i].heading;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!line.closed && (i == 0 || i + 1 == n)) continue;
    const RefPoint& a = pts[prev(i)];
    const RefPoint& c = pts[next(i)];
    pts[i].kappa = signed_curvature(a.x, a.y, pts[i].x, pts[i].y, c.x, c.y);
  }
  if (!line.closed && n >= 3) {
    pts.front().kappa = pts[1].kappa;
    pts.back().kappa = pts[n - 2].kappa;
  }
}

std::vector<double> split_fields(std::string_view line) {
  std::vector<double> out;
  for (const auto& field : split_csv_line(line)) out.push_back(parse_double(field));
  return out;
}

bool is_header(std::string_view line) {
  for (char c : line) {
    if (std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E') return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(LineKind kind) {
  return kind == LineKind::centerline ? "centerline" : "raceline";
}

std::string_view to_string(SpeedMode mode) {
  return mode == SpeedMode::capped ? "capped" : "non_capped";
}

std::string_view to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::straight:
      return "straight";
    case CurvatureClass::mild:
      return "mild";
    case CurvatureClass::curvy:
      return "curvy";
  }
  return "unknown";
}

CurvatureClass curvature_class_from_string(std::string_view name) {
  if (name == "straight") return CurvatureClass::straight;
  if (name == "mild") return CurvatureClass::mild;
  if (name == "curvy") return CurvatureClass::curvy;
  throw ConfigError("unknown curvature class '" + std::string(name) + "'");
}

double RefLine::wrap_s(double s) const {
  if (!closed || length <= 0.0) return s;
  double w = std::fmod(s, length);
  if (w < 0.0) w += length;
  if (w >= length) w = 0.0;
  return w;
}

RefPoint RefLine::at(double s) const {
  if (points.empty()) return {};
  const std::size_t n = points.size();
  if (closed) {
    s = wrap_s(s);
  } else {
    s = std::clamp(s, 0.0, points.back().s);
  }
  const double f = s / spacing;
  std::size_t i = static_cast<std::size_t>(std::floor(f));
  if (!closed && i >= n - 1) return points.back();
  i = std::min(i, n - 1);
  const std::size_t j = closed ? (i + 1) % n : i + 1;
  const double w = std::clamp(f - static_cast<double>(i), 0.0, 1.0);
  const RefPoint& a = points[i];
  const RefPoint& b = points[j];
  const auto lerp = [w](double p, double q) { return p + w * (q - p); };
  RefPoint r;
  r.s = s;
  r.x = lerp(a.x, b.x);
  r.y = lerp(a.y, b.y);
  double hb = b.heading;
  if (closed && j == 0) {
    // heading is unwrapped along the lap; bring the first point next to the last
    hb += std::round((a.heading - hb) / (2.0 * kPi)) * 2.0 * kPi;
  }
  r.heading = lerp(a.heading, hb);
  r.kappa = lerp(a.kappa, b.kappa);
  r.v_ref = lerp(a.v_ref, b.v_ref);
  r.w_left = lerp(a.w_left, b.w_left);
  r.w_right = lerp(a.w_right, b.w_right);
  return r;
}

Track parse_track(std::string_view text, std::string name, const std::string& origin) {
  Track track;
  track.name = std::move(name);
  std::size_t line_no = 0;
  bool seen_data = false;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const std::string_view body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (!seen_data && is_header(body)) {
      seen_data = true;
      continue;
    }
    seen_data = true;
    std::vector<double> f;
    try {
      f = split_fields(body);
    } catch (const Error& e) {
      throw ParseError(origin, line_no, e.what());
    }
    if (f.size() != 4) {
      throw ParseError(origin, line_no,
                       "expected 4 columns (x, y, w_left, w_right), got " + std::to_string(f.size()));
    }
    track.waypoints.push_back({f[0], f[1], f[2], f[3]});
  }

  auto& wp = track.waypoints;
  if (wp.size() >= 2 && wp.front().x == wp.back().x && wp.front().y == wp.back().y) {
    wp.pop_back();
  }
  if (wp.size() < 10) {
    throw DegenerateTrack(origin + ": need at least 10 waypoints, got " + std::to_string(wp.size()));
  }
  std::vector<double> seg;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    const double d = dist(wp[i - 1].x, wp[i - 1].y, wp[i].x, wp[i].y);
    if (d <= 0.0) {
      throw DegenerateTrack(origin + ": consecutive waypoints " + std::to_string(i - 1) + " and " +
                            std::to_string(i) + " coincide");
    }
    seg.push_back(d);
  }
  std::nth_element(seg.begin(), seg.begin() + seg.size() / 2, seg.end());
  const double median = seg[seg.size() / 2];
  const double gap = dist(wp.back().x, wp.back().y, wp.front().x, wp.front().y);
  track.closed = gap <= 3.0 * median;
  return track;
}

Track load_track(const std::filesystem::path& path, std::string name) {
  if (name.empty()) name = path.stem().string();
  return parse_track(read_text_file(path), std::move(name), path.string());
}

void save_track(const Track& track, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# x_m,y_m,w_tr_left_m,w_tr_right_m\n";
  for (const auto& w : track.waypoints) {
    out << format_double(w.x) << ',' << format_double(w.y) << ',' << format_double(w.w_left) << ','
        << format_double(w.w_right) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<std::array<double, 2>> load_raceline_points(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<std::array<double, 2>> pts;
  std::size_t line_no = 0;
  bool seen_data = false;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const std::string_view body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (!seen_data && is_header(body)) {
      seen_data = true;
      continue;
    }
    seen_data = true;
    std::vector<double> f;
    try {
      f = split_fields(body);
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (f.size() != 7) {
      throw ParseError(path.string(), line_no,
                       "expected 7 columns (s, x, y, heading, kappa, v, a), got " +
                           std::to_string(f.size()));
    }
    pts.push_back({f[1], f[2]});
  }
  if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
  if (pts.size() < 10) throw DegenerateTrack(path.string() + ": raceline has fewer than 10 points");
  return pts;
}

void save_raceline(const RefLine& line, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# s_m,x_m,y_m,psi_rad,kappa_radpm,vx_mps,ax_mps2\n";
  for (std::size_t i = 0; i < line.points.size(); ++i) {
    const RefPoint& p = line.points[i];
    const RefPoint& q = line.points[(i + 1) % line.points.size()];
    const double ds = line.spacing;
    const double ax = (q.v_ref * q.v_ref - p.v_ref * p.v_ref) / (2.0 * ds);
    out << format_double(p.s) << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << format_double(p.heading) << ',' << format_double(p.kappa) << ','
        << format_double(p.v_ref) << ',' << format_double(ax) << '\n';
  }
  write_text_file(path, out.str());
}

RefLine resample_polyline(const std::vector<Waypoint>& pts, bool closed, LineKind kind,
                          double spacing) {
  if (pts.size() < 3) throw DegenerateTrack("cannot resample fewer than 3 points");
  if (!(spacing > 0.0)) throw Error("spacing must be positive");

  // chord-length parameter; closed splines repeat the first point at the end
  std::vector<double> t{0.0};
  std::vector<double> xs{pts[0].x}, ys{pts[0].y}, wl{pts[0].w_left}, wr{pts[0].w_right};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    t.push_back(t.back() + dist(pts[i - 1].x, pts[i - 1].y, pts[i].x, pts[i].y));
    xs.push_back(pts[i].x);
    ys.push_back(pts[i].y);
    wl.push_back(pts[i].w_left);
    wr.push_back(pts[i].w_right);
  }
  if (closed) {
    t.push_back(t.back() + dist(pts.back().x, pts.back().y, pts[0].x, pts[0].y));
    xs.push_back(pts[0].x);
    ys.push_back(pts[0].y);
    wl.push_back(pts[0].w_left);
    wr.push_back(pts[0].w_right);
  }
  const Spline sx(t, xs, closed);
  const Spline sy(t, ys, closed);

  // arclength table by dense sampling of the spline
  const double t_end = t.back();
  const std::size_t dense = std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(t_end / (spacing * 0.05))), 16 * t.size());
  std::vector<double> dense_t(dense + 1), dense_s(dense + 1);
  double px = sx(0.0), py = sy(0.0);
  dense_t[0] = 0.0;
  dense_s[0] = 0.0;
  for (std::size_t k = 1; k <= dense; ++k) {
    const double tk = t_end * static_cast<double>(k) / static_cast<double>(dense);
    const double qx = sx(tk), qy = sy(tk);
    dense_t[k] = tk;
    dense_s[k] = dense_s[k - 1] + dist(px, py, qx, qy);
    px = qx;
    py = qy;
  }
  const double total = dense_s.back();

  std::size_t count;
  double step;
  if (closed) {
    count = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(total / spacing)));
    step = total / static_cast<double>(count);
  } else {
    count = static_cast<std::size_t>(std::floor(total / spacing)) + 1;
    step = spacing;
  }

  const auto width_at = [&](const std::vector<double>& w, double tq) {
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    const std::size_t j = std::clamp<std::size_t>(it - t.begin(), 1, t.size() - 1);
    const double a = (tq - t[j - 1]) / (t[j] - t[j - 1]);
    return w[j - 1] + std::clamp(a, 0.0, 1.0) * (w[j] - w[j - 1]);
  };

  RefLine line;
  line.kind = kind;
  line.closed = closed;
  line.spacing = step;
  line.points.resize(count);
  std::size_t k = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = step * static_cast<double>(i);
    while (k + 1 < dense && dense_s[k + 1] < s) ++k;
    const double seg = dense_s[k + 1] - dense_s[k];
    const double a = seg > 0.0 ? (s - dense_s[k]) / seg : 0.0;
    const double tq = dense_t[k] + std::clamp(a, 0.0, 1.0) * (dense_t[k + 1] - dense_t[k]);
    RefPoint& p = line.points[i];
    p.s = s;
    p.x = sx(tq);
    p.y = sy(tq);
    p.w_left = width_at(wl, tq);
    p.w_right = width_at(wr, tq);
  }
  line.length = closed ? total : line.points.back().s;
  finish_geometry(line);
  return line;
}

std::vector<Waypoint> smooth_raceline(const Track& track, double margin, int iterations,
                                      double node_spacing) {
  const RefLine center = resample_polyline(track.waypoints, true, LineKind::centerline, node_spacing);
  const auto n = static_cast<Eigen::Index>(center.size());
  Eigen::VectorXd cx(n), cy(n), nx(n), ny(n), lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RefPoint& c = center.points[static_cast<std::size_t>(i)];
    cx(i) = c.x;
    cy(i) = c.y;
    nx(i) = -std::sin(c.heading);
    ny(i) = std::cos(c.heading);
    hi(i) = std::max(0.0, c.w_left - margin);
    lo(i) = -std::max(0.0, c.w_right - margin);
  }

  // second differences of p = c + off * n are A off + b, stacked as [x; y]
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, n);
  Eigen::VectorXd b(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = (i + n - 1) % n, c = (i + 1) % n;
    A(i, a) += nx(a);
    A(i, i) -= 2.0 * nx(i);
    A(i, c) += nx(c);
    A(n + i, a) += ny(a);
    A(n + i, i) -= 2.0 * ny(i);
    A(n + i, c) += ny(c);
    b(i) = cx(a) - 2.0 * cx(i) + cx(c);
    b(n + i) = cy(a) - 2.0 * cy(i) + cy(c);
  }
  Eigen::MatrixXd H = A.transpose() * A;
  H.diagonal().array() += 1e-9;
  const Eigen::VectorXd g = A.transpose() * b;

  // active-set solve of min 0.5 off'H off + g'off subject to lo <= off <= hi
  enum Bound : signed char { free_var = 0, at_lo = -1, at_hi = 1 };
  std::vector<Bound> state(static_cast<std::size_t>(n), free_var);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iterations; ++it) {
    std::vector<Eigen::Index> fr;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == free_var) fr.push_back(i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Bound st = state[static_cast<std::size_t>(i)];
      if (st != free_var) off(i) = st == at_lo ? lo(i) : hi(i);
    }
    if (!fr.empty()) {
      const auto m = static_cast<Eigen::Index>(fr.size());
      Eigen::MatrixXd Hff(m, m);
      Eigen::VectorXd rhs(m);
      const Eigen::VectorXd Hx = H * off;
      for (Eigen::Index r = 0; r < m; ++r) {
        rhs(r) = -(g(fr[r]) + Hx(fr[r]));
        for (Eigen::Index q = 0; q < m; ++q) {
          Hff(r, q) = H(fr[r], fr[q]);
          rhs(r) += H(fr[r], fr[q]) * off(fr[q]);
        }
      }
      const Eigen::VectorXd xf = Hff.ldlt().solve(rhs);
      for (Eigen::Index r = 0; r < m; ++r) off(fr[r]) = xf(r);
    }
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& st = state[static_cast<std::size_t>(i)];
      if (st == free_var && off(i) > hi(i)) {
        st = at_hi;
        changed = true;
      } else if (st == free_var && off(i) < lo(i)) {
        st = at_lo;
        changed = true;
      }
    }
    if (changed) continue;
    // release bounds whose multiplier has the wrong sign
    const Eigen::VectorXd grad = H * off + g;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& st = state[static_cast<std::size_t>(i)];
      if ((st == at_hi && grad(i) > 0.0) || (st == at_lo && grad(i) < 0.0)) {
        st = free_var;
        changed = true;
      }
    }
    if (!changed) break;
  }
  off = off.cwiseMax(lo).cwiseMin(hi);

  std::vector<Waypoint> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const RefPoint& c = center.points[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {c.x + off(i) * nx(i), c.y + off(i) * ny(i),
                                        c.w_left - off(i), c.w_right + off(i)};
  }
  return out;
}

RefLine build_refline(const Track& track, LineKind kind,
                      const std::optional<std::filesystem::path>& raceline_path, double spacing) {
  if (kind == LineKind::centerline) {
    return resample_polyline(track.waypoints, track.closed, kind, spacing);
  }
  if (!track.closed) throw DegenerateTrack("racelines need a closed track");
  if (!raceline_path) {
    return resample_polyline(smooth_raceline(track), true, kind, spacing);
  }
  const RefLine center = resample_polyline(track.waypoints, track.closed, LineKind::centerline, spacing);
  std::vector<Waypoint> pts;
  for (const auto& xy : load_raceline_points(*raceline_path)) {
    const Projection pr = lookup(center, xy[0], xy[1]);
    const RefPoint& c = center.points[pr.index];
    if (pr.offset > c.w_left + kRacelineTolerance || pr.offset < -(c.w_right + kRacelineTolerance)) {
      throw RacelineTrackMismatch(raceline_path->string() + ": raceline point (" +
                                  std::to_string(xy[0]) + ", " + std::to_string(xy[1]) +
                                  ") is " + std::to_string(pr.offset) + " m off the centerline");
    }
    pts.push_back({xy[0], xy[1], c.w_left - pr.offset, c.w_right + pr.offset});
  }
  return resample_polyline(pts, true, kind, spacing);
}

RefLine speed_profile(RefLine line, const SpeedProfileConfig& cfg) {
  if (!(cfg.v_cap > 0.0) || !(cfg.a_lat_max > 0.0) || !(cfg.a_long_max > 0.0) ||
      !(cfg.v_max > 0.0)) {
    throw ConfigError("speed profile limits must be positive");
  }
  auto& pts = line.points;
  const std::size_t n = pts.size();
  const auto curvature_limit = [&](double kappa) {
    const double k = std::abs(kappa);
    return k > 0.0 ? std::sqrt(cfg.a_lat_max / k) : std::numeric_limits<double>::infinity();
  };
  if (cfg.mode == SpeedMode::capped) {
    for (auto& p : pts) p.v_ref = std::min(cfg.v_cap, curvature_limit(p.kappa));
    return line;
  }
  std::vector<double> v2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::min(cfg.v_max, curvature_limit(pts[i].kappa));
    v2[i] = v * v;
  }
  const auto ds = [&](std::size_t i, std::size_t j) { return std::abs(pts[j].s - pts[i].s); };
  const double gain = 2.0 * cfg.a_long_max;
  const std::size_t passes = line.closed ? 2 * n : n - 1;
  for (std::size_t k = 0; k < passes; ++k) {
    const std::size_t i = k % n;
    const std::size_t j = (i + 1) % n;
    if (!line.closed && j == 0) continue;
    const double step = line.closed ? line.spacing : ds(i, j);
    v2[j] = std::min(v2[j], v2[i] + gain * step);
  }
  for (std::size_t k = 0; k < passes; ++k) {
    const std::size_t j = (n - 1) - (k % n);
    const std::size_t i = (j + 1) % n;
    if (!line.closed && i == 0) continue;
    const double step = line.closed ? line.spacing : ds(j, i);
    v2[j] = std::min(v2[j], v2[i] + gain * step);
  }
  for (std::size_t i = 0; i < n; ++i) pts[i].v_ref = std::sqrt(v2[i]);
  return line;
}

bool Sector::contains(double s, double lap_length) const {
  double u = s;
  if (u < s_start) u += lap_length;
  return u >= s_start && u < s_end;
}

std::array<Sector, 3> split_sectors(const RefLine& line) {
  const std::size_t n = line.size();
  if (!line.closed || n < 3) throw DegenerateTrack("sectors need a closed reference line");
  const double L = line.length;
  const double w = L / 3.0;

  // prefix sums over two laps so that windows can wrap
  std::vector<double> prefix(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < 2 * n; ++i) prefix[i + 1] = prefix[i] + std::abs(line.points[i % n].kappa);
  const auto window_mean = [&](double s0, double s1) {
    const auto i0 = static_cast<std::size_t>(std::ceil(s0 / line.spacing - 1e-9));
    const auto i1 = static_cast<std::size_t>(std::ceil(s1 / line.spacing - 1e-9));
    const std::size_t count = i1 > i0 ? i1 - i0 : 0;
    return count ? (prefix[std::min(i1, 2 * n)] - prefix[std::min(i0, 2 * n)]) / count : 0.0;
  };

  double best_phase = 0.0;
  double best_spread = -1.0;
  const auto candidates = static_cast<std::size_t>(std::ceil(w / line.spacing));
  for (std::size_t k = 0; k < candidates; ++k) {
    const double phase = static_cast<double>(k) * line.spacing;
    std::array<double, 3> m{};
    for (int j = 0; j < 3; ++j) m[j] = window_mean(phase + j * w, phase + (j + 1) * w);
    const double mean = (m[0] + m[1] + m[2]) / 3.0;
    double spread = 0.0;
    for (double v : m) spread += (v - mean) * (v - mean);
    if (spread > best_spread * (1.0 + 1e-12) + 1e-300) {
      best_spread = spread;
      best_phase = phase;
    }
  }

  std::array<Sector, 3> sectors;
  for (int j = 0; j < 3; ++j) {
    Sector& sec = sectors[j];
    sec.index = j + 1;
    sec.s_start = best_phase + j * w;
    sec.s_end = j == 2 ? best_phase + L : best_phase + (j + 1) * w;
    sec.mean_abs_kappa = window_mean(sec.s_start, sec.s_end);
  }
  // means within spline noise of each other count as ties
  double top = 0.0;
  for (const auto& sec : sectors) top = std::max(top, sec.mean_abs_kappa);
  const double tie = 1e-4 * top;
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sectors[a].mean_abs_kappa < sectors[b].mean_abs_kappa - tie;
  });
  sectors[order[0]].curvature_class = CurvatureClass::straight;
  sectors[order[1]].curvature_class = CurvatureClass::mild;
  sectors[order[2]].curvature_class = CurvatureClass::curvy;
  return sectors;
}

const Sector& sector_of_class(const std::array<Sector, 3>& sectors, CurvatureClass c) {
  for (const auto& s : sectors) {
    if (s.curvature_class == c) return s;
  }
  throw Error("no sector of class " + std::string(to_string(c)));
}

Projection lookup(const RefLine& line, double x, double y) {
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < line.points.size(); ++i) {
    const double dx = x - line.points[i].x;
    const double dy = y - line.points[i].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best.index = i;
    }
  }
  if (line.points.empty()) return best;
  const RefPoint& p = line.points[best.index];
  best.s = p.s;
  best.offset = -(x - p.x) * std::sin(p.heading) + (y - p.y) * std::cos(p.heading);
  return best;
}

}  // namespace racegp
