#include "racegp/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"

namespace racegp {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

constexpr std::array<const char*, 17> kDatasetColumns = {
    "t",      "x",      "y",         "delta",      "v",          "psi",
    "omega",  "beta",   "a_long",    "delta_v",    "next_x",     "next_y",
    "next_delta", "next_v", "next_psi", "next_omega", "next_beta"};

}  // namespace

std::string Scenario::name() const {
  return std::string(line == LineKind::raceline ? "RA" : "CE") +
         (speed == SpeedMode::capped ? "_CAP" : "_NON-CAP");
}

std::string Scenario::flag() const {
  return std::string(line == LineKind::raceline ? "ra" : "ce") +
         (speed == SpeedMode::capped ? "-cap" : "-noncap");
}

Scenario Scenario::parse(std::string_view text) {
  const std::string t = lower(text);
  for (const Scenario& s : all()) {
    if (t == s.flag() || t == lower(s.name())) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(text) +
                    "' (expected ra-noncap, ce-noncap, ra-cap or ce-cap)");
}

std::array<Scenario, 4> Scenario::all() {
  return {Scenario{LineKind::raceline, SpeedMode::non_capped},
          Scenario{LineKind::centerline, SpeedMode::non_capped},
          Scenario{LineKind::raceline, SpeedMode::capped},
          Scenario{LineKind::centerline, SpeedMode::capped}};
}

RefLine scenario_refline(const Track& track, const Scenario& scenario, const ScenarioSetup& setup) {
  const auto raceline =
      scenario.line == LineKind::raceline ? setup.raceline_path : std::optional<std::filesystem::path>{};
  RefLine line = build_refline(track, scenario.line, raceline, setup.spacing);
  SpeedProfileConfig profile = setup.profile;
  profile.mode = scenario.speed;
  return speed_profile(std::move(line), profile);
}

Dataset run_episode(const Track& track, const RefLine& line, const Scenario& scenario,
                    const VehicleParams& p, const ControllerConfig& c, int laps,
                    std::uint64_t seed, double v_cap) {
  if (laps < 1) throw Error("run_episode needs laps >= 1");
  if (!line.closed) throw Error("run_episode needs a closed reference line");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter_dist(-kStartJitter, kStartJitter);
  const double jitter = jitter_dist(rng);

  const RefPoint& start = line.points.front();
  VehicleState x;
  x.x = start.x - jitter * std::sin(start.heading);
  x.y = start.y + jitter * std::cos(start.heading);
  x.psi = wrap_angle(start.heading);
  x.v = 0.5 * v_cap;

  Dataset d;
  d.scenario = scenario;
  d.track = track.name;

  const double goal = laps * line.length;
  // generous stall guard: the whole distance at 0.3 m/s
  const auto max_steps = static_cast<std::size_t>(goal / 0.3 * kControlRate) + 1;
  double progress = 0.0;
  double last_s = lookup(line, x.x, x.y).s;
  std::size_t k = 0;
  while (progress < goal) {
    if (k >= max_steps) throw EpisodeDiverged(track.name + ": episode stalled before finishing");
    const ControlInput u = clamp_input(x, control_step(x, line, c, p), p);
    const VehicleState next = integrate_step(ModelKind::dynamic, x, u, p);
    const Projection pr = lookup(line, next.x, next.y);
    const RefPoint& rp = line.points[pr.index];
    if (pr.offset > rp.w_left + 1.0 || pr.offset < -(rp.w_right + 1.0)) {
      throw EpisodeDiverged(track.name + " " + scenario.name() + ": lateral offset " +
                            std::to_string(pr.offset) + " m at s = " + std::to_string(pr.s));
    }
    d.samples.push_back({x, u, next, static_cast<double>(k) / kControlRate});
    double ds = pr.s - last_s;
    if (ds < -0.5 * line.length) ds += line.length;
    if (ds > 0.5 * line.length) ds -= line.length;
    progress += ds;
    last_s = pr.s;
    x = next;
    ++k;
  }
  return d;
}

Dataset run_episode(const Track& track, const Scenario& scenario, const ScenarioSetup& setup,
                    const VehicleParams& p, const ControllerConfig& c, int laps,
                    std::uint64_t seed) {
  const RefLine line = scenario_refline(track, scenario, setup);
  return run_episode(track, line, scenario, p, c, laps, seed, setup.profile.v_cap);
}

TrainTest collect_train_test(const Track& track, const Scenario& scenario,
                             const ScenarioSetup& setup, const VehicleParams& p,
                             const ControllerConfig& c, std::uint64_t seed) {
  const RefLine line = scenario_refline(track, scenario, setup);
  Dataset both = run_episode(track, line, scenario, p, c, 2, seed, setup.profile.v_cap);

  // split where the car crosses s = 0 for the first time after leaving it
  double progress = 0.0;
  double last_s = lookup(line, both.samples.front().x_k.x, both.samples.front().x_k.y).s;
  std::size_t split = both.samples.size();
  for (std::size_t i = 0; i < both.samples.size(); ++i) {
    const auto& xs = both.samples[i].x_next;
    const double s = lookup(line, xs.x, xs.y).s;
    double ds = s - last_s;
    if (ds < -0.5 * line.length) ds += line.length;
    if (ds > 0.5 * line.length) ds -= line.length;
    progress += ds;
    last_s = s;
    if (progress >= line.length) {
      split = i + 1;
      break;
    }
  }
  TrainTest tt;
  tt.train.scenario = tt.test.scenario = scenario;
  tt.train.track = tt.test.track = track.name;
  tt.train.samples.assign(both.samples.begin(), both.samples.begin() + split);
  tt.test.samples.assign(both.samples.begin() + split, both.samples.end());
  if (tt.train.samples.empty() || tt.test.samples.empty()) {
    throw EpisodeDiverged(track.name + ": could not split the episode into two laps");
  }
  return tt;
}

std::vector<VehicleState> ekin_replay(const Dataset& d, const VehicleParams& p) {
  std::vector<VehicleState> out;
  out.reserve(d.samples.size());
  for (const Sample& s : d.samples) out.push_back(integrate_step(ModelKind::ekin, s.x_k, s.u_k, p));
  return out;
}

std::vector<std::array<double, VehicleState::kSize>> full_errors(const Dataset& d,
                                                                 const VehicleParams& p) {
  const auto pred = ekin_replay(d, p);
  std::vector<std::array<double, VehicleState::kSize>> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto a = d.samples[i].x_next.to_array();
    const auto b = pred[i].to_array();
    for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a[j] - b[j];
    // heading differences are taken on the circle
    out[i][4] = wrap_angle(out[i][4]);
  }
  return out;
}

std::vector<ErrorSample> compute_errors(const Dataset& d, const VehicleParams& p) {
  const auto pred = ekin_replay(d, p);
  std::vector<ErrorSample> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Sample& s = d.samples[i];
    out[i].features = {s.x_k.omega, s.x_k.beta, s.u_k.a_long, s.u_k.delta_v};
    out[i].e_omega = s.x_next.omega - pred[i].omega;
    out[i].e_beta = s.x_next.beta - pred[i].beta;
  }
  return out;
}

std::string_view to_string(SizeFraction f) {
  switch (f) {
    case SizeFraction::full:
      return "full";
    case SizeFraction::half:
      return "half";
    case SizeFraction::third:
      return "third";
  }
  return "unknown";
}

SizeFraction size_fraction_from_string(std::string_view text) {
  const std::string t = lower(text);
  if (t == "full" || t == "1") return SizeFraction::full;
  if (t == "half" || t == "1/2") return SizeFraction::half;
  if (t == "third" || t == "1/3") return SizeFraction::third;
  throw ConfigError("unknown size fraction '" + std::string(text) + "' (expected full, half or third)");
}

int stride_of(SizeFraction f) {
  switch (f) {
    case SizeFraction::full:
      return 1;
    case SizeFraction::half:
      return 2;
    case SizeFraction::third:
      return 3;
  }
  return 1;
}

std::vector<ErrorSample> downsample(const std::vector<ErrorSample>& errs, SizeFraction f) {
  const auto stride = static_cast<std::size_t>(stride_of(f));
  std::vector<ErrorSample> out;
  out.reserve(errs.size() / stride + 1);
  for (std::size_t i = 0; i < errs.size(); i += stride) out.push_back(errs[i]);
  return out;
}

std::vector<ErrorSample> sector_subset(const Dataset& d, const std::vector<ErrorSample>& errs,
                                       const Sector& sector, const RefLine& line) {
  if (errs.size() != d.samples.size()) throw LengthMismatch("errors and dataset differ in length");
  std::vector<ErrorSample> out;
  for (std::size_t i = 0; i < errs.size(); ++i) {
    const auto& xk = d.samples[i].x_k;
    if (sector.contains(lookup(line, xk.x, xk.y).s, line.length)) out.push_back(errs[i]);
  }
  if (out.empty()) {
    throw EmptySector("no samples in sector " + std::to_string(sector.index) + " (" +
                      std::string(to_string(sector.curvature_class)) + ")");
  }
  return out;
}

void write_dataset_csv(const Dataset& d, const std::filesystem::path& path, const Provenance& prov) {
  std::ostringstream out;
  out << "# racegp dataset v1\n";
  out << "# tool_version=" << prov.tool_version << " seed=" << prov.seed
      << " config_hash=" << prov.config_hash << '\n';
  out << "# track=" << d.track << " scenario=" << d.scenario.name() << " samples=" << d.size() << '\n';
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    out << (i ? "," : "") << kDatasetColumns[i];
  }
  out << '\n';
  for (const Sample& s : d.samples) {
    out << format_double(s.t);
    for (double v : s.x_k.to_array()) out << ',' << format_double(v);
    out << ',' << format_double(s.u_k.a_long) << ',' << format_double(s.u_k.delta_v);
    for (double v : s.x_next.to_array()) out << ',' << format_double(v);
    out << '\n';
  }
  write_text_file(path, out.str());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Dataset d;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      std::istringstream meta{std::string(body.substr(1))};
      std::string token;
      while (meta >> token) {
        if (token.rfind("track=", 0) == 0) d.track = token.substr(6);
        if (token.rfind("scenario=", 0) == 0) d.scenario = Scenario::parse(token.substr(9));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (body.front() == 't') continue;
    }
    const auto fields = split_csv_line(body);
    if (fields.size() != kDatasetColumns.size()) {
      throw ParseError(path.string(), line_no,
                       "expected 17 columns, got " + std::to_string(fields.size()));
    }
    std::array<double, 17> v{};
    try {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_double(fields[i]);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    Sample s;
    s.t = v[0];
    s.x_k = {v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    s.u_k = {v[8], v[9]};
    s.x_next = {v[10], v[11], v[12], v[13], v[14], v[15], v[16]};
    d.samples.push_back(s);
  }
  return d;
}

}  // namespace racegp
