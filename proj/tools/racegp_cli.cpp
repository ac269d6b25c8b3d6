// racegp command-line tool: simulate, train, evaluate, matrix, report, raceline.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "racegp/config.hpp"
#include "racegp/datagen.hpp"
#include "racegp/error_model.hpp"
#include "racegp/errors.hpp"
#include "racegp/experiment.hpp"
#include "racegp/report.hpp"
#include "racegp/track.hpp"

namespace fs = std::filesystem;
using namespace racegp;

namespace {

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
  std::optional<int> budget;
};

struct CellOptions {
  std::string track;
  std::string scenario = "ra-noncap";
  std::string size = "full";
  std::string combo;
  std::string subset = "full";
  std::string test = "same";
};

// a --track value that is not a configured name but an existing CSV is added under its stem
std::string register_track(RunConfig& cfg, const std::string& track) {
  if (cfg.tracks.contains(track)) return track;
  const fs::path p(track);
  if (fs::exists(p) && p.extension() == ".csv") {
    cfg.tracks[p.stem().string()] = p;
    return p.stem().string();
  }
  throw ConfigError("unknown track '" + track + "': not in the config and not a CSV file");
}

std::string default_track(const RunConfig& cfg) {
  if (cfg.tracks.empty()) throw ConfigError("no tracks configured; pass --config or --track FILE.csv");
  return cfg.tracks.begin()->first;
}

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (g.seed) cfg.seed = *g.seed;
  if (g.budget) cfg.gp.budget = *g.budget;
  return cfg;
}

Provenance provenance(const RunConfig& cfg) { return {cfg.seed, config_hash(cfg), kToolVersion}; }

ExperimentConfig cell_from(const CellOptions& o, RunConfig& cfg) {
  ExperimentConfig c;
  c.track = register_track(cfg, o.track.empty() ? default_track(cfg) : o.track);
  c.scenario = Scenario::parse(o.scenario);
  c.size = size_fraction_from_string(o.size);
  c.combo = canonical_combo(o.combo.empty() ? cfg.gp.combo : o.combo);
  c.subset = o.subset;
  c.test = o.test;
  if (c.test.starts_with("track:")) c.test = "track:" + register_track(cfg, c.test.substr(6));
  c.seed = cfg.seed;
  return c;
}

void add_cell_options(CLI::App* sub, CellOptions& o, bool with_test) {
  sub->add_option("--track", o.track, "Track name from the config, or a waypoint CSV path");
  sub->add_option("--scenario", o.scenario, "ra-noncap | ce-noncap | ra-cap | ce-cap")
      ->capture_default_str();
  sub->add_option("--size", o.size, "full | half | third")->capture_default_str();
  sub->add_option("--combo", o.combo, "Kernel combination, e.g. RQ+LIN (default: gp.combo)");
  sub->add_option("--subset", o.subset, "full | 1 | 2 | 3 | straight | mild | curvy")
      ->capture_default_str();
  if (with_test) {
    sub->add_option("--test", o.test, "same | track:<name> | all-scenarios")->capture_default_str();
  }
}

void log_record(const ExperimentRecord& r) {
  if (r.status == CellStatus::ok) {
    spdlog::info("{}: r2 omega {:.4f} beta {:.4f} mean {:.4f} (n_train {}, {:.2f} s){}", r.config.id(),
                 r.r2_omega, r.r2_beta, r.r2_mean, r.n_train, r.train_time_s,
                 r.high_uncertainty ? " [high uncertainty]" : "");
  } else {
    spdlog::warn("{}: {} ({})", r.config.id(), to_string(r.status), r.message);
  }
}

int finish(const std::vector<ExperimentRecord>& records, const RunConfig& cfg, const fs::path& dir) {
  for (const auto& r : records) log_record(r);
  for (const auto& p : write_report(records, dir, provenance(cfg))) spdlog::info("wrote {}", p.string());
  const bool any_failed = std::any_of(records.begin(), records.end(), [](const ExperimentRecord& r) {
    return r.status == CellStatus::failed;
  });
  return any_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process error models for racing vehicle dynamics"};
  app.set_version_flag("--version", std::string("racegp ") + kToolVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory (overrides output_dir)");
  app.add_option("--seed", g.seed, "Global seed (overrides seed)");
  app.add_option("--log-level", g.log_level, "trace | debug | info | warn | error | off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run closed-loop episodes and write dataset CSVs");
  std::vector<std::string> sim_tracks;
  std::string sim_scenario = "ra-noncap";
  int sim_laps = 2;
  sim->add_option("--track", sim_tracks, "Track names or CSV paths (default: all configured)");
  sim->add_option("--scenario", sim_scenario, "ra-noncap | ce-noncap | ra-cap | ce-cap | all")
      ->capture_default_str();
  sim->add_option("--laps", sim_laps, "Laps per episode")->capture_default_str()->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "Fit one error model and write it as JSON");
  CellOptions train_opts;
  add_cell_options(train, train_opts, false);
  std::string model_path;
  train->add_option("--model", model_path, "Model output path (default: <out>/models/<cell>.json)");
  train->add_option("--budget", g.budget, "Marginal-likelihood evaluations per output");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run one experiment cell and report it");
  CellOptions eval_opts;
  add_cell_options(evaluate, eval_opts, true);
  evaluate->add_option("--budget", g.budget, "Marginal-likelihood evaluations per output");

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Run the Cartesian experiment matrix");
  std::vector<std::string> m_tracks, m_scenarios, m_sizes, m_combos, m_subsets, m_tests;
  std::optional<int> parallel;
  bool keep_series = false;
  matrix->add_option("--tracks", m_tracks, "Tracks (default: matrix.tracks)");
  matrix->add_option("--scenarios", m_scenarios, "Scenarios (default: matrix.scenarios)");
  matrix->add_option("--sizes", m_sizes, "Size fractions (default: matrix.sizes)");
  matrix->add_option("--combos", m_combos, "Kernel combinations (default: matrix.combos or all 12)");
  matrix->add_option("--subsets", m_subsets, "Training subsets (default: matrix.subsets)");
  matrix->add_option("--tests", m_tests, "Test specs (default: matrix.tests)");
  matrix->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
  matrix->add_option("--budget", g.budget, "Marginal-likelihood evaluations per output");
  matrix->add_flag("--plots", keep_series, "Also write predicted-vs-true series per cell");

  // report
  auto* report = app.add_subcommand("report", "Rebuild CSV/JSON reports from a records file");
  std::string records_in;
  report->add_option("--records", records_in, "records.csv from a previous run")
      ->required()
      ->check(CLI::ExistingFile);

  // raceline
  auto* raceline = app.add_subcommand("raceline", "Compute a smoothed raceline and write it as CSV");
  std::vector<std::string> rl_tracks;
  double rl_margin = 0.3;
  raceline->add_option("--track", rl_tracks, "Tracks (default: all configured)");
  raceline->add_option("--margin", rl_margin, "Distance kept from the track bounds [m]")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("racegp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  spdlog::set_pattern("[%l] %v");

  try {
    RunConfig cfg = resolve_config(g);
    const fs::path out = cfg.output_dir;

    if (*sim) {
      if (sim_tracks.empty()) {
        for (const auto& [name, _] : cfg.tracks) sim_tracks.push_back(name);
      }
      if (sim_tracks.empty()) throw ConfigError("no tracks configured; pass --config or --track FILE.csv");
      std::vector<Scenario> scenarios;
      if (sim_scenario == "all") {
        const auto all = Scenario::all();
        scenarios.assign(all.begin(), all.end());
      } else {
        scenarios.push_back(Scenario::parse(sim_scenario));
      }
      for (auto& t : sim_tracks) t = register_track(cfg, t);
      cfg.validate();
      const Provenance prov = provenance(cfg);
      for (const auto& name : sim_tracks) {
        const Track track = load_track(cfg.track_path(name), name);
        ScenarioSetup setup{cfg.profile, std::nullopt, cfg.spacing};
        if (auto rl = cfg.raceline_for(name); !rl.empty()) setup.raceline_path = rl;
        for (const Scenario& sc : scenarios) {
          const Dataset d = run_episode(track, sc, setup, cfg.vehicle, cfg.controller, sim_laps, cfg.seed);
          const fs::path path = out / "datasets" /
                                (name + "_" + sc.flag() + "_seed" + std::to_string(cfg.seed) + ".csv");
          write_dataset_csv(d, path, prov);
          spdlog::info("wrote {} ({} samples)", path.string(), d.size());
        }
      }
      return 0;
    }

    if (*train) {
      const ExperimentConfig cell = cell_from(train_opts, cfg);
      cfg.validate();
      DatasetCache cache(cfg);
      const auto& entry = cache.get(cell.track, cell.scenario, cell.seed);
      const auto errs = training_set(entry, cell);
      ErrorFitOptions fo{cfg.gp.budget, cfg.gp.restarts, cfg.seed, cfg.gp.noise_floor, cfg.gp.initial_noise2};
      const ErrorGP eg = fit_error_model(errs, cell.combo, SizeFraction::full, fo);
      fs::path path = model_path.empty() ? out / "models" / (cell.track + "_" + cell.scenario.flag() + "_" +
                                                               std::string(to_string(cell.size)) + "_" +
                                                               cell.subset + ".json")
                                         : fs::path(model_path);
      save_error_model(eg, path, provenance(cfg));
      spdlog::info("{}: n {} in {:.2f} s, {} evaluations; wrote {}", cell.combo, errs.size(),
                   eg.train_time_s, eg.evaluations, path.string());
      return 0;
    }

    if (*evaluate) {
      const ExperimentConfig cell = cell_from(eval_opts, cfg);
      cfg.validate();
      DatasetCache cache(cfg);
      const auto rec = run_experiment(cell, cache, RunOptions{true});
      return finish({rec}, cfg, out);
    }

    if (*matrix) {
      MatrixSpec spec = cfg.matrix;
      if (!m_tracks.empty()) spec.tracks = m_tracks;
      if (!m_scenarios.empty()) spec.scenarios = m_scenarios;
      if (!m_sizes.empty()) spec.sizes = m_sizes;
      if (!m_combos.empty()) spec.combos = m_combos;
      if (!m_subsets.empty()) spec.subsets = m_subsets;
      if (!m_tests.empty()) spec.tests = m_tests;
      for (auto& t : spec.tracks) t = register_track(cfg, t);
      for (auto& t : spec.tests) {
        if (t.starts_with("track:")) t = "track:" + register_track(cfg, t.substr(6));
      }
      if (parallel) cfg.parallel = *parallel;
      cfg.matrix = spec;
      cfg.validate();
      DatasetCache cache(cfg);
      const auto cells = expand_matrix(spec, cfg.seed);
      spdlog::info("{} cells, {} worker(s)", cells.size(), cfg.parallel);
      const auto records = run_experiments(cells, cache, cfg.parallel, RunOptions{keep_series});
      return finish(records, cfg, out);
    }

    if (*report) {
      const auto records = read_records_csv(records_in);
      for (const auto& p : write_report(records, out, provenance(cfg))) spdlog::info("wrote {}", p.string());
      return 0;
    }

    if (*raceline) {
      if (rl_tracks.empty()) {
        for (const auto& [name, _] : cfg.tracks) rl_tracks.push_back(name);
      }
      if (rl_tracks.empty()) throw ConfigError("no tracks configured; pass --config or --track FILE.csv");
      for (auto& t : rl_tracks) {
        const std::string name = register_track(cfg, t);
        const Track track = load_track(cfg.track_path(name), name);
        const auto pts = smooth_raceline(track, rl_margin);
        const RefLine line = resample_polyline(pts, track.closed, LineKind::raceline, cfg.spacing);
        const fs::path path = out / "racelines" / (name + ".csv");
        save_raceline(line, path);
        spdlog::info("wrote {} ({:.1f} m)", path.string(), line.length);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
