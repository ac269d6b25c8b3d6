#include "racegp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "racegp/errors.hpp"
#include "racegp/kernel.hpp"
#include "racegp/metrics.hpp"

namespace racegp {

namespace {

int combo_order(const std::string& combo) {
  const auto& all = study_combos();
  const auto it = std::find(all.begin(), all.end(), combo);
  return it == all.end() ? static_cast<int>(all.size()) : static_cast<int>(it - all.begin());
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return text;
}

std::optional<CurvatureClass> subset_class(const std::string& subset) {
  if (subset == "straight" || subset == "mild" || subset == "curvy") {
    return curvature_class_from_string(subset);
  }
  return std::nullopt;
}

const Sector& resolve_sector(const DatasetCache::Entry& e, const std::string& subset) {
  if (const auto cls = subset_class(subset)) return sector_of_class(e.sectors, *cls);
  if (subset.size() == 1 && subset[0] >= '1' && subset[0] <= '3') return e.sectors[subset[0] - '1'];
  throw ConfigError("unknown subset '" + subset + "' (full, 1, 2, 3, straight, mild, curvy)");
}

// test set and the timestamps of its samples
struct TestSet {
  std::vector<ErrorSample> errors;
  std::vector<double> t;
};

void append(TestSet& ts, const DatasetCache::Entry& e) {
  ts.errors.insert(ts.errors.end(), e.test_errors.begin(), e.test_errors.end());
  for (const Sample& s : e.data.test.samples) ts.t.push_back(s.t);
}

TestSet resolve_test(const ExperimentConfig& cfg, DatasetCache& cache) {
  TestSet ts;
  if (cfg.test == "same") {
    append(ts, cache.get(cfg.track, cfg.scenario, cfg.seed));
  } else if (cfg.test == "all-scenarios") {
    for (const Scenario& sc : Scenario::all()) append(ts, cache.get(cfg.track, sc, cfg.seed));
  } else if (cfg.test.starts_with("track:")) {
    append(ts, cache.get(cfg.test.substr(6), cfg.scenario, cfg.seed));
  } else {
    throw ConfigError("unknown test spec '" + cfg.test + "' (same, track:<name>, all-scenarios)");
  }
  return ts;
}

// the datasets a cell touches
std::vector<std::pair<std::string, Scenario>> needed(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, Scenario>> out{{cfg.track, cfg.scenario}};
  if (cfg.test == "all-scenarios") {
    for (const Scenario& sc : Scenario::all()) out.emplace_back(cfg.track, sc);
  } else if (cfg.test.starts_with("track:")) {
    out.emplace_back(cfg.test.substr(6), cfg.scenario);
  }
  return out;
}

ExperimentRecord evaluate_cell(const ExperimentConfig& cfg, const ErrorGP& eg, std::size_t n_train,
                               DatasetCache& cache, const RunOptions& opts) {
  ExperimentRecord rec;
  rec.config = cfg;
  rec.n_train = n_train;
  rec.train_time_s = eg.train_time_s;
  try {
    const TestSet ts = resolve_test(cfg, cache);
    rec.n_test = ts.errors.size();
    const Eigen::VectorXd yo = omega_targets(ts.errors);
    const Eigen::VectorXd yb = beta_targets(ts.errors);
    const ErrorPrediction pred = predict_errors(eg, feature_matrix(ts.errors));
    rec.rmse_omega = rmse(yo, pred.mean_omega);
    rec.rmse_beta = rmse(yb, pred.mean_beta);

    const auto sd = [](const Eigen::VectorXd& y) {
      return std::sqrt((y.array() - y.mean()).square().mean());
    };
    const double ratio_o = pred.var_omega.array().sqrt().mean() / sd(yo);
    const double ratio_b = pred.var_beta.array().sqrt().mean() / sd(yb);
    rec.std_ratio = std::max(ratio_o, ratio_b);
    rec.high_uncertainty = !(rec.std_ratio <= cache.config().gp.uncertainty_ratio);

    if (opts.keep_series) {
      auto series = std::make_shared<PredictionSeries>();
      series->t = ts.t;
      const auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
      };
      series->true_omega = vec(yo);
      series->mean_omega = vec(pred.mean_omega);
      series->std_omega = vec(pred.var_omega.array().sqrt().matrix());
      series->true_beta = vec(yb);
      series->mean_beta = vec(pred.mean_beta);
      series->std_beta = vec(pred.var_beta.array().sqrt().matrix());
      rec.series = std::move(series);
    }

    rec.r2_omega = r_squared(yo, pred.mean_omega);
    rec.r2_beta = r_squared(yb, pred.mean_beta);
    rec.r2_mean = 0.5 * (rec.r2_omega + rec.r2_beta);
    rec.ev_omega = explained_variance(yo, pred.mean_omega);
    rec.ev_beta = explained_variance(yb, pred.mean_beta);
  } catch (const ConstantTarget& e) {
    rec.status = CellStatus::degenerate;
    rec.message = sanitize(e.what());
    rec.r2_omega = rec.r2_beta = rec.r2_mean = rec.ev_omega = rec.ev_beta = std::nan("");
  } catch (const Error& e) {
    rec.status = CellStatus::failed;
    rec.message = sanitize(e.what());
  }
  return rec;
}

ExperimentRecord failed_record(const ExperimentConfig& cfg, const std::string& why,
                               CellStatus status = CellStatus::failed) {
  ExperimentRecord rec;
  rec.config = cfg;
  rec.status = status;
  rec.message = sanitize(why);
  if (status == CellStatus::degenerate) {
    rec.r2_omega = rec.r2_beta = rec.r2_mean = rec.ev_omega = rec.ev_beta = std::nan("");
  }
  return rec;
}

// one model fit shared by every cell of the group
std::vector<ExperimentRecord> run_group(const std::vector<ExperimentConfig>& cells,
                                        DatasetCache& cache, const RunOptions& opts) {
  std::vector<ExperimentRecord> out;
  const ExperimentConfig& head = cells.front();
  try {
    const DatasetCache::Entry& e = cache.get(head.track, head.scenario, head.seed);
    const auto train = training_set(e, head);
    const GpSettings& gs = cache.config().gp;
    ErrorFitOptions fo;
    fo.budget = gs.budget;
    fo.restarts = gs.restarts;
    fo.noise_floor = gs.noise_floor;
    fo.initial_noise2 = gs.initial_noise2;
    fo.seed = head.seed;
    const ErrorGP eg = fit_error_model(train, head.combo, SizeFraction::full, fo);
    for (const auto& cfg : cells) out.push_back(evaluate_cell(cfg, eg, train.size(), cache, opts));
  } catch (const ConstantTarget& e) {
    for (const auto& cfg : cells) out.push_back(failed_record(cfg, e.what(), CellStatus::degenerate));
  } catch (const Error& e) {
    for (const auto& cfg : cells) out.push_back(failed_record(cfg, e.what()));
  }
  return out;
}

auto train_key(const ExperimentConfig& c) {
  return std::tuple(c.track, c.scenario, c.size, c.combo, c.subset, c.seed);
}

}  // namespace

std::string ExperimentConfig::id() const {
  return track + "/" + scenario.flag() + "/" + std::string(to_string(size)) + "/" + combo + "/" +
         subset + "/" + test + "/" + std::to_string(seed);
}

bool operator<(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto key = [](const ExperimentConfig& c) {
    return std::tuple(c.track, c.scenario, c.size, combo_order(c.combo), c.combo, c.subset, c.test,
                      c.seed);
  };
  return key(a) < key(b);
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::degenerate: return "degenerate";
    case CellStatus::failed: return "failed";
  }
  return "failed";
}

CellStatus cell_status_from_string(std::string_view text) {
  if (text == "ok") return CellStatus::ok;
  if (text == "degenerate") return CellStatus::degenerate;
  if (text == "failed") return CellStatus::failed;
  throw Error("unknown cell status '" + std::string(text) + "'");
}

bool ExperimentRecord::same_result(const ExperimentRecord& o) const {
  return config == o.config && status == o.status && message == o.message &&
         same_double(rmse_omega, o.rmse_omega) && same_double(rmse_beta, o.rmse_beta) &&
         same_double(r2_omega, o.r2_omega) && same_double(r2_beta, o.r2_beta) &&
         same_double(r2_mean, o.r2_mean) && same_double(ev_omega, o.ev_omega) &&
         same_double(ev_beta, o.ev_beta) && same_double(std_ratio, o.std_ratio) &&
         high_uncertainty == o.high_uncertainty && n_train == o.n_train && n_test == o.n_test;
}

DatasetCache::DatasetCache(RunConfig cfg) : cfg_(std::move(cfg)) {}

const DatasetCache::Entry& DatasetCache::get(const std::string& track, const Scenario& scenario,
                                             std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  const Key key{track, scenario, seed};
  if (auto it = entries_.find(key); it != entries_.end()) return *it->second;

  auto tit = tracks_.find(track);
  if (tit == tracks_.end()) tit = tracks_.emplace(track, load_track(cfg_.track_path(track))).first;
  ScenarioSetup setup;
  setup.profile = cfg_.profile;
  setup.spacing = cfg_.spacing;
  if (auto rl = cfg_.raceline_for(track); !rl.empty()) setup.raceline_path = rl;

  auto e = std::make_unique<Entry>();
  e->track = tit->second;
  e->line = scenario_refline(e->track, scenario, setup);
  e->sectors = split_sectors(e->line);
  e->data = collect_train_test(e->track, scenario, setup, cfg_.vehicle, cfg_.controller, seed);
  e->train_errors = compute_errors(e->data.train, cfg_.vehicle);
  e->test_errors = compute_errors(e->data.test, cfg_.vehicle);
  return *entries_.emplace(key, std::move(e)).first->second;
}

void DatasetCache::prepare(const std::vector<ExperimentConfig>& cells) {
  for (const auto& cfg : cells) {
    for (const auto& [track, scenario] : needed(cfg)) {
      try {
        get(track, scenario, cfg.seed);
      } catch (const Error&) {
        // reported per cell when the cell asks again
      }
    }
  }
}

std::vector<ErrorSample> training_set(const DatasetCache::Entry& e, const ExperimentConfig& cfg) {
  if (cfg.subset == "full") return downsample(e.train_errors, cfg.size);
  const Sector& sec = resolve_sector(e, cfg.subset);
  return downsample(sector_subset(e.data.train, e.train_errors, sec, e.line), cfg.size);
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, DatasetCache& cache,
                                const RunOptions& opts) {
  return run_group({cfg}, cache, opts).front();
}

std::vector<ExperimentRecord> run_experiments(std::vector<ExperimentConfig> cells,
                                              DatasetCache& cache, int parallel,
                                              const RunOptions& opts) {
  std::sort(cells.begin(), cells.end());
  for (auto& c : cells) {
    try {
      c.combo = canonical_combo(c.combo);
    } catch (const UnknownCombo&) {
      // left as is; the cell fails with the parser's message
    }
  }
  cache.prepare(cells);

  std::vector<std::vector<ExperimentConfig>> groups;
  for (const auto& c : cells) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return train_key(g.front()) == train_key(c); });
    if (it == groups.end()) {
      groups.push_back({c});
    } else {
      it->push_back(c);
    }
  }

  std::vector<std::vector<ExperimentRecord>> results(groups.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < groups.size(); i = next++) {
      results[i] = run_group(groups[i], cache, opts);
    }
  };
  const int n_workers = std::clamp(parallel, 1, static_cast<int>(std::max<std::size_t>(groups.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<ExperimentRecord> out;
  for (auto& g : results) {
    for (auto& r : g) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ExperimentRecord& a, const ExperimentRecord& b) { return a.config < b.config; });
  return out;
}

std::vector<ExperimentConfig> expand_matrix(const MatrixSpec& spec, std::uint64_t seed) {
  std::vector<std::string> combos = spec.combos;
  if (combos.empty()) combos.assign(study_combos().begin(), study_combos().end());
  std::vector<ExperimentConfig> out;
  for (const auto& track : spec.tracks) {
    for (const auto& sc : spec.scenarios) {
      const Scenario scenario = Scenario::parse(sc);
      for (const auto& size : spec.sizes) {
        const SizeFraction f = size_fraction_from_string(size);
        for (const auto& combo : combos) {
          const std::string name = canonical_combo(combo);
          for (const auto& subset : spec.subsets) {
            for (const auto& test : spec.tests) {
              out.push_back({track, scenario, f, name, subset, test, seed});
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<ExperimentRecord> run_matrix(const MatrixSpec& spec, DatasetCache& cache, int parallel,
                                         const RunOptions& opts) {
  return run_experiments(expand_matrix(spec, cache.config().seed), cache, parallel, opts);
}

int KernelRanking::rank_of(const std::string& combo) const {
  const auto it = std::find(order.begin(), order.end(), combo);
  return it == order.end() ? 0 : static_cast<int>(it - order.begin()) + 1;
}

std::vector<KernelRanking> rank_kernels(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<std::string, Scenario, SizeFraction, std::string, std::string>;
  std::map<Key, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) {
    const auto& c = r.config;
    groups[Key{c.track, c.scenario, c.size, c.subset, c.test}].push_back(&r);
  }

  std::optional<std::set<std::string>> combos;
  std::vector<KernelRanking> out;
  for (auto& [key, recs] : groups) {
    std::set<std::string> here;
    for (const auto* r : recs) here.insert(r->config.combo);
    if (combos && *combos != here) {
      throw IncompleteMatrix("combo sets differ between " + std::get<0>(key) + "/" +
                             std::get<1>(key).flag() + "/" +
                             std::string(to_string(std::get<2>(key))) + " and earlier keys");
    }
    combos = here;

    const auto score = [](const ExperimentRecord* r) {
      return r->status == CellStatus::ok && std::isfinite(r->r2_mean)
                 ? r->r2_mean
                 : -std::numeric_limits<double>::infinity();
    };
    std::stable_sort(recs.begin(), recs.end(), [&](const ExperimentRecord* a, const ExperimentRecord* b) {
      const double sa = score(a), sb = score(b);
      if (sa != sb) return sa > sb;
      return a->train_time_s < b->train_time_s;
    });
    KernelRanking kr;
    std::tie(kr.track, kr.scenario, kr.size, kr.subset, kr.test) = key;
    for (const auto* r : recs) {
      kr.order.push_back(r->config.combo);
      kr.r2_mean.push_back(r->r2_mean);
    }
    out.push_back(std::move(kr));
  }
  return out;
}

std::vector<ExperimentRecord> cross_track(const CrossTrackSpec& spec, DatasetCache& cache,
                                          int parallel, std::uint64_t seed) {
  std::vector<ExperimentConfig> cells;
  for (const auto& sc : spec.scenarios) {
    for (const auto& test_track : spec.test_tracks) {
      ExperimentConfig c;
      c.track = spec.train_track;
      c.scenario = Scenario::parse(sc);
      c.size = spec.size;
      c.combo = spec.combo;
      c.subset = spec.subset;
      c.test = test_track == spec.train_track ? "same" : "track:" + test_track;
      c.seed = seed;
      cells.push_back(std::move(c));
    }
  }
  return run_experiments(std::move(cells), cache, parallel);
}

}  // namespace racegp
