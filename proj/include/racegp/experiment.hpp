#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "racegp/config.hpp"
#include "racegp/datagen.hpp"
#include "racegp/error_model.hpp"

namespace racegp {

struct ExperimentConfig {
  std::string track;
  Scenario scenario;
  SizeFraction size = SizeFraction::full;
  std::string combo = "RQ+LIN";
  std::string subset = "full";  // "full", "1".."3", "straight", "mild", "curvy"
  std::string test = "same";    // "same", "track:<name>", "all-scenarios"
  std::uint64_t seed = 0;

  /// Compact identifier, e.g. "circuit_a/ra-noncap/full/RQ+LIN/full/same/0".
  std::string id() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

bool operator<(const ExperimentConfig& a, const ExperimentConfig& b);

enum class CellStatus { ok, degenerate, failed };
std::string_view to_string(CellStatus s);
CellStatus cell_status_from_string(std::string_view text);

/// Predicted-vs-true series on the test set, kept only on request.
struct PredictionSeries {
  std::vector<double> t;
  std::vector<double> true_omega, mean_omega, std_omega;
  std::vector<double> true_beta, mean_beta, std_beta;
};

struct ExperimentRecord {
  ExperimentConfig config;
  CellStatus status = CellStatus::ok;
  std::string message;  // why a cell is degenerate or failed
  double train_time_s = 0.0;
  double rmse_omega = 0.0, rmse_beta = 0.0;
  double r2_omega = 0.0, r2_beta = 0.0, r2_mean = 0.0;
  double ev_omega = 0.0, ev_beta = 0.0;  // explained variance
  double std_ratio = 0.0;  // max over outputs of mean predictive std / target std
  bool high_uncertainty = false;
  std::size_t n_train = 0, n_test = 0;
  std::shared_ptr<const PredictionSeries> series;

  /// Equality on every field except train_time_s and series.
  bool same_result(const ExperimentRecord& other) const;
};

/// Simulated datasets per (track, scenario, seed), generated once. Lookups
/// after prepare() are read-only and safe from several threads.
class DatasetCache {
 public:
  struct Entry {
    Track track;
    RefLine line;
    std::array<Sector, 3> sectors;
    TrainTest data;
    std::vector<ErrorSample> train_errors;
    std::vector<ErrorSample> test_errors;
  };

  explicit DatasetCache(RunConfig cfg);

  const Entry& get(const std::string& track, const Scenario& scenario, std::uint64_t seed);
  void prepare(const std::vector<ExperimentConfig>& cells);
  const RunConfig& config() const { return cfg_; }

 private:
  using Key = std::tuple<std::string, Scenario, std::uint64_t>;
  RunConfig cfg_;
  std::mutex mutex_;
  std::map<Key, std::unique_ptr<Entry>> entries_;
  std::map<std::string, Track> tracks_;
};

struct RunOptions {
  bool keep_series = false;
};

/// Training set selected by size fraction and subset.
std::vector<ErrorSample> training_set(const DatasetCache::Entry& e, const ExperimentConfig& cfg);

/// Fit one ErrorGP and evaluate it on the test set named by cfg.test. Error
/// conditions become the record status instead of propagating.
ExperimentRecord run_experiment(const ExperimentConfig& cfg, DatasetCache& cache,
                                const RunOptions& opts = {});

/// Cells sharing a training set and combo reuse one fitted model. Results are
/// sorted by config and do not depend on the worker count.
std::vector<ExperimentRecord> run_experiments(std::vector<ExperimentConfig> cells,
                                              DatasetCache& cache, int parallel,
                                              const RunOptions& opts = {});

std::vector<ExperimentConfig> expand_matrix(const MatrixSpec& spec, std::uint64_t seed);

std::vector<ExperimentRecord> run_matrix(const MatrixSpec& spec, DatasetCache& cache, int parallel,
                                         const RunOptions& opts = {});

struct KernelRanking {
  std::string track;
  Scenario scenario;
  SizeFraction size = SizeFraction::full;
  std::string subset;
  std::string test;
  std::vector<std::string> order;  // best first
  std::vector<double> r2_mean;     // aligned with order
  const std::string& best() const { return order.front(); }
  /// 1-based rank of a combo, 0 if absent.
  int rank_of(const std::string& combo) const;
};

/// Per (track, scenario, size, subset, test) ordering of combos by r2_mean,
/// ties broken by lower training time; failed and degenerate cells rank last.
/// Throws IncompleteMatrix when the keys do not all cover the same combos.
std::vector<KernelRanking> rank_kernels(const std::vector<ExperimentRecord>& records);

struct CrossTrackSpec {
  std::string train_track;
  std::string subset = "curvy";
  std::vector<std::string> test_tracks;
  std::vector<std::string> scenarios{"ra-noncap", "ce-noncap", "ra-cap", "ce-cap"};
  std::string combo = "RQ+LIN";
  SizeFraction size = SizeFraction::full;
};

/// Sector-trained models evaluated on full laps of the listed tracks (the
/// training track itself gives the same-track reference).
std::vector<ExperimentRecord> cross_track(const CrossTrackSpec& spec, DatasetCache& cache,
                                          int parallel, std::uint64_t seed);

}  // namespace racegp
