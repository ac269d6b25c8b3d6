#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "racegp/csv.hpp"
#include "racegp/errors.hpp"
#include "racegp/experiment.hpp"
#include "racegp/report.hpp"
#include "support.hpp"

using namespace racegp;

namespace {

ExperimentRecord fake(const std::string& combo, double r2, const std::string& track = "t") {
  ExperimentRecord r;
  r.config.track = track;
  r.config.combo = combo;
  r.r2_mean = r2;
  return r;
}

}  // namespace

TEST_CASE("matrix expansion") {
  MatrixSpec spec;
  spec.tracks = {"a"};
  CHECK(expand_matrix(spec, 0).size() == 144);
  spec.tracks = {"a", "b", "c"};
  CHECK(expand_matrix(spec, 0).size() == 432);
  spec.combos = {"rq+lin"};
  spec.sizes = {"full"};
  spec.scenarios = {"ra-noncap"};
  const auto cells = expand_matrix(spec, 9);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].combo == "RQ+LIN");
  CHECK(cells[0].seed == 9);
  spec.combos = {"nope"};
  CHECK_THROWS_AS(expand_matrix(spec, 0), UnknownCombo);
}

TEST_CASE("config ordering and ids") {
  ExperimentConfig a, b;
  a.track = b.track = "x";
  a.combo = "RBF+PER";
  b.combo = "RQ*MAT";
  CHECK(a < b);
  CHECK_FALSE(b < a);
  CHECK(a.id() == "x/ra-noncap/full/RBF+PER/full/same/0");
  CHECK(cell_status_from_string(to_string(CellStatus::degenerate)) == CellStatus::degenerate);
}

TEST_CASE("kernel ranking") {
  SUBCASE("dominant combo wins everywhere") {
    std::vector<ExperimentRecord> recs;
    for (const char* t : {"a", "b"}) {
      recs.push_back(fake("RBF+PER", 0.5, t));
      recs.push_back(fake("RQ+LIN", 0.9, t));
      recs.push_back(fake("MAT*LIN", 0.7, t));
    }
    const auto rk = rank_kernels(recs);
    REQUIRE(rk.size() == 2);
    for (const auto& k : rk) {
      CHECK(k.best() == "RQ+LIN");
      CHECK(k.rank_of("MAT*LIN") == 2);
      CHECK(k.rank_of("RBF*RQ") == 0);
    }
  }
  SUBCASE("single record per key") {
    const auto rk = rank_kernels({fake("RBF*RQ", 0.1)});
    CHECK(rk.at(0).best() == "RBF*RQ");
  }
  SUBCASE("failed cells rank last") {
    auto bad = fake("RQ+LIN", 0.99);
    bad.status = CellStatus::failed;
    const auto rk = rank_kernels({bad, fake("RBF+LIN", -3.0)});
    CHECK(rk.at(0).best() == "RBF+LIN");
  }
  SUBCASE("incomplete matrix") {
    CHECK_THROWS_AS(rank_kernels({fake("RQ+LIN", 0.9, "a"), fake("RBF+LIN", 0.9, "b")}),
                    IncompleteMatrix);
  }
}

TEST_CASE("running cells") {
  testing::TempDir dir("experiment");
  DatasetCache cache(testing::small_config(dir.path()));

  ExperimentConfig cfg;
  cfg.track = "oval";
  cfg.size = SizeFraction::third;

  SUBCASE("same-track cell") {
    const auto rec = run_experiment(cfg, cache, {.keep_series = true});
    CHECK(rec.status == CellStatus::ok);
    CHECK(rec.n_train > 100);
    CHECK(rec.n_test > 300);
    CHECK(std::isfinite(rec.r2_mean));
    CHECK(rec.r2_mean == doctest::Approx(0.5 * (rec.r2_omega + rec.r2_beta)));
    REQUIRE(rec.series);
    CHECK(rec.series->true_omega.size() == rec.n_test);

    const auto again = run_experiment(cfg, cache);
    CHECK(again.same_result(rec));
  }
  SUBCASE("sector subsets") {
    std::size_t total = 0;
    for (const char* s : {"1", "2", "3"}) {
      cfg.subset = s;
      const auto rec = run_experiment(cfg, cache);
      CHECK(rec.status != CellStatus::failed);
      total += rec.n_train;
    }
    cfg.subset = "full";
    // thirds of a downsampled lap, each downsampled separately
    CHECK(total >= run_experiment(cfg, cache).n_train - 3);
    cfg.subset = "curvy";
    CHECK(run_experiment(cfg, cache).status != CellStatus::failed);
    cfg.subset = "9";
    const auto rec = run_experiment(cfg, cache);
    CHECK(rec.status == CellStatus::failed);
    CHECK(rec.message.find("subset") != std::string::npos);
  }
  SUBCASE("unknown track fails the cell") {
    cfg.track = "missing";
    const auto rec = run_experiment(cfg, cache);
    CHECK(rec.status == CellStatus::failed);
    CHECK(rec.message.find(',') == std::string::npos);
  }
  SUBCASE("parallel runs match serial runs") {
    std::vector<ExperimentConfig> cells;
    for (const char* combo : {"RQ+LIN", "RBF*RQ", "MAT+PER"}) {
      for (const char* test : {"same", "track:wide"}) {
        ExperimentConfig c = cfg;
        c.combo = combo;
        c.test = test;
        cells.push_back(c);
      }
    }
    const auto serial = run_experiments(cells, cache, 1);
    std::reverse(cells.begin(), cells.end());
    const auto parallel = run_experiments(cells, cache, 3);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].same_result(parallel[i]));
    for (std::size_t i = 1; i < serial.size(); ++i) CHECK_FALSE(serial[i].config < serial[i - 1].config);
  }
  SUBCASE("cross track") {
    CrossTrackSpec spec;
    spec.train_track = "oval";
    spec.test_tracks = {"oval", "wide"};
    spec.scenarios = {"ra-noncap"};
    spec.size = SizeFraction::third;
    const auto recs = cross_track(spec, cache, 1, 0);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].config.test == "same");
    CHECK(recs[1].config.test == "track:wide");

    ExperimentConfig same = recs[0].config;
    CHECK(run_experiment(same, cache).same_result(recs[0]));
  }
  SUBCASE("all scenarios as the test set") {
    cfg.test = "all-scenarios";
    const auto rec = run_experiment(cfg, cache);
    CHECK(rec.status == CellStatus::ok);
    cfg.test = "same";
    CHECK(rec.n_test > 3 * run_experiment(cfg, cache).n_test);
  }
}

TEST_CASE("records CSV and summary") {
  const Provenance prov{4, "00ff", "0.1.0"};
  SUBCASE("empty list") {
    const std::string csv = records_to_csv({}, prov);
    CHECK(records_from_csv(csv).empty());
    CHECK(summary_json({}, prov).find("\"records\": 0") != std::string::npos);
  }
  SUBCASE("round trip") {
    std::vector<ExperimentRecord> recs;
    for (int i = 0; i < 5; ++i) {
      auto r = fake(i % 2 ? "RQ+LIN" : "RBF*RQ", 0.1 * i + 1.0 / 3.0);
      r.config.scenario = Scenario::all()[i % 4];
      r.config.subset = "curvy";
      r.config.test = "track:b";
      r.rmse_omega = 1e-3 / (i + 1);
      r.std_ratio = 0.7;
      r.n_train = 100 + i;
      r.train_time_s = 1.25;
      recs.push_back(r);
    }
    recs[3].status = CellStatus::degenerate;
    recs[3].r2_omega = std::nan("");
    recs[3].message = "constant target";
    const auto back = records_from_csv(records_to_csv(recs, prov));
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].same_result(recs[i]));
      CHECK(back[i].train_time_s == recs[i].train_time_s);
    }
  }
  SUBCASE("row count") {
    std::vector<ExperimentRecord> recs(432, fake("RQ+LIN", 0.5));
    const std::string csv = records_to_csv(recs, prov);
    std::size_t rows = 0;
    for (const auto line : split_lines(csv)) rows += !line.starts_with("#");
    CHECK(rows == 433);
  }
  SUBCASE("malformed rows") {
    std::string csv = records_to_csv({fake("RQ+LIN", 0.5)}, prov);
    csv += "a,b\n";
    CHECK_THROWS_AS(records_from_csv(csv), ParseError);
    CHECK_THROWS_AS(records_from_csv("x,y\n"), ParseError);
  }
  SUBCASE("files") {
    testing::TempDir dir("report");
    auto r = fake("RQ+LIN", 0.5);
    auto series = std::make_shared<PredictionSeries>();
    series->t = {0.0, 1.0 / 60};
    series->true_omega = series->mean_omega = series->std_omega = {0.1, 0.2};
    series->true_beta = series->mean_beta = series->std_beta = {0.01, 0.02};
    r.series = series;
    const auto written = write_report({r}, dir.path(), prov);
    CHECK(written.size() == 3);
    for (const auto& p : written) CHECK(std::filesystem::exists(p));
    CHECK(read_records_csv(dir.path() / "records.csv").size() == 1);
  }
}
