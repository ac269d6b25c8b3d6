#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "racegp/csv.hpp"
#include "racegp/report.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string(RACEGP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = fs::exists(log) ? racegp::read_text_file(log) : "";
  return r;
}

fs::path write_config(const fs::path& dir) {
  testing::small_config(dir);  // writes the track files
  racegp::write_text_file(dir / "run.yaml",
                          "tracks:\n  oval: oval.csv\n  wide: wide.csv\n"
                          "profile:\n  v_max: 6.0\n  v_cap: 5.0\n"
                          "gp:\n  budget: 15\n  restarts: 2\n");
  return dir / "run.yaml";
}

}  // namespace

TEST_CASE("cli usage errors") {
  testing::TempDir dir("cli_usage");
  auto r = run("--no-such-flag", dir.path());
  CHECK(r.code == 2);
  CHECK(r.output.find("--help") != std::string::npos);
  CHECK(run("", dir.path()).code == 2);
  CHECK(run("--help", dir.path()).code == 0);
  const auto cfg = write_config(dir.path());
  r = run("--config " + cfg.string() + " evaluate --track oval --scenario sideways", dir.path());
  CHECK(r.code == 2);
}

TEST_CASE("cli simulate is deterministic") {
  testing::TempDir dir("cli_sim");
  const auto cfg = write_config(dir.path());
  const std::string args =
      "--config " + cfg.string() + " --seed 7 simulate --track oval --scenario ce-cap --laps 2";
  REQUIRE(run("--out " + (dir.path() / "a").string() + " " + args, dir.path()).code == 0);
  REQUIRE(run("--out " + (dir.path() / "b").string() + " " + args, dir.path()).code == 0);
  const auto a = racegp::read_text_file(dir.path() / "a" / "datasets" / "oval_ce-cap_seed7.csv");
  const auto b = racegp::read_text_file(dir.path() / "b" / "datasets" / "oval_ce-cap_seed7.csv");
  CHECK(a == b);
  CHECK(a.size() > 1000);
}

TEST_CASE("cli matrix, report and train") {
  testing::TempDir dir("cli_matrix");
  const auto cfg = write_config(dir.path());
  const auto out = dir.path() / "out";
  const std::string base = "--config " + cfg.string() + " --out " + out.string();
  auto r = run(base + " matrix --tracks oval --scenarios ra-noncap --sizes third --combos rq+lin",
               dir.path());
  REQUIRE(r.code == 0);
  const auto recs = racegp::read_records_csv(out / "records.csv");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].config.combo == "RQ+LIN");
  CHECK(fs::exists(out / "summary.json"));

  r = run(base + " report --records " + (out / "records.csv").string(), dir.path());
  CHECK(r.code == 0);

  const auto model = dir.path() / "m.json";
  r = run(base + " train --track oval --size third --model " + model.string(), dir.path());
  CHECK(r.code == 0);
  CHECK(fs::exists(model));

  r = run(base + " raceline --track oval", dir.path());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "racelines" / "oval.csv"));
}
