#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gsgd/commands.hpp"
#include "test_support.hpp"

using namespace gsgd;
using namespace gsgd::cli;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = GSGD_FIXTURE_DIR;
const std::string kCli = GSGD_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_blobs(const fs::path& dir, const std::string& name, std::uint64_t seed,
                     double separation = 6.0) {
  const auto ds = testing::make_blobs(seed, 30, 2, 2, separation, 0.5);
  const fs::path p = dir / name;
  data::write_csv(ds, p);
  return p;
}

ExperimentConfig small(const fs::path& dataset, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.dataset = dataset.string();
  cfg.out = out.string();
  cfg.runs = 3;
  cfg.epochs = 5;
  cfg.rho = 4;
  return cfg;
}

// Value of `key = value` in a key-value file.
std::string lookup(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return {};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("one run on separable data") {
  testing::TempDir tmp("run1");
  auto cfg = small(write_blobs(tmp.path(), "sep.csv", 1), tmp.path() / "out");
  cfg.runs = 1;
  cfg.epochs = 20;
  std::ostringstream log;
  CHECK(cmd_run(cfg, log) == kExitOk);
  const fs::path out = tmp.path() / "out";
  CHECK(fs::exists(out / "run_000.txt"));
  CHECK(fs::exists(out / "run_000_metrics.csv"));
  CHECK_FALSE(fs::exists(out / "run_001.txt"));
  const std::string summary = slurp(out / "summary.txt");
  CHECK(lookup(summary, "best") == lookup(summary, "mean"));
  CHECK(lookup(summary, "runs") == "1");
  const std::string metrics = slurp(out / "run_000_metrics.csv");
  CHECK(metrics.rfind("epoch,train_loss,val_loss,val_accuracy,updates,replays,mean_staleness\n", 0) == 0);
}

TEST_CASE("echoed config reproduces the run") {
  testing::TempDir tmp("echo");
  auto cfg = small(write_blobs(tmp.path(), "d.csv", 2, 1.0), tmp.path() / "a");
  cfg.algorithm = Algorithm::gasgd;
  cfg.latency = parse_latency("0:3");
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, log) == kExitOk);

  ExperimentConfig again;
  load_config_file(tmp.path() / "a" / "config.txt", again);
  again.out = (tmp.path() / "b").string();
  REQUIRE(cmd_run(again, log) == kExitOk);
  for (const char* f : {"accuracies.csv", "run_000_metrics.csv", "run_002_metrics.csv"}) {
    CHECK(slurp(tmp.path() / "a" / f) == slurp(tmp.path() / "b" / f));
  }
  CHECK(lookup(slurp(tmp.path() / "a" / "summary.txt"), "mean") ==
        lookup(slurp(tmp.path() / "b" / "summary.txt"), "mean"));
}

TEST_CASE("missing dataset is a config error") {
  testing::TempDir tmp("missing");
  std::ostringstream log;
  CHECK(cmd_run(small(tmp.path() / "nope.csv", tmp.path()), log) == kExitConfig);
  CHECK(log.str().find("nope.csv") != std::string::npos);
}

TEST_CASE("divergent runs exit 3 and are listed") {
  testing::TempDir tmp("diverge");
  Dataset ds = testing::make_blobs(3, 20, 2, 2);
  // Scrambled labels so no initial weights classify every batch correctly.
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    ds.examples[i].label = (i / 3) % 2;
    for (double& x : ds.examples[i].features) x *= 1e200;
  }
  data::write_csv(ds, tmp.path() / "huge.csv");
  auto cfg = small(tmp.path() / "huge.csv", tmp.path() / "out");
  cfg.eta = 1e200;
  std::ostringstream log;
  CHECK(cmd_run(cfg, log) == kExitDivergence);
  CHECK(lookup(slurp(tmp.path() / "out" / "summary.txt"), "divergent_runs") == "0,1,2");
}

TEST_CASE("bench over two datasets and two algorithms") {
  testing::TempDir tmp("bench");
  write_blobs(tmp.path(), "a.csv", 4, 1.0);
  write_blobs(tmp.path(), "b.csv", 5, 1.5);
  {
    std::ofstream suite(tmp.path() / "s.suite");
    suite << "algorithms = sgd, gsgd\nruns = 4\nepochs = 3\nrho = 4\n"
          << "out = " << (tmp.path() / "out").string() << "\n"
          << "dataset.alpha = a.csv\n"
          << "dataset.beta = b.csv|filter=3\n";
  }
  std::ostringstream log;
  CHECK(cmd_bench(tmp.path() / "s.suite", {}, {}, log) == kExitOk);
  const std::string results = slurp(tmp.path() / "out" / "results.csv");
  std::istringstream in(results);
  std::string line;
  std::getline(in, line);
  CHECK(line == "dataset,algorithm,status,runs,diverged,best,mean,tolerance,q1,q3,pair,p_value,insignificant");
  int rows = 0, with_p = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find(",ok,4,") != std::string::npos);
    if (line.find(",sgd,") != std::string::npos || line.find(",gsgd,") != std::string::npos) ++with_p;
  }
  CHECK(rows == 4);
  CHECK(with_p == 4);
  const std::string wins = slurp(tmp.path() / "out" / "wins.csv");
  CHECK(wins.find("sgd,gsgd,") != std::string::npos);
  CHECK(wins.find(",2\n") != std::string::npos);
}

TEST_CASE("bench marks a missing dataset and keeps going") {
  testing::TempDir tmp("bench_fail");
  write_blobs(tmp.path(), "a.csv", 6);
  {
    std::ofstream suite(tmp.path() / "s.suite");
    suite << "algorithms = ssgd,gssgd\nruns = 2\nepochs = 2\nrho = 2\n"
          << "dataset.good = a.csv\ndataset.bad = missing.csv\n";
  }
  std::ostringstream log;
  CHECK(cmd_bench(tmp.path() / "s.suite", {}, {{"out", (tmp.path() / "o").string()}}, log) ==
        kExitPartialSuite);
  const std::string results = slurp(tmp.path() / "o" / "results.csv");
  CHECK(results.find("bad,ssgd,failed") != std::string::npos);
  CHECK(results.find("good,gssgd,ok") != std::string::npos);
}

TEST_CASE("command-line settings override the suite") {
  testing::TempDir tmp("bench_override");
  write_blobs(tmp.path(), "a.csv", 7);
  {
    std::ofstream suite(tmp.path() / "s.suite");
    suite << "algorithms = sgd\nruns = 5\nepochs = 2\ndataset.a = a.csv\n";
  }
  std::ostringstream log;
  REQUIRE(cmd_bench(tmp.path() / "s.suite", {}, {{"runs", "2"}, {"out", (tmp.path() / "o").string()}},
                    log) == kExitOk);
  CHECK(slurp(tmp.path() / "o" / "results.csv").find("a,sgd,ok,2,") != std::string::npos);
}

TEST_CASE("rho sweep") {
  testing::TempDir tmp("sweep");
  auto cfg = small(write_blobs(tmp.path(), "d.csv", 8, 1.0), tmp.path() / "out");
  cfg.algorithm = Algorithm::gssgd;
  SUBCASE("rho = 0 alone is one sequential row") {
    const auto ds = load_experiment_dataset(cfg);
    const auto rows = sweep_rho(cfg, ds, {0});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mode == engine::Mode::sequential);
    CHECK(rows[0].workers == 1);
  }
  SUBCASE("csv rows and determinism") {
    std::ostringstream log;
    REQUIRE(cmd_sweep_rho(cfg, {0, 2, 4}, log) == kExitOk);
    const std::string first = slurp(tmp.path() / "out" / "sweep.csv");
    REQUIRE(cmd_sweep_rho(cfg, {0, 2, 4}, log) == kExitOk);
    CHECK(slurp(tmp.path() / "out" / "sweep.csv") == first);
    CHECK(first.rfind("rho,mode,workers,runs,mean,mean_trimmed,best,tolerance\n0,sequential,1,3,", 0) == 0);
    CHECK(first.find("\n4,sync,4,3,") != std::string::npos);
  }
}

TEST_CASE("filter command") {
  testing::TempDir tmp("filter");
  std::ostringstream log;
  SUBCASE("hand-built outlier") {
    CHECK(cmd_filter(kFixtures + "/iqr_single_outlier.csv", tmp.path() / "f.csv", 3.0, {}, log) ==
          kExitOk);
    CHECK(log.str().find("removed 1 of 10") != std::string::npos);
    CHECK(data::load_csv(tmp.path() / "f.csv").size() == 9);
  }
  SUBCASE("huge factor removes nothing") {
    CHECK(cmd_filter(kFixtures + "/iqr_single_outlier.csv", tmp.path() / "f.csv", 1e9, {}, log) ==
          kExitOk);
    CHECK(log.str().find("removed 0 of 10") != std::string::npos);
  }
  SUBCASE("header is preserved") {
    CsvSchema schema;
    schema.has_header = true;
    CHECK(cmd_filter(kFixtures + "/iqr_two_sided.csv", tmp.path() / "f.csv", 3.0, schema, log) ==
          kExitOk);
    CHECK(slurp(tmp.path() / "f.csv").rfind("f0,f1,class\n", 0) == 0);
  }
  SUBCASE("unreadable input") {
    CHECK(cmd_filter(tmp.path() / "none.csv", tmp.path() / "f.csv", 3.0, {}, log) == kExitConfig);
  }
}

TEST_CASE("cli exit codes") {
  testing::TempDir tmp("cli");
  const fs::path data = write_blobs(tmp.path(), "d.csv", 9);
  const fs::path log = tmp.path() / "log.txt";
  SUBCASE("invalid algorithm names the flag") {
    CHECK(run_cli("run --algo sgdx --dataset " + data.string(), log) == kExitConfig);
    CHECK(slurp(log).find("--algo") != std::string::npos);
  }
  SUBCASE("valid run") {
    CHECK(run_cli("run --algo gsgd --runs 2 --epochs 2 --dataset " + data.string() + " --out " +
                      (tmp.path() / "o").string(),
                  log) == kExitOk);
    CHECK(fs::exists(tmp.path() / "o" / "summary.txt"));
  }
  SUBCASE("flags beat the config file") {
    {
      std::ofstream c(tmp.path() / "c.txt");
      c << "runs = 4\nepochs = 2\ndataset = " << data.string() << "\nout = "
        << (tmp.path() / "o").string() << "\n";
    }
    CHECK(run_cli("run --config " + (tmp.path() / "c.txt").string() + " --runs 2", log) == kExitOk);
    CHECK(lookup(slurp(tmp.path() / "o" / "summary.txt"), "runs") == "2");
  }
  SUBCASE("filter") {
    CHECK(run_cli("filter --input " + kFixtures + "/iqr_single_outlier.csv --output " +
                      (tmp.path() / "f.csv").string(),
                  log) == kExitOk);
    CHECK(slurp(log).find("removed 1") != std::string::npos);
  }
  SUBCASE("no subcommand") {
    CHECK(run_cli("", log) == kExitConfig);
  }
}
