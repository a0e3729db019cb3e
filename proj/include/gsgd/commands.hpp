#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gsgd/config.hpp"
#include "gsgd/data.hpp"
#include "gsgd/engine.hpp"
#include "gsgd/stats.hpp"

namespace gsgd::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitPartialSuite = 4;

// Reads cfg.dataset with the configured schema, then applies the IQR filter
// when cfg.iqr_factor is set.
Dataset load_experiment_dataset(const ExperimentConfig& cfg);

struct ExperimentOutcome {
  std::vector<engine::RunResult> runs;
  std::vector<double> accuracies;     // percent; NaN for divergent runs
  std::vector<std::size_t> divergent;  // run indices
  stats::StatsSummary summary;         // over the non-divergent runs
};

// cfg.runs repetitions; run i uses seed cfg.seed + i for its split,
// initial weights, batch order and latencies. `keep_runs` retains the full
// RunResult of each run (otherwise only accuracies are kept).
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const Dataset& ds,
                                 bool keep_runs = true);

// Writes config.txt, run_NNN.txt, run_NNN_metrics.csv, accuracies.csv and
// summary.txt under cfg.out.
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);

// Suite file: "key = value" lines. `dataset.NAME = path[|filter=F][|header=1]
// [|label=N]` adds a dataset (paths relative to the suite file),
// `algorithms = a,b,...` picks the algorithms, any other key overrides `base`.
// `overrides` (command-line settings) are applied last.
// Writes results.csv, wins.csv and accuracies.csv under the output directory.
using Settings = std::vector<std::pair<std::string, std::string>>;
int cmd_bench(const std::filesystem::path& suite, ExperimentConfig base, const Settings& overrides,
              std::ostream& log);

struct SweepRow {
  std::size_t rho = 0;
  engine::Mode mode = engine::Mode::sequential;
  std::size_t workers = 1;
  ExperimentOutcome outcome;
};

// rho = 0 runs sequential unguided SGD; any other rho runs cfg.algorithm
// with that rho and c = rho workers.
std::vector<SweepRow> sweep_rho(const ExperimentConfig& cfg, const Dataset& ds,
                                const std::vector<std::size_t>& rho_values);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

// Writes sweep.csv under cfg.out.
int cmd_sweep_rho(const ExperimentConfig& cfg, const std::vector<std::size_t>& rho_values,
                  std::ostream& log);

// Filters `input` once and writes `output`; prints the removed-row count.
int cmd_filter(const std::filesystem::path& input, const std::filesystem::path& output,
               double factor, const CsvSchema& schema, std::ostream& log);

}  // namespace gsgd::cli
