// gsgd: run, benchmark and sweep guided SGD experiments; filter datasets.

#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsgd/commands.hpp"
#include "gsgd/config.hpp"
#include "gsgd/errors.hpp"

namespace {

using gsgd::cli::ExperimentConfig;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

constexpr Flag kValueFlags[] = {
    {"--dataset", "dataset", "CSV file, label in the last column unless --label-column"},
    {"--algo", "algo", "sgd gsgd ssgd gssgd asgd gasgd srmsprop gsrmsprop sadagrad gsadagrad"},
    {"--runs", "runs", "seeded repetitions (default 30)"},
    {"--epochs", "epochs", "passes over the training split (default 50)"},
    {"--max-updates", "max_updates", "hard cap on applied gradients"},
    {"--eta", "eta", "learning rate (default 0.2)"},
    {"--rho", "rho", "delay tolerance (default 10)"},
    {"--workers", "workers", "parallel workers (default: rho)"},
    {"--batch-size", "batch_size", "mini-batch size (default 10)"},
    {"--replay-cap", "replay_cap", "batches replayed per window (default 4)"},
    {"--seed", "seed", "base seed; run i uses seed + i"},
    {"--scheduler", "scheduler", "simulated | concurrent"},
    {"--latency", "latency", "lo:hi ticks, or a comma list of per-worker lo:hi"},
    {"--out", "out", "output directory"},
    {"--rmsprop-init", "rmsprop_init", "paper | square"},
    {"--rank-by", "rank_by", "verif | self"},
    {"--label-column", "label_column", "zero-based label column, negative counts from the end"},
    {"--iqr-factor", "iqr_factor", "IQR outlier filter factor applied before splitting"},
    {"--test-fraction", "test_fraction", "held-out test share (default 0.2)"},
    {"--validation-fraction", "validation_fraction", "verification share of the pool (default 0.2)"},
};

struct ExperimentFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;
  bool stratify = false;
  bool header = false;
  CLI::Option* stratify_opt = nullptr;
  CLI::Option* header_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file (CLI flags win)");
    for (const Flag& f : kValueFlags) {
      options[f.key] = app->add_option(f.name, values[f.key], f.help);
    }
    stratify_opt = app->add_flag("--stratify", stratify, "class-stratified split");
    header_opt = app->add_flag("--header", header, "dataset has a header row");
  }

  // Explicit flags as config keys, each checked against a scratch config so
  // errors name the flag.
  gsgd::cli::Settings settings() const {
    gsgd::cli::Settings out;
    ExperimentConfig scratch;
    for (const Flag& f : kValueFlags) {
      if (options.at(f.key)->count() == 0) continue;
      try {
        gsgd::cli::apply_setting(scratch, f.key, values.at(f.key));
      } catch (const gsgd::ConfigError& e) {
        throw gsgd::ConfigError(std::string(f.name) + ": " + e.what());
      }
      out.emplace_back(f.key, values.at(f.key));
    }
    if (stratify_opt->count()) out.emplace_back("stratify", stratify ? "true" : "false");
    if (header_opt->count()) out.emplace_back("header", header ? "true" : "false");
    return out;
  }

  ExperimentConfig base() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) gsgd::cli::load_config_file(config_path, cfg);
    return cfg;
  }

  // Defaults, then the config file, then explicit flags.
  ExperimentConfig resolve() const {
    ExperimentConfig cfg = base();
    for (const auto& [key, value] : settings()) gsgd::cli::apply_setting(cfg, key, value);
    return cfg;
  }
};

std::vector<std::size_t> parse_rho_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw gsgd::ConfigError("--rho-values: expected comma-separated integers, got '" + item + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided SGD experiments: sequential, synchronous and asynchronous parameter servers"};
  app.require_subcommand(1);

  ExperimentFlags run_flags, bench_flags, sweep_flags;

  auto* run = app.add_subcommand("run", "repeated seeded runs of one algorithm on one dataset");
  run_flags.attach(run);

  auto* bench = app.add_subcommand("bench", "datasets x algorithms comparison table");
  std::string suite;
  bench->add_option("--suite", suite, "suite file")->required();
  bench_flags.attach(bench);

  auto* sweep = app.add_subcommand("sweep-rho", "mean accuracy for each delay tolerance");
  std::string rho_values = "0,4,10";
  sweep->add_option("--rho-values", rho_values, "comma list; 0 means sequential SGD");
  sweep_flags.attach(sweep);

  auto* filter = app.add_subcommand("filter", "remove IQR outlier rows from a CSV");
  std::string input, output;
  double factor = 3.0;
  bool filter_header = false;
  int filter_label = -1;
  filter->add_option("--input", input, "source CSV")->required();
  filter->add_option("--output", output, "destination CSV")->required();
  filter->add_option("--factor", factor, "fence multiplier (default 3)");
  filter->add_flag("--header", filter_header, "input has a header row");
  filter->add_option("--label-column", filter_label, "zero-based label column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gsgd::cli::kExitConfig;
  }

  try {
    if (*run) return gsgd::cli::cmd_run(run_flags.resolve(), std::cout);
    if (*bench) {
      return gsgd::cli::cmd_bench(suite, bench_flags.base(), bench_flags.settings(), std::cout);
    }
    if (*sweep) {
      ExperimentConfig cfg = sweep_flags.resolve();
      if (!sweep_flags.options.at("algo")->count() && sweep_flags.config_path.empty()) {
        cfg.algorithm = gsgd::cli::Algorithm::gssgd;
      }
      return gsgd::cli::cmd_sweep_rho(cfg, parse_rho_list(rho_values), std::cout);
    }
    if (*filter) {
      gsgd::CsvSchema schema;
      schema.has_header = filter_header;
      schema.label_column = filter_label;
      return gsgd::cli::cmd_filter(input, output, factor, schema, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gsgd::cli::kExitConfig;
  }
  return gsgd::cli::kExitConfig;
}
