#include "gsgd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "gsgd/errors.hpp"
#include "gsgd/report.hpp"

namespace gsgd::cli {
namespace fs = std::filesystem;

namespace {

constexpr double kSignificance = 0.05;
const std::string kDagger = "\xE2\x80\xA0";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string run_name(std::size_t i, std::string_view suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", i);
  return std::string(buf) + std::string(suffix);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

stats::StatsSummary summarize_finite(const std::vector<double>& acc) {
  std::vector<double> ok;
  for (double a : acc) {
    if (std::isfinite(a)) ok.push_back(a);
  }
  if (ok.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan, nan, 0};
  }
  return stats::summarize(ok);
}

// Pairs with both sides finite, by run index.
stats::WilcoxonResult paired_test(const std::vector<double>& a, const std::vector<double>& b,
                                  stats::Alternative alt = stats::Alternative::two_sided) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (std::isfinite(a[i]) && std::isfinite(b[i])) {
      x.push_back(a[i]);
      y.push_back(b[i]);
    }
  }
  return stats::wilcoxon_signed_rank(x, y, alt);
}

void write_accuracy_columns(std::ostream& out, const std::vector<std::string>& names,
                            const std::vector<const std::vector<double>*>& columns) {
  out << "run";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  std::size_t rows = 0;
  for (const auto* c : columns) rows = std::max(rows, c->size());
  for (std::size_t i = 0; i < rows; ++i) {
    out << i;
    for (const auto* c : columns) {
      out << ',';
      if (i < c->size()) out << report::num((*c)[i]);
    }
    out << '\n';
  }
}

}  // namespace

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("dataset: no dataset path given");
  if (!fs::exists(cfg.dataset)) throw ConfigError("dataset: file not found: " + cfg.dataset);
  Dataset ds = data::load_csv(cfg.dataset, csv_schema(cfg));
  if (cfg.iqr_factor) ds = data::iqr_filter(ds, *cfg.iqr_factor);
  return ds;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const Dataset& ds, bool keep_runs) {
  if (cfg.runs == 0) throw ConfigError("runs: must be at least 1");
  engine::validate(engine_config(cfg, cfg.seed));

  const auto n = static_cast<std::ptrdiff_t>(cfg.runs);
  std::vector<engine::RunResult> results(cfg.runs);
  std::vector<std::string> errors(cfg.runs);
  // Runs are independent; the concurrent scheduler brings its own threads.
  const bool parallel = cfg.scheduler == engine::SchedulerKind::simulated;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
      const data::Splits splits = data::split(ds, split_spec(cfg, seed));
      const engine::Problem problem = engine::make_problem(ds, splits);
      results[i] = engine::run(engine_config(cfg, seed), problem);
      if (!keep_runs) {
        results[i].log.clear();
        results[i].log.shrink_to_fit();
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ConfigError(e);
  }

  ExperimentOutcome out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.accuracies.push_back(results[i].diverged ? std::numeric_limits<double>::quiet_NaN()
                                                 : 100.0 * results[i].test_accuracy);
    if (results[i].diverged) out.divergent.push_back(i);
  }
  out.summary = summarize_finite(out.accuracies);
  if (keep_runs) out.runs = std::move(results);
  return out;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    const Dataset ds = load_experiment_dataset(cfg);
    const ExperimentOutcome outcome = run_experiment(cfg, ds);

    const fs::path dir = cfg.out;
    fs::create_directories(dir);
    open_out(dir / "config.txt") << serialize(cfg);
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
      auto run_file = open_out(dir / run_name(i, ".txt"));
      report::write_run(outcome.runs[i], run_file);
      auto metrics = open_out(dir / run_name(i, "_metrics.csv"));
      report::write_metrics_csv(outcome.runs[i], metrics);
    }
    {
      auto acc = open_out(dir / "accuracies.csv");
      acc << "run,seed,test_accuracy,diverged\n";
      for (std::size_t i = 0; i < outcome.accuracies.size(); ++i) {
        acc << i << ',' << cfg.seed + i << ',' << report::num(outcome.accuracies[i]) << ','
            << (outcome.runs[i].diverged ? "true" : "false") << '\n';
      }
    }
    auto summary = open_out(dir / "summary.txt");
    summary << "dataset = " << ds.name << '\n' << "algo = " << to_string(cfg.algorithm) << '\n';
    report::write_summary(outcome.summary, outcome.divergent, summary);

    log << to_string(cfg.algorithm) << " on " << ds.name << ": best " << report::num(outcome.summary.best)
        << ", mean " << report::num(outcome.summary.mean_trimmed) << " +/- "
        << report::num(outcome.summary.tolerance) << " over " << outcome.summary.n << " runs\n";
    if (!outcome.divergent.empty()) {
      log << outcome.divergent.size() << " run(s) diverged; see " << (dir / "summary.txt").string()
          << '\n';
      return kExitDivergence;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

namespace {

struct SuiteDataset {
  std::string name;
  ExperimentConfig cfg;
};

struct Suite {
  std::vector<SuiteDataset> datasets;
  std::vector<Algorithm> algorithms;
  ExperimentConfig base;
};

ExperimentConfig dataset_entry(const ExperimentConfig& base, std::string_view spec,
                               const fs::path& suite_dir, std::string_view name) {
  ExperimentConfig cfg = base;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= spec.size()) {
    const auto bar = spec.find('|', pos);
    const auto part = trim(spec.substr(pos, bar == std::string_view::npos ? bar : bar - pos));
    if (first) {
      const fs::path p(std::string{part});
      cfg.dataset = (p.is_absolute() ? p : suite_dir / p).lexically_normal().string();
      first = false;
    } else if (!part.empty()) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("dataset." + std::string(name) + ": expected option=value, got '" +
                          std::string(part) + "'");
      }
      const auto key = trim(part.substr(0, eq));
      const auto value = trim(part.substr(eq + 1));
      if (key == "filter") {
        apply_setting(cfg, "iqr_factor", value);
      } else if (key == "header") {
        apply_setting(cfg, "header", value);
      } else if (key == "label") {
        apply_setting(cfg, "label_column", value);
      } else {
        throw ConfigError("dataset." + std::string(name) + ": unknown option '" + std::string(key) +
                          "'");
      }
    }
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  return cfg;
}

Suite parse_suite(const fs::path& path, ExperimentConfig base, const Settings& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read suite file " + path.string());
  const fs::path dir = path.parent_path();
  std::vector<std::pair<std::string, std::string>> entries;
  Suite suite;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("suite line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (key.rfind("dataset.", 0) == 0) {
      entries.emplace_back(std::string(key.substr(8)), std::string(value));
    } else if (key == "algorithms") {
      suite.algorithms.clear();
      std::size_t pos = 0;
      while (pos <= value.size()) {
        const auto comma = value.find(',', pos);
        const auto name = trim(value.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (!name.empty()) {
          auto algo = parse_algorithm(name);
          if (!algo) throw ConfigError("algorithms: unknown algorithm '" + std::string(name) + "'");
          suite.algorithms.push_back(*algo);
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
    } else {
      apply_setting(base, key, value);
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(base, key, value);
  // Dataset options see the suite-wide settings regardless of line order.
  for (const auto& [name, spec] : entries) {
    suite.datasets.push_back({name, dataset_entry(base, spec, dir, name)});
  }
  if (suite.datasets.empty()) throw ConfigError("suite " + path.string() + " lists no datasets");
  if (suite.algorithms.empty()) throw ConfigError("suite " + path.string() + " lists no algorithms");
  suite.base = std::move(base);
  return suite;
}

}  // namespace

int cmd_bench(const fs::path& suite_path, ExperimentConfig base, const Settings& overrides,
              std::ostream& log) {
  Suite suite;
  try {
    suite = parse_suite(suite_path, std::move(base), overrides);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path dir = suite.base.out;
  try {
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::ostringstream results, acc_out;
  results << "dataset,algorithm,status,runs,diverged,best,mean,tolerance,q1,q3,pair,p_value,"
             "insignificant\n";
  acc_out << "dataset,algorithm,run,test_accuracy\n";

  // Per pair (naive, guided): datasets where guided's trimmed mean >= naive's.
  std::map<std::pair<Algorithm, Algorithm>, std::pair<std::size_t, std::size_t>> wins;
  bool any_failed = false;

  for (const auto& entry : suite.datasets) {
    std::map<Algorithm, ExperimentOutcome> outcomes;
    std::string failure;
    try {
      const Dataset ds = load_experiment_dataset(entry.cfg);
      for (Algorithm algo : suite.algorithms) {
        ExperimentConfig cfg = entry.cfg;
        cfg.algorithm = algo;
        outcomes.emplace(algo, run_experiment(cfg, ds, false));
        log << entry.name << ' ' << to_string(algo) << ": mean "
            << report::num(outcomes.at(algo).summary.mean_trimmed) << '\n';
      }
    } catch (const std::exception& e) {
      failure = e.what();
    }

    if (!failure.empty()) {
      any_failed = true;
      log << entry.name << ": failed: " << failure << '\n';
      for (Algorithm algo : suite.algorithms) {
        results << entry.name << ',' << to_string(algo) << ",failed,,,,,,,,,,\n";
      }
      continue;
    }

    for (Algorithm algo : suite.algorithms) {
      const auto& o = outcomes.at(algo);
      const auto& s = o.summary;
      results << entry.name << ',' << to_string(algo) << ",ok," << o.accuracies.size() << ','
              << o.divergent.size() << ',' << report::num(s.best) << ',' << report::num(s.mean_trimmed)
              << ',' << report::num(s.tolerance) << ',' << report::num(s.q1) << ','
              << report::num(s.q3) << ',';
      const Algorithm other = partner(algo);
      if (outcomes.count(other)) {
        const auto w = paired_test(o.accuracies, outcomes.at(other).accuracies);
        results << to_string(other) << ',' << report::num(w.p_value) << ','
                << (w.p_value > kSignificance ? kDagger : "");
      } else {
        results << ",,";
      }
      results << '\n';
      for (std::size_t i = 0; i < o.accuracies.size(); ++i) {
        acc_out << entry.name << ',' << to_string(algo) << ',' << i << ','
                << report::num(o.accuracies[i]) << '\n';
      }
      if (is_guided(algo) && outcomes.count(other)) {
        auto& [won, total] = wins[{other, algo}];
        ++total;
        if (s.mean_trimmed >= outcomes.at(other).summary.mean_trimmed) ++won;
      }
    }
  }

  try {
    open_out(dir / "results.csv") << results.str();
    open_out(dir / "accuracies.csv") << acc_out.str();
    auto w = open_out(dir / "wins.csv");
    w << "naive,guided,guided_wins,datasets\n";
    for (Algorithm algo : suite.algorithms) {
      if (!is_guided(algo)) continue;
      const auto it = wins.find({partner(algo), algo});
      if (it == wins.end()) continue;
      w << to_string(partner(algo)) << ',' << to_string(algo) << ',' << it->second.first << ','
        << it->second.second << '\n';
      log << to_string(algo) << " >= " << to_string(partner(algo)) << " on " << it->second.first
          << " of " << it->second.second << " datasets\n";
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return any_failed ? kExitPartialSuite : kExitOk;
}

std::vector<SweepRow> sweep_rho(const ExperimentConfig& cfg, const Dataset& ds,
                                const std::vector<std::size_t>& rho_values) {
  if (rho_values.empty()) throw ConfigError("rho-values: list is empty");
  std::vector<SweepRow> rows;
  for (std::size_t rho : rho_values) {
    ExperimentConfig c = cfg;
    SweepRow row;
    row.rho = rho;
    if (rho == 0) {
      c.algorithm = Algorithm::sgd;
    } else {
      c.rho = rho;
      c.workers = rho;
    }
    row.mode = traits(c.algorithm).mode;
    row.workers = row.mode == engine::Mode::sequential ? 1 : c.worker_count();
    row.outcome = run_experiment(c, ds, false);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "rho,mode,workers,runs,mean,mean_trimmed,best,tolerance\n";
  for (const auto& r : rows) {
    const auto& s = r.outcome.summary;
    out << r.rho << ',' << engine::to_string(r.mode) << ',' << r.workers << ','
        << r.outcome.accuracies.size() << ',' << report::num(s.mean_all) << ','
        << report::num(s.mean_trimmed) << ',' << report::num(s.best) << ','
        << report::num(s.tolerance) << '\n';
  }
}

int cmd_sweep_rho(const ExperimentConfig& cfg, const std::vector<std::size_t>& rho_values,
                  std::ostream& log) {
  try {
    const Dataset ds = load_experiment_dataset(cfg);
    const auto rows = sweep_rho(cfg, ds, rho_values);
    const fs::path dir = cfg.out;
    fs::create_directories(dir);
    open_out(dir / "config.txt") << serialize(cfg);
    auto out = open_out(dir / "sweep.csv");
    write_sweep_csv(rows, out);

    std::vector<std::string> names;
    std::vector<const std::vector<double>*> columns;
    bool diverged = false;
    for (const auto& r : rows) {
      names.push_back("rho_" + std::to_string(r.rho));
      columns.push_back(&r.outcome.accuracies);
      diverged = diverged || !r.outcome.divergent.empty();
      log << "rho " << r.rho << ": mean " << report::num(r.outcome.summary.mean_all) << '\n';
    }
    auto acc = open_out(dir / "sweep_accuracies.csv");
    write_accuracy_columns(acc, names, columns);
    return diverged ? kExitDivergence : kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_filter(const fs::path& input, const fs::path& output, double factor,
               const CsvSchema& schema, std::ostream& log) {
  try {
    if (!fs::exists(input)) throw ConfigError("input: file not found: " + input.string());
    const Dataset ds = data::load_csv(input, schema);
    const Dataset filtered = data::iqr_filter(ds, factor);
    data::write_csv(filtered, output);
    log << "removed " << ds.size() - filtered.size() << " of " << ds.size() << " rows\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace gsgd::cli
