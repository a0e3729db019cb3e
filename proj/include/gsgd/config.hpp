#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "gsgd/data.hpp"
#include "gsgd/engine.hpp"

namespace gsgd::cli {

// Algorithm names: an optional 'g' (guided) prefix, then sgd (sequential),
// ssgd / asgd (synchronous / asynchronous parameter server), or srmsprop /
// sadagrad (synchronous server with an adaptive rule).
enum class Algorithm { sgd, gsgd, ssgd, gssgd, asgd, gasgd, srmsprop, gsrmsprop, sadagrad, gsadagrad };

std::optional<Algorithm> parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algo);
// Naive counterpart of a guided algorithm and vice versa.
Algorithm partner(Algorithm algo);
bool is_guided(Algorithm algo);

struct AlgorithmTraits {
  engine::Mode mode;
  bool guided;
  optim::Rule rule;
};
AlgorithmTraits traits(Algorithm algo);

struct ExperimentConfig {
  std::string dataset;
  bool header = false;
  int label_column = -1;
  bool stratify = false;
  std::optional<double> iqr_factor;  // filter the dataset before splitting

  Algorithm algorithm = Algorithm::sgd;
  std::size_t runs = 30;
  std::size_t epochs = 50;
  std::optional<std::size_t> max_updates;
  double eta = optim::kDefaultEta;
  std::size_t rho = guided::kDefaultRho;
  std::optional<std::size_t> workers;  // unset: c = rho
  std::size_t batch_size = 10;
  std::size_t replay_cap = guided::kDefaultReplayCap;
  std::uint64_t seed = 1;
  engine::SchedulerKind scheduler = engine::SchedulerKind::simulated;
  engine::LatencyModel latency;
  std::string out = "results";
  optim::RmspropInit rmsprop_init = optim::RmspropInit::paper;
  guided::RankBy rank_by = guided::RankBy::verification;
  double test_fraction = 0.20;
  double validation_fraction = 0.20;

  std::size_t worker_count() const { return workers.value_or(rho); }
};

// Sets one key from its text form; throws ConfigError naming the key.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// Flat "key = value" lines applied over `cfg`; '#' starts a comment.
void parse_config(std::istream& in, ExperimentConfig& cfg);
void load_config_file(const std::filesystem::path& path, ExperimentConfig& cfg);

// Canonical snapshot; parse_config(serialize(c)) reproduces c.
std::string serialize(const ExperimentConfig& cfg);

engine::LatencyModel parse_latency(std::string_view text);
std::string format_latency(const engine::LatencyModel& latency);

engine::EngineConfig engine_config(const ExperimentConfig& cfg, std::uint64_t seed);
data::SplitSpec split_spec(const ExperimentConfig& cfg, std::uint64_t seed);
CsvSchema csv_schema(const ExperimentConfig& cfg);

}  // namespace gsgd::cli
