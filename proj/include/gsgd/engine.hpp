#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsgd/data.hpp"
#include "gsgd/guided.hpp"
#include "gsgd/matrix.hpp"
#include "gsgd/model.hpp"
#include "gsgd/optim.hpp"
#include "gsgd/scheduler.hpp"

namespace gsgd::engine {

enum class Mode { sequential, sync, async };
enum class SchedulerKind { simulated, concurrent };

std::string_view to_string(Mode mode);
std::string_view to_string(SchedulerKind kind);

// Abort threshold on validation loss.
inline constexpr double kDivergenceLoss = 1e6;

struct EngineConfig {
  Mode mode = Mode::sequential;
  bool guided = false;
  optim::Rule rule = optim::Rule::vanilla;
  optim::RmspropInit rmsprop_init = optim::RmspropInit::paper;
  std::size_t workers = 10;  // c; ignored in sequential mode
  std::size_t epochs = 50;
  // Optional hard cap on applied gradients (replays are not counted).
  std::optional<std::size_t> max_updates;
  double eta = optim::kDefaultEta;
  guided::GuidedConfig guided_cfg;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  SchedulerKind scheduler = SchedulerKind::simulated;
  LatencyModel latency;
};

void validate(const EngineConfig& cfg);

// Views over a split dataset; the referenced examples must outlive the run.
struct Problem {
  std::span<const Example> train;
  std::span<const Example> validation;
  std::span<const Example> test;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
};

Problem make_problem(const Dataset& ds, const data::Splits& splits);

struct GradientMessage {
  std::size_t worker_id = 0;
  std::int64_t batch_id = 0;
  GradientMatrix gradient;
  std::int64_t read_version = 0;
  double batch_loss_at_read = 0.0;
  std::shared_ptr<const MiniBatch> batch;
};

// Immutable weights tagged with the server version they were read at.
struct Snapshot {
  std::int64_t version = 0;
  std::shared_ptr<const WeightMatrix> weights;
};

// A worker's whole job: gradient and batch loss at the snapshot weights.
GradientMessage compute_gradient(std::size_t worker_id, const Snapshot& snap,
                                 std::shared_ptr<const MiniBatch> batch);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  std::int64_t updates = 0;  // cumulative, applied + replayed
  std::int64_t replays = 0;  // cumulative
  double mean_staleness = 0.0;
};

// One entry per version bump, in application order.
struct AppliedUpdate {
  std::int64_t version = 0;  // version after the update
  std::size_t worker = 0;
  std::int64_t batch_id = 0;
  std::int64_t read_version = 0;
  bool replay = false;
};

struct RunResult {
  std::vector<EpochMetrics> epochs;
  double test_accuracy = 0.0;
  std::map<std::int64_t, std::int64_t> staleness_histogram;  // async only
  std::int64_t update_count = 0;   // applied + replayed = final version
  std::int64_t applied_count = 0;
  std::int64_t replay_count = 0;
  std::int64_t virtual_ticks = 0;  // simulated scheduler only
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string diagnostic;
  WeightMatrix final_weights;
  std::vector<AppliedUpdate> log;
};

// Single authority over the weights, optimizer state and guided ledger.
// Not thread-safe: exactly one context calls apply().
class ParameterServer {
 public:
  ParameterServer(const EngineConfig& cfg, WeightMatrix initial,
                  std::span<const Example> verification);

  Snapshot snapshot() const;

  // Optimizer step with msg.gradient, version + 1, then guided bookkeeping
  // and (every rho applied gradients) replay. Throws NumericError when the
  // weights stop being finite.
  void apply(const GradientMessage& msg);

  std::int64_t version() const noexcept { return version_; }
  std::int64_t applied_count() const noexcept { return applied_; }
  std::int64_t replay_count() const noexcept { return replayed_; }
  const WeightMatrix& weights() const noexcept { return weights_; }
  const optim::OptimizerState& optimizer() const noexcept { return opt_; }
  const guided::ConsistencyLedger* ledger() const noexcept {
    return ledger_ ? &*ledger_ : nullptr;
  }
  const std::vector<AppliedUpdate>& log() const noexcept { return log_; }
  // Staleness of every applied (non-replayed) gradient, in order.
  const std::vector<std::int64_t>& staleness() const noexcept { return staleness_; }

 private:
  bool guided_;
  guided::GuidedConfig guided_cfg_;
  std::span<const Example> verification_;
  WeightMatrix weights_;
  optim::OptimizerState opt_;
  std::optional<guided::ConsistencyLedger> ledger_;
  double verif_error_ = 0.0;
  std::int64_t version_ = 0;
  std::int64_t applied_ = 0;
  std::int64_t replayed_ = 0;
  std::vector<AppliedUpdate> log_;
  std::vector<std::int64_t> staleness_;
};

// Mini-batch SGD (guided: with replay every rho updates).
RunResult run_sequential(const EngineConfig& cfg, const Problem& problem);

// Parameter server with cfg.workers workers, synchronous or asynchronous.
RunResult run_parallel(const EngineConfig& cfg, const Problem& problem);

// Dispatch on cfg.mode.
RunResult run(const EngineConfig& cfg, const Problem& problem);

}  // namespace gsgd::engine
