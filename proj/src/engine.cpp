#include "gsgd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "gsgd/errors.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::engine {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::sequential:
      return "sequential";
    case Mode::sync:
      return "sync";
    case Mode::async:
      return "async";
  }
  return "?";
}

std::string_view to_string(SchedulerKind kind) {
  return kind == SchedulerKind::simulated ? "simulated" : "concurrent";
}

void validate(const EngineConfig& cfg) {
  if (cfg.epochs < 1) throw InputError("epochs must be at least 1");
  if (cfg.batch_size < 1) throw InputError("batch size must be at least 1");
  if (cfg.mode != Mode::sequential && cfg.workers < 1) throw InputError("need at least one worker");
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) throw InputError("learning rate must be positive");
  if (cfg.max_updates && *cfg.max_updates < 1) throw InputError("max_updates must be at least 1");
  if (cfg.guided) guided::validate(cfg.guided_cfg);
  cfg.latency.validate();
}

Problem make_problem(const Dataset& ds, const data::Splits& splits) {
  return {splits.train, splits.validation, splits.test, ds.num_features, ds.num_classes};
}

GradientMessage compute_gradient(std::size_t worker_id, const Snapshot& snap,
                                 std::shared_ptr<const MiniBatch> batch) {
  GradientMessage msg;
  msg.worker_id = worker_id;
  msg.batch_id = batch->id;
  msg.read_version = snap.version;
  msg.gradient = model::gradient(*snap.weights, *batch);
  msg.batch_loss_at_read = model::loss(*snap.weights, *batch);
  msg.batch = std::move(batch);
  return msg;
}

// ---------------------------------------------------------------------------
// ParameterServer

ParameterServer::ParameterServer(const EngineConfig& cfg, WeightMatrix initial,
                                 std::span<const Example> verification)
    : guided_(cfg.guided),
      guided_cfg_(cfg.guided_cfg),
      verification_(verification),
      weights_(std::move(initial)),
      opt_(optim::make_state(cfg.rule, weights_, cfg.eta, cfg.rmsprop_init)) {
  if (guided_) {
    guided::validate(guided_cfg_);
    ledger_.emplace(guided_cfg_.rho);
    verif_error_ = guided::approximate_avg_error(weights_, verification_);
  }
}

Snapshot ParameterServer::snapshot() const {
  return {version_, std::make_shared<const WeightMatrix>(weights_)};
}

void ParameterServer::apply(const GradientMessage& msg) {
  if (msg.read_version > version_) throw InputError("gradient read from a future version");
  const std::int64_t staleness = version_ - msg.read_version;

  double self_before = 0.0;
  if (guided_) {
    if (!msg.batch) throw InputError("guided server needs the batch with each gradient");
    self_before = model::loss(weights_, *msg.batch);
  }

  optim::apply(opt_, weights_, msg.gradient);
  if (!weights_.all_finite()) {
    throw NumericError("non-finite weights after update " + std::to_string(version_ + 1));
  }
  ++version_;
  ++applied_;
  log_.push_back({version_, msg.worker_id, msg.batch_id, msg.read_version, false});
  staleness_.push_back(staleness);

  if (!guided_) return;

  const double self_after = model::loss(weights_, *msg.batch);
  const double verif_after = guided::approximate_avg_error(weights_, verification_);
  ledger_->record(*msg.batch, self_before, self_after, verif_error_, verif_after);
  verif_error_ = verif_after;

  if (applied_ % static_cast<std::int64_t>(guided_cfg_.rho) != 0) return;

  const auto selected =
      guided::select_most_consistent(*ledger_, guided_cfg_.replay_cap, guided_cfg_.rank_by);
  guided::replay(weights_, opt_, selected);
  if (!weights_.all_finite()) {
    throw NumericError("non-finite weights after replay at update " + std::to_string(version_));
  }
  for (const MiniBatch& b : selected) {
    ++version_;
    ++replayed_;
    log_.push_back({version_, msg.worker_id, b.id, version_ - 1, true});
  }
  ledger_->clear();
  if (!selected.empty()) verif_error_ = guided::approximate_avg_error(weights_, verification_);
}

// ---------------------------------------------------------------------------
// Run drivers

namespace {

// Shared, seeded queue of mini-batches spanning epochs. Not thread-safe.
class BatchStream {
 public:
  BatchStream(std::span<const Example> train, std::size_t batch_size, std::uint64_t seed,
              std::size_t total)
      : train_(train), batch_size_(batch_size), seed_(seed), total_(total) {}

  std::shared_ptr<const MiniBatch> next() {
    if (issued_ == total_) return nullptr;
    if (pos_ == current_.size()) {
      auto batches = data::make_batches(train_, batch_size_, seed_, epoch_++);
      current_.clear();
      for (auto& b : batches) current_.push_back(std::make_shared<const MiniBatch>(std::move(b)));
      pos_ = 0;
    }
    ++issued_;
    return current_[pos_++];
  }

  std::size_t remaining() const noexcept { return total_ - issued_; }

 private:
  std::span<const Example> train_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t total_;
  std::size_t issued_ = 0;
  std::int64_t epoch_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::shared_ptr<const MiniBatch>> current_;
};

class Trainer {
 public:
  Trainer(const EngineConfig& cfg, const Problem& problem)
      : cfg_(cfg),
        problem_(problem),
        per_epoch_(data::batches_per_epoch(problem.train.size(), cfg.batch_size)),
        total_(cfg.epochs * per_epoch_),
        server_(cfg, model::init_weights(problem.num_classes, problem.num_features, cfg.seed),
                problem.validation) {
    if (cfg_.max_updates) total_ = std::min(total_, *cfg_.max_updates);
  }

  std::size_t total() const noexcept { return total_; }
  ParameterServer& server() noexcept { return server_; }

  void deliver(const GradientMessage& msg) {
    server_.apply(msg);
    epoch_staleness_ += static_cast<double>(server_.staleness().back());
    ++epoch_messages_;
    const auto applied = static_cast<std::size_t>(server_.applied_count());
    if (applied % per_epoch_ == 0 || applied == total_) close_epoch();
  }

  RunResult finish(std::int64_t virtual_ticks, double wall_seconds) {
    RunResult r;
    r.epochs = std::move(epochs_);
    r.seed = cfg_.seed;
    r.update_count = server_.version();
    r.applied_count = server_.applied_count();
    r.replay_count = server_.replay_count();
    r.virtual_ticks = virtual_ticks;
    r.wall_seconds = wall_seconds;
    r.final_weights = server_.weights();
    r.log = server_.log();
    if (cfg_.mode == Mode::async) {
      for (std::int64_t s : server_.staleness()) ++r.staleness_histogram[s];
    }
    r.test_accuracy = model::accuracy(server_.weights(), problem_.test);
    return r;
  }

  RunResult diverged(const std::string& why, double wall_seconds) {
    RunResult r;
    r.epochs = std::move(epochs_);
    r.seed = cfg_.seed;
    r.update_count = server_.version();
    r.applied_count = server_.applied_count();
    r.replay_count = server_.replay_count();
    r.wall_seconds = wall_seconds;
    r.final_weights = server_.weights();
    r.log = server_.log();
    r.diverged = true;
    r.diagnostic = why;
    r.test_accuracy = std::nan("");
    return r;
  }

 private:
  void close_epoch() {
    const WeightMatrix& w = server_.weights();
    EpochMetrics m;
    m.epoch = epochs_.size() + 1;
    m.train_loss = model::loss(w, problem_.train);
    m.val_loss = model::loss(w, problem_.validation);
    m.val_accuracy = model::accuracy(w, problem_.validation);
    m.updates = server_.version();
    m.replays = server_.replay_count();
    m.mean_staleness = cfg_.mode == Mode::async && epoch_messages_ > 0
                           ? epoch_staleness_ / static_cast<double>(epoch_messages_)
                           : 0.0;
    epochs_.push_back(m);
    epoch_staleness_ = 0.0;
    epoch_messages_ = 0;
    if (!(m.val_loss <= kDivergenceLoss)) {
      throw NumericError("validation loss " + std::to_string(m.val_loss) + " after epoch " +
                         std::to_string(m.epoch));
    }
  }

  const EngineConfig& cfg_;
  const Problem& problem_;
  std::size_t per_epoch_;
  std::size_t total_;
  ParameterServer server_;
  std::vector<EpochMetrics> epochs_;
  double epoch_staleness_ = 0.0;
  std::size_t epoch_messages_ = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_problem(const Problem& p) {
  if (p.train.empty() || p.validation.empty() || p.test.empty()) {
    throw InputError("train, validation and test sets must all be non-empty");
  }
  if (p.num_classes < 2) throw InputError("need at least two classes");
}

std::int64_t draw_latency(Rng& rng, const LatencyRange& r) {
  return r.lo == r.hi ? r.lo : rng.uniform_int(r.lo, r.hi);
}

void run_sync_rounds(const EngineConfig& cfg, Trainer& t, BatchStream& stream,
                     std::int64_t& ticks) {
  Rng rng({cfg.seed, stream::kLatency});
  const std::size_t c = cfg.workers;
  std::vector<std::shared_ptr<const MiniBatch>> round;
  std::vector<GradientMessage> msgs;
  while (stream.remaining() > 0) {
    const Snapshot snap = t.server().snapshot();
    round.clear();
    for (std::size_t w = 0; w < c; ++w) {
      auto b = stream.next();
      if (!b) break;
      round.push_back(std::move(b));
    }
    const auto k = round.size();
    msgs.assign(k, GradientMessage{});
    if (cfg.scheduler == SchedulerKind::concurrent) {
      std::exception_ptr failure;
#pragma omp parallel for schedule(static, 1)
      for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(k); ++w) {
        try {
          const auto uw = static_cast<std::size_t>(w);
          msgs[uw] = compute_gradient(uw, snap, round[uw]);
        } catch (...) {
#pragma omp critical(gsgd_worker_failure)
          if (!failure) failure = std::current_exception();
        }
      }
      if (failure) std::rethrow_exception(failure);
    } else {
      std::int64_t slowest = 0;
      for (std::size_t w = 0; w < k; ++w) {
        msgs[w] = compute_gradient(w, snap, round[w]);
        slowest = std::max(slowest, draw_latency(rng, cfg.latency.for_worker(w)));
      }
      ticks += slowest;
    }
    // Barrier: the round is applied only once every gradient has arrived.
    for (const auto& m : msgs) {
      if (m.read_version != snap.version) throw std::logic_error("sync round with mixed versions");
      t.deliver(m);
    }
  }
}

void run_async_simulated(const EngineConfig& cfg, Trainer& t, BatchStream& stream,
                         std::int64_t& ticks) {
  const auto events = simulated_schedule(cfg.seed, cfg.latency, cfg.workers, t.total());
  std::vector<std::optional<GradientMessage>> pending(cfg.workers);
  for (const ScheduleEvent& ev : events) {
    if (ev.kind == EventKind::read) {
      auto batch = stream.next();
      pending[ev.worker] = compute_gradient(ev.worker, t.server().snapshot(), std::move(batch));
    } else {
      t.deliver(*pending[ev.worker]);
      pending[ev.worker].reset();
    }
    ticks = ev.tick;
  }
}

void run_async_concurrent(const EngineConfig& cfg, Trainer& t, BatchStream& stream) {
  std::mutex mu;
  std::condition_variable arrived;
  std::deque<GradientMessage> inbox;
  Snapshot latest = t.server().snapshot();
  bool stop = false;
  std::exception_ptr worker_failure;

  auto worker_loop = [&](std::size_t id) {
    Rng rng({cfg.seed, stream::kLatency, id});
    try {
      while (true) {
        Snapshot snap;
        std::shared_ptr<const MiniBatch> batch;
        {
          std::lock_guard lock(mu);
          if (stop) return;
          batch = stream.next();
          if (!batch) return;
          snap = latest;
        }
        GradientMessage msg = compute_gradient(id, snap, std::move(batch));
        const std::int64_t delay = draw_latency(rng, cfg.latency.for_worker(id));
        if (delay > 0) std::this_thread::sleep_for(std::chrono::microseconds(delay));
        {
          std::lock_guard lock(mu);
          inbox.push_back(std::move(msg));
        }
        arrived.notify_one();
      }
    } catch (...) {
      {
        std::lock_guard lock(mu);
        if (!worker_failure) worker_failure = std::current_exception();
        stop = true;
      }
      arrived.notify_one();
    }
  };

  std::vector<std::jthread> workers;
  workers.reserve(cfg.workers);
  for (std::size_t w = 0; w < cfg.workers; ++w) workers.emplace_back(worker_loop, w);

  auto shutdown = [&] {
    {
      std::lock_guard lock(mu);
      stop = true;
    }
    workers.clear();  // joins
  };

  try {
    for (std::size_t applied = 0; applied < t.total(); ++applied) {
      GradientMessage msg;
      {
        std::unique_lock lock(mu);
        arrived.wait(lock, [&] { return !inbox.empty() || worker_failure; });
        if (worker_failure) std::rethrow_exception(worker_failure);
        msg = std::move(inbox.front());
        inbox.pop_front();
      }
      t.deliver(msg);
      Snapshot fresh = t.server().snapshot();
      std::lock_guard lock(mu);
      latest = std::move(fresh);
    }
  } catch (...) {
    shutdown();
    throw;
  }
  shutdown();
}

}  // namespace

RunResult run_sequential(const EngineConfig& cfg, const Problem& problem) {
  if (cfg.mode != Mode::sequential) throw InputError("run_sequential needs sequential mode");
  validate(cfg);
  check_problem(problem);
  const auto start = Clock::now();
  Trainer t(cfg, problem);
  BatchStream stream(problem.train, cfg.batch_size, cfg.seed, t.total());
  try {
    while (auto batch = stream.next()) {
      t.deliver(compute_gradient(0, t.server().snapshot(), std::move(batch)));
    }
  } catch (const NumericError& e) {
    return t.diverged(e.what(), seconds_since(start));
  }
  return t.finish(0, seconds_since(start));
}

RunResult run_parallel(const EngineConfig& cfg, const Problem& problem) {
  if (cfg.mode == Mode::sequential) throw InputError("run_parallel needs sync or async mode");
  validate(cfg);
  check_problem(problem);
  const auto start = Clock::now();
  Trainer t(cfg, problem);
  BatchStream stream(problem.train, cfg.batch_size, cfg.seed, t.total());
  std::int64_t ticks = 0;
  try {
    if (cfg.mode == Mode::sync) {
      run_sync_rounds(cfg, t, stream, ticks);
    } else if (cfg.scheduler == SchedulerKind::simulated) {
      run_async_simulated(cfg, t, stream, ticks);
    } else {
      run_async_concurrent(cfg, t, stream);
    }
  } catch (const NumericError& e) {
    return t.diverged(e.what(), seconds_since(start));
  }
  return t.finish(cfg.scheduler == SchedulerKind::simulated ? ticks : 0, seconds_since(start));
}

RunResult run(const EngineConfig& cfg, const Problem& problem) {
  return cfg.mode == Mode::sequential ? run_sequential(cfg, problem) : run_parallel(cfg, problem);
}

}  // namespace gsgd::engine
