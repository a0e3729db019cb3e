#include "gsgd/guided.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "gsgd/errors.hpp"

namespace gsgd::guided {
namespace {

std::atomic<std::uint64_t> g_invocations{0};

void touch() noexcept { g_invocations.fetch_add(1, std::memory_order_relaxed); }

}  // namespace

void validate(const GuidedConfig& cfg) {
  if (cfg.rho < 1) throw InputError("rho must be at least 1");
  if (cfg.replay_cap < 1 || cfg.replay_cap > cfg.rho) {
    throw InputError("replay cap must lie in [1, rho]");
  }
}

ConsistencyLedger::ConsistencyLedger(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InputError("ledger capacity must be at least 1");
}

void ConsistencyLedger::record(const MiniBatch& batch, double self_before, double self_after,
                               double verif_before, double verif_after) {
  touch();
  if (!std::isfinite(self_before) || !std::isfinite(self_after) || !std::isfinite(verif_before) ||
      !std::isfinite(verif_after)) {
    throw NumericError("non-finite error value in consistency record for batch " +
                       std::to_string(batch.id));
  }
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back({batch.id, verif_before - verif_after, self_before - self_after, batch});
}

double approximate_avg_error(const WeightMatrix& w, std::span<const Example> verification) {
  touch();
  return model::loss(w, verification);
}

std::vector<MiniBatch> select_most_consistent(const ConsistencyLedger& ledger, std::size_t cap,
                                              RankBy rank_by) {
  touch();
  std::vector<const ConsistencyRecord*> keep;
  for (const auto& r : ledger.records()) {
    if (r.delta_verif > 0.0 && r.delta_self > 0.0) keep.push_back(&r);
  }
  auto key = [rank_by](const ConsistencyRecord* r) {
    return rank_by == RankBy::verification ? r->delta_verif : r->delta_self;
  };
  std::sort(keep.begin(), keep.end(), [&](const ConsistencyRecord* a, const ConsistencyRecord* b) {
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return ka > kb;
    return a->batch_id < b->batch_id;
  });
  if (keep.size() > cap) keep.resize(cap);

  std::vector<MiniBatch> out;
  out.reserve(keep.size());
  for (const auto* r : keep) out.push_back(r->batch);
  return out;
}

std::size_t replay(WeightMatrix& w, optim::OptimizerState& state,
                   std::span<const MiniBatch> selected) {
  touch();
  for (const MiniBatch& b : selected) {
    const GradientMatrix g = model::gradient(w, b);
    optim::apply(state, w, g);
  }
  return selected.size();
}

std::uint64_t invocation_count() noexcept { return g_invocations.load(std::memory_order_relaxed); }

void reset_invocation_count() noexcept { g_invocations.store(0, std::memory_order_relaxed); }

}  // namespace gsgd::guided
