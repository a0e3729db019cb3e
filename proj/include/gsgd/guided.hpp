#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "gsgd/matrix.hpp"
#include "gsgd/model.hpp"
#include "gsgd/optim.hpp"

// Delay compensation by consistent mini-batch replay.
//
// Every applied batch is recorded with two error changes across the update
// that applied it: its own loss change and the change of the average error
// on a fixed verification set. A batch is consistent when both move in the
// same direction. Every rho applied updates the best few consistent and
// improving batches are replayed at the current weights.
namespace gsgd::guided {

inline constexpr std::size_t kDefaultRho = 10;
inline constexpr std::size_t kDefaultReplayCap = 4;

enum class RankBy { verification, self };

struct GuidedConfig {
  std::size_t rho = kDefaultRho;
  std::size_t replay_cap = kDefaultReplayCap;
  RankBy rank_by = RankBy::verification;
};

// Throws InputError unless rho >= 1 and 1 <= replay_cap <= rho.
void validate(const GuidedConfig& cfg);

struct ConsistencyRecord {
  std::int64_t batch_id = 0;
  double delta_verif = 0.0;  // E_bar before - E_bar after
  double delta_self = 0.0;   // batch loss before - batch loss after
  MiniBatch batch;
};

// Rolling window of the last `capacity` records; the oldest is evicted.
class ConsistencyLedger {
 public:
  explicit ConsistencyLedger(std::size_t capacity);

  void record(const MiniBatch& batch, double self_before, double self_after,
              double verif_before, double verif_after);

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return records_.empty(); }
  const std::deque<ConsistencyRecord>& records() const noexcept { return records_; }
  void clear() { records_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<ConsistencyRecord> records_;
};

// Mean cross-entropy on the verification set (same as model::loss).
double approximate_avg_error(const WeightMatrix& w, std::span<const Example> verification);

// Records with delta_verif > 0 and delta_self > 0, sorted by the ranking key
// descending (ties: lower batch id first), truncated to `cap`.
std::vector<MiniBatch> select_most_consistent(const ConsistencyLedger& ledger, std::size_t cap,
                                              RankBy rank_by = RankBy::verification);

// One optimizer step per selected batch, in order, each gradient taken at the
// current weights. Returns the number of updates applied.
std::size_t replay(WeightMatrix& w, optim::OptimizerState& state,
                   std::span<const MiniBatch> selected);

// Number of calls into this module since process start (or the last reset).
// Lets tests prove unguided runs never enter it.
std::uint64_t invocation_count() noexcept;
void reset_invocation_count() noexcept;

}  // namespace gsgd::guided
