#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gsgd::engine {

// Virtual-tick delay between a worker's read and the arrival of its gradient.
struct LatencyRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Every task of worker w draws its delay uniformly from for_worker(w).
// `per_worker` overrides `all` for the workers it lists.
struct LatencyModel {
  LatencyRange all;
  std::vector<LatencyRange> per_worker;

  LatencyRange for_worker(std::size_t worker) const {
    return worker < per_worker.size() ? per_worker[worker] : all;
  }
  // Throws InputError on negative or inverted ranges.
  void validate() const;
};

enum class EventKind { read, send };

struct ScheduleEvent {
  std::int64_t tick = 0;
  EventKind kind = EventKind::read;
  std::size_t worker = 0;
  std::size_t task = 0;  // position in the shared batch queue
};

// Deterministic total order of read/send events for `workers` workers
// sharing `tasks` batches. A worker reads (takes the next batch), sends
// after its drawn latency, then reads again at the send tick. At equal ticks
// sends come before reads, remaining ties are FIFO, so zero latency gives a
// round-robin order with every gradient applied before the next read.
std::vector<ScheduleEvent> simulated_schedule(std::uint64_t seed, const LatencyModel& latency,
                                              std::size_t workers, std::size_t tasks);

}  // namespace gsgd::engine
