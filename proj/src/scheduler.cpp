#include "gsgd/scheduler.hpp"

#include <queue>
#include <tuple>

#include "gsgd/errors.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::engine {

void LatencyModel::validate() const {
  auto check = [](const LatencyRange& r) {
    if (r.lo < 0 || r.hi < r.lo) throw InputError("latency range must satisfy 0 <= lo <= hi");
  };
  check(all);
  for (const auto& r : per_worker) check(r);
}

std::vector<ScheduleEvent> simulated_schedule(std::uint64_t seed, const LatencyModel& latency,
                                              std::size_t workers, std::size_t tasks) {
  latency.validate();
  if (workers == 0) throw InputError("need at least one worker");

  struct Pending {
    std::int64_t tick;
    int kind;  // 0 = send, 1 = read
    std::uint64_t seq;
    std::size_t worker;
    std::size_t task;
    bool operator>(const Pending& o) const {
      return std::tie(tick, kind, seq) > std::tie(o.tick, o.kind, o.seq);
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t seq = 0;
  for (std::size_t w = 0; w < workers; ++w) queue.push({0, 1, seq++, w, 0});

  Rng rng({seed, stream::kLatency});
  std::vector<ScheduleEvent> events;
  events.reserve(2 * tasks);
  std::size_t issued = 0;
  while (!queue.empty()) {
    const Pending ev = queue.top();
    queue.pop();
    if (ev.kind == 1) {
      if (issued == tasks) continue;  // queue drained, worker retires
      const std::size_t task = issued++;
      events.push_back({ev.tick, EventKind::read, ev.worker, task});
      const LatencyRange r = latency.for_worker(ev.worker);
      const std::int64_t delay = r.lo == r.hi ? r.lo : rng.uniform_int(r.lo, r.hi);
      queue.push({ev.tick + delay, 0, seq++, ev.worker, task});
    } else {
      events.push_back({ev.tick, EventKind::send, ev.worker, ev.task});
      queue.push({ev.tick, 1, seq++, ev.worker, 0});
    }
  }
  return events;
}

}  // namespace gsgd::engine
