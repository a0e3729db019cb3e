#include "gsgd/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace gsgd::report {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

void write_metrics_csv(const engine::RunResult& r, std::ostream& out) {
  out << "epoch,train_loss,val_loss,val_accuracy,updates,replays,mean_staleness\n";
  for (const auto& m : r.epochs) {
    out << m.epoch << ',' << num(m.train_loss) << ',' << num(m.val_loss) << ','
        << num(m.val_accuracy) << ',' << m.updates << ',' << m.replays << ','
        << num(m.mean_staleness) << '\n';
  }
}

void write_run(const engine::RunResult& r, std::ostream& out) {
  out << "seed = " << r.seed << '\n'
      << "diverged = " << (r.diverged ? "true" : "false") << '\n';
  if (r.diverged) out << "diagnostic = " << r.diagnostic << '\n';
  out << "test_accuracy = " << num(r.test_accuracy) << '\n'
      << "epochs = " << r.epochs.size() << '\n'
      << "update_count = " << r.update_count << '\n'
      << "applied_count = " << r.applied_count << '\n'
      << "replay_count = " << r.replay_count << '\n'
      << "virtual_ticks = " << r.virtual_ticks << '\n';
  if (!r.epochs.empty()) {
    const auto& last = r.epochs.back();
    out << "final_train_loss = " << num(last.train_loss) << '\n'
        << "final_val_loss = " << num(last.val_loss) << '\n'
        << "final_val_accuracy = " << num(last.val_accuracy) << '\n';
  }
  out << "staleness_histogram = ";
  bool first = true;
  for (const auto& [s, count] : r.staleness_histogram) {
    if (!first) out << ',';
    out << s << ':' << count;
    first = false;
  }
  out << '\n' << "wall_seconds = " << num(r.wall_seconds) << '\n';
}

void write_summary(const stats::StatsSummary& s, std::span<const std::size_t> divergent_runs,
                   std::ostream& out) {
  out << "runs = " << s.n << '\n'
      << "best = " << num(s.best) << '\n'
      << "mean = " << num(s.mean_trimmed) << '\n'
      << "tolerance = " << num(s.tolerance) << '\n'
      << "q1 = " << num(s.q1) << '\n'
      << "q3 = " << num(s.q3) << '\n'
      << "mean_all = " << num(s.mean_all) << '\n'
      << "divergent_runs = ";
  for (std::size_t i = 0; i < divergent_runs.size(); ++i) {
    if (i) out << ',';
    out << divergent_runs[i];
  }
  out << '\n';
}

}  // namespace gsgd::report
