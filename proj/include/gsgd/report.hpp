#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gsgd/engine.hpp"
#include "gsgd/stats.hpp"

namespace gsgd::report {

// Reals in every report use 5 significant digits.
std::string num(double v);

// Per-epoch CSV: epoch,train_loss,val_loss,val_accuracy,updates,replays,mean_staleness
void write_metrics_csv(const engine::RunResult& r, std::ostream& out);

// Flat key = value description of one run.
void write_run(const engine::RunResult& r, std::ostream& out);

// Flat key = value summary of a set of runs (accuracies in percent).
void write_summary(const stats::StatsSummary& s, std::span<const std::size_t> divergent_runs,
                   std::ostream& out);

}  // namespace gsgd::report
