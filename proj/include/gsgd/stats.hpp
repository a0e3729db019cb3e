#pragma once

#include <cstddef>
#include <span>

namespace gsgd::stats {

// Linear interpolation between order statistics (Hyndman-Fan type 7, the
// R / NumPy default). `sorted` must be ascending and non-empty.
double quantile_type7(std::span<const double> sorted, double p);

struct StatsSummary {
  double best = 0.0;          // max over all values, untrimmed
  double mean_trimmed = 0.0;  // mean of values v with q1 <= v <= q3
  double tolerance = 0.0;     // (q3 - q1) / 2
  double q1 = 0.0;
  double q3 = 0.0;
  double mean_all = 0.0;
  std::size_t n = 0;
};

StatsSummary summarize(std::span<const double> values);

enum class Alternative { two_sided, greater, less };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  std::size_t n_effective = 0;  // pairs left after dropping zero differences
  bool exact = false;
  bool degenerate = false;      // every difference was zero
};

// Effective sample sizes up to this use the exact null distribution.
inline constexpr std::size_t kExactMaxN = 12;

// Paired signed-rank test on d = a - b. Zero differences are dropped, tied
// |d| get average ranks. `greater` tests a > b. Effective sizes above
// `exact_max_n` use the tie-corrected normal approximation.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Alternative alternative = Alternative::two_sided,
                                    std::size_t exact_max_n = kExactMaxN);

inline WilcoxonResult wilcoxon_signed_rank_two_tailed(std::span<const double> a,
                                                      std::span<const double> b) {
  return wilcoxon_signed_rank(a, b, Alternative::two_sided);
}

}  // namespace gsgd::stats
