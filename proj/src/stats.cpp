#include "gsgd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gsgd/errors.hpp"

namespace gsgd::stats {

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StatsSummary summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summarize needs at least one value");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());

  StatsSummary s;
  s.n = v.size();
  s.best = v.back();
  s.q1 = quantile_type7(v, 0.25);
  s.q3 = quantile_type7(v, 0.75);
  s.tolerance = (s.q3 - s.q1) / 2.0;
  s.mean_all = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());

  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (x >= s.q1 && x <= s.q3) {
      sum += x;
      ++count;
    }
  }
  // With two distinct values no sample lies between the quartiles.
  s.mean_trimmed = count > 0 ? sum / static_cast<double>(count) : quantile_type7(v, 0.5);
  return s;
}

namespace {

struct Ranked {
  std::vector<bool> positive;
  std::vector<long> doubled_rank;  // 2 * average rank, always an integer
  double tie_correction = 0.0;     // sum of t^3 - t over tie groups
};

Ranked rank_differences(std::span<const double> a, std::span<const double> b) {
  struct Item {
    double mag;
    bool pos;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) items.push_back({std::abs(d), d > 0.0});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& x, const Item& y) { return x.mag < y.mag; });

  Ranked r;
  const std::size_t n = items.size();
  r.doubled_rank.resize(n);
  // Magnitudes equal up to rounding (differences of ratios such as k/n)
  // share a rank.
  auto same = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(x, y); };
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && same(items[i].mag, items[j].mag)) ++j;
    // ranks i+1 .. j averaged: doubled = (i + 1) + j
    const long doubled = static_cast<long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) r.doubled_rank[k] = doubled;
    const double t = static_cast<double>(j - i);
    r.tie_correction += t * t * t - t;
    i = j;
  }
  for (const Item& it : items) r.positive.push_back(it.pos);
  return r;
}

// P(W+ <= threshold) under the null, from subset-sum counts of the doubled
// ranks.
double exact_lower_tail(const std::vector<long>& doubled_rank, double threshold) {
  const long total = std::accumulate(doubled_rank.begin(), doubled_rank.end(), 0L);
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reach = 0;
  for (long rank : doubled_rank) {
    for (long s = reach; s >= 0; --s) {
      count[static_cast<std::size_t>(s + rank)] += count[static_cast<std::size_t>(s)];
    }
    reach += rank;
  }
  const double limit = 2.0 * threshold + 1e-9;
  double hits = 0.0;
  for (long s = 0; s <= total && static_cast<double>(s) <= limit; ++s) {
    hits += count[static_cast<std::size_t>(s)];
  }
  return hits / std::ldexp(1.0, static_cast<int>(doubled_rank.size()));
}

double upper_normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Alternative alternative, std::size_t exact_max_n) {
  if (a.size() != b.size()) throw InputError("wilcoxon: samples must be paired");
  const Ranked r = rank_differences(a, b);

  WilcoxonResult res;
  res.n_effective = r.doubled_rank.size();
  if (res.n_effective == 0) {
    res.degenerate = true;
    res.p_value = 1.0;
    return res;
  }
  for (std::size_t i = 0; i < res.n_effective; ++i) {
    const double rank = static_cast<double>(r.doubled_rank[i]) / 2.0;
    (r.positive[i] ? res.w_plus : res.w_minus) += rank;
  }
  res.statistic = std::min(res.w_plus, res.w_minus);

  const auto n = static_cast<double>(res.n_effective);
  if (res.n_effective <= exact_max_n) {
    res.exact = true;
    switch (alternative) {
      case Alternative::two_sided:
        res.p_value = std::min(1.0, 2.0 * exact_lower_tail(r.doubled_rank, res.statistic));
        break;
      case Alternative::greater:  // P(W+ >= w+) = P(W+ <= w-) by symmetry
        res.p_value = exact_lower_tail(r.doubled_rank, res.w_minus);
        break;
      case Alternative::less:
        res.p_value = exact_lower_tail(r.doubled_rank, res.w_plus);
        break;
    }
    return res;
  }

  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - r.tie_correction / 48.0;
  const double sd = std::sqrt(var);
  switch (alternative) {
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::abs(res.w_plus - mean) - 0.5) / sd;
      res.p_value = std::min(1.0, 2.0 * upper_normal_tail(z));
      break;
    }
    case Alternative::greater:
      res.p_value = upper_normal_tail((res.w_plus - mean - 0.5) / sd);
      break;
    case Alternative::less:
      res.p_value = 1.0 - upper_normal_tail((res.w_plus - mean + 0.5) / sd);
      break;
  }
  return res;
}

}  // namespace gsgd::stats
