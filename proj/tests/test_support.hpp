#pragma once

// Helpers shared by the unit tests and the acceptance runner: synthetic data,
// reference oracles, temporary directories.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gsgd/data.hpp"
#include "gsgd/matrix.hpp"
#include "gsgd/model.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::testing {

// K Gaussian clusters in F dimensions; cluster k is centred at
// `separation` * e_(k mod F) (offset by sign for k >= F).
inline Dataset make_blobs(std::uint64_t seed, std::size_t per_class, std::size_t classes,
                          std::size_t features, double separation = 4.0, double spread = 1.0) {
  Rng rng({seed, stream::kSynthetic});
  Dataset ds;
  ds.name = "blobs";
  ds.num_features = features;
  ds.num_classes = classes;
  for (std::size_t k = 0; k < classes; ++k) ds.class_labels.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t k = 0; k < classes; ++k) {
      Example e;
      e.label = k;
      e.features.resize(features);
      for (std::size_t f = 0; f < features; ++f) {
        double centre = 0.0;
        if (f == k % features) centre = (k < features ? 1.0 : -1.0) * separation;
        e.features[f] = rng.normal(centre, spread);
      }
      ds.examples.push_back(std::move(e));
    }
  }
  ds.label_column = features;
  return ds;
}

inline std::vector<Example> random_examples(Rng& rng, std::size_t n, std::size_t classes,
                                            std::size_t features, double scale = 1.0) {
  std::vector<Example> out(n);
  for (auto& e : out) {
    e.features.resize(features);
    for (double& x : e.features) x = rng.normal(0.0, scale);
    e.label = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(classes) - 1));
  }
  return out;
}

inline WeightMatrix random_weights(Rng& rng, std::size_t classes, std::size_t features,
                                   double scale = 1.0) {
  WeightMatrix w(classes, features + 1);
  for (double& v : w.values()) v = rng.normal(0.0, scale);
  return w;
}

// Central differences of model::loss, entry by entry.
inline GradientMatrix finite_difference_gradient(const WeightMatrix& w,
                                                 const std::vector<Example>& examples,
                                                 double h = 1e-5) {
  GradientMatrix g(w.rows(), w.cols());
  WeightMatrix probe = w;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      const double orig = probe(r, c);
      probe(r, c) = orig + h;
      const double up = model::loss(probe, examples);
      probe(r, c) = orig - h;
      const double down = model::loss(probe, examples);
      probe(r, c) = orig;
      g(r, c) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// Wilcoxon p by enumerating all 2^n sign vectors over average ranks computed
// the slow way. `alternative`: 0 two-sided, 1 greater (a > b), -1 less.
inline double brute_force_wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b,
                                     int alternative = 0) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  auto tied = [](double x, double y) {
    return std::abs(x - y) <= 1e-9 * std::max(std::abs(x), std::abs(y));
  };
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (tied(std::abs(d[j]), std::abs(d[i]))) {
        equal += 1.0;
      } else if (std::abs(d[j]) < std::abs(d[i])) {
        below += 1.0;
      }
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double w_plus = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) w_plus += rank[i];
  }
  const double w_minus = total - w_plus;
  const double observed_min = std::min(w_plus, w_minus);
  std::uint64_t le_min = 0, ge_plus = 0, le_plus = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) s += rank[i];
    }
    if (s <= observed_min + 1e-9) ++le_min;
    if (s >= w_plus - 1e-9) ++ge_plus;
    if (s <= w_plus + 1e-9) ++le_plus;
  }
  const double denom = static_cast<double>(count);
  if (alternative > 0) return static_cast<double>(ge_plus) / denom;
  if (alternative < 0) return static_cast<double>(le_plus) / denom;
  return std::min(1.0, 2.0 * static_cast<double>(le_min) / denom);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("gsgd_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace gsgd::testing
