#include "gsgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsgd::kernels {
namespace {

void add_example_gradient(const WeightMatrix& w, const Example& ex, std::span<double> probs,
                          GradientMatrix& sum) {
  model::predict_probs_into(w, ex.features, probs);
  const std::size_t f = ex.features.size();
  for (std::size_t k = 0; k < w.rows(); ++k) {
    const double residual = probs[k] - (k == ex.label ? 1.0 : 0.0);
    auto g = sum.row(k);
    for (std::size_t j = 0; j < f; ++j) g[j] += residual * ex.features[j];
    g[f] += residual;
  }
}

double example_loss(const WeightMatrix& w, const Example& ex, std::span<double> probs) {
  model::predict_probs_into(w, ex.features, probs);
  const double p = std::clamp(probs[ex.label], model::kProbFloor, 1.0 - model::kProbFloor);
  return -std::log(p);
}

}  // namespace

void check_examples(const WeightMatrix& w, std::span<const Example> examples) {
  const std::size_t f = w.cols() - 1;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].features.size() != f) {
      throw InputError("example " + std::to_string(i) + " has " +
                       std::to_string(examples[i].features.size()) + " features, expected " +
                       std::to_string(f));
    }
    if (examples[i].label >= w.rows()) {
      throw InputError("example " + std::to_string(i) + " has label " +
                       std::to_string(examples[i].label) + " outside [0, " +
                       std::to_string(w.rows()) + ")");
    }
  }
}

namespace serial {

GradientMatrix gradient_sum(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  GradientMatrix sum(w.rows(), w.cols());
  std::vector<double> probs(w.rows());
  for (const Example& ex : examples) add_example_gradient(w, ex, probs, sum);
  return sum;
}

double loss_sum(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  std::vector<double> probs(w.rows());
  double total = 0.0;
  for (const Example& ex : examples) total += example_loss(w, ex, probs);
  return total;
}

std::size_t correct_count(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  std::size_t hits = 0;
  for (const Example& ex : examples) {
    if (model::predict_class(w, ex.features) == ex.label) ++hits;
  }
  return hits;
}

}  // namespace serial

namespace parallel {

GradientMatrix gradient_sum(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  const int threads = max_threads();
  std::vector<GradientMatrix> partial(static_cast<std::size_t>(threads),
                                      GradientMatrix(w.rows(), w.cols()));
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#else
    const std::size_t tid = 0;
#endif
    std::vector<double> probs(w.rows());
    GradientMatrix& local = partial[tid];
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      add_example_gradient(w, examples[static_cast<std::size_t>(i)], probs, local);
    }
  }
  GradientMatrix sum(w.rows(), w.cols());
  for (const auto& p : partial) sum.add_scaled(p, 1.0);
  return sum;
}

double loss_sum(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  const int threads = max_threads();
  std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#else
    const std::size_t tid = 0;
#endif
    std::vector<double> probs(w.rows());
    double local = 0.0;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      local += example_loss(w, examples[static_cast<std::size_t>(i)], probs);
    }
    partial[tid] = local;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::size_t correct_count(const WeightMatrix& w, std::span<const Example> examples) {
  check_examples(w, examples);
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::size_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Example& ex = examples[static_cast<std::size_t>(i)];
    if (model::predict_class(w, ex.features) == ex.label) ++hits;
  }
  return hits;
}

}  // namespace parallel

bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace gsgd::kernels
