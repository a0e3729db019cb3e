#include "gsgd/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsgd/kernels.hpp"
#include "gsgd/rng.hpp"

namespace gsgd::model {

void predict_probs_into(const WeightMatrix& w, std::span<const double> x, std::span<double> out) {
  const std::size_t k_classes = w.rows();
  const std::size_t f = x.size();
  if (w.cols() != f + 1) {
    throw InputError("feature vector has length " + std::to_string(f) + ", weights expect " +
                     std::to_string(w.cols() - 1));
  }
  if (out.size() != k_classes) throw InputError("probability buffer has wrong length");

  double max_score = -INFINITY;
  for (std::size_t k = 0; k < k_classes; ++k) {
    auto row = w.row(k);
    double s = row[f];
    for (std::size_t j = 0; j < f; ++j) s += row[j] * x[j];
    out[k] = s;
    max_score = std::max(max_score, s);
  }
  double total = 0.0;
  for (double& s : out) {
    s = std::exp(s - max_score);
    total += s;
  }
  for (double& s : out) s /= total;
}

std::vector<double> predict_probs(const WeightMatrix& w, std::span<const double> x) {
  std::vector<double> p(w.rows());
  predict_probs_into(w, x, p);
  return p;
}

std::size_t predict_class(const WeightMatrix& w, std::span<const double> x) {
  const std::size_t f = x.size();
  if (w.cols() != f + 1) throw InputError("feature vector does not match weight shape");
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t k = 0; k < w.rows(); ++k) {
    auto row = w.row(k);
    double s = row[f];
    for (std::size_t j = 0; j < f; ++j) s += row[j] * x[j];
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

double loss(const WeightMatrix& w, std::span<const Example> examples) {
  if (examples.empty()) throw InputError("loss of an empty set");
  return kernels::serial::loss_sum(w, examples) / static_cast<double>(examples.size());
}

GradientMatrix gradient(const WeightMatrix& w, std::span<const Example> examples) {
  if (examples.empty()) throw InputError("gradient of an empty set");
  GradientMatrix g = kernels::serial::gradient_sum(w, examples);
  g.scale(1.0 / static_cast<double>(examples.size()));
  return g;
}

double accuracy(const WeightMatrix& w, std::span<const Example> examples) {
  if (examples.empty()) throw InputError("accuracy of an empty set");
  return static_cast<double>(kernels::serial::correct_count(w, examples)) /
         static_cast<double>(examples.size());
}

WeightMatrix init_weights(std::size_t num_classes, std::size_t num_features, std::uint64_t seed) {
  if (num_classes < 2) throw InputError("need at least two classes");
  WeightMatrix w(num_classes, num_features + 1);
  Rng rng({seed, stream::kInit});
  for (double& v : w.values()) v = rng.uniform(-kInitRange, kInitRange);
  return w;
}

}  // namespace gsgd::model
