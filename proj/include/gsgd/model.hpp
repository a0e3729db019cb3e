#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsgd/matrix.hpp"

namespace gsgd {

struct Example {
  std::vector<double> features;
  std::size_t label = 0;
};

struct MiniBatch {
  std::int64_t id = 0;
  std::vector<Example> examples;
};

namespace model {

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before the log.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kInitRange = 0.05;

// Class scores dot(row_k, [x; 1]) followed by a max-shifted softmax, written
// into `out` (length K). `x` must have length F = W.cols() - 1.
void predict_probs_into(const WeightMatrix& w, std::span<const double> x, std::span<double> out);

std::vector<double> predict_probs(const WeightMatrix& w, std::span<const double> x);

// argmax of the class scores; ties go to the lowest class index.
std::size_t predict_class(const WeightMatrix& w, std::span<const double> x);

// Mean clamped cross-entropy over a non-empty set.
double loss(const WeightMatrix& w, std::span<const Example> examples);
inline double loss(const WeightMatrix& w, const MiniBatch& batch) { return loss(w, batch.examples); }

// Mean over examples of (p - onehot(y)) (x) [x; 1].
GradientMatrix gradient(const WeightMatrix& w, std::span<const Example> examples);
inline GradientMatrix gradient(const WeightMatrix& w, const MiniBatch& batch) {
  return gradient(w, batch.examples);
}

double accuracy(const WeightMatrix& w, std::span<const Example> examples);

// K x (F + 1) matrix, entries uniform in [-0.05, 0.05] from the given seed.
WeightMatrix init_weights(std::size_t num_classes, std::size_t num_features, std::uint64_t seed);

}  // namespace model
}  // namespace gsgd
