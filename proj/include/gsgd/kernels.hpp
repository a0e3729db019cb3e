#pragma once

#include <cstddef>
#include <span>

#include "gsgd/matrix.hpp"
#include "gsgd/model.hpp"

// Batch reductions behind the model functions. `serial` is the reference
// implementation and the only one used on training paths, because its
// summation order is fixed. `parallel` splits the examples over OpenMP
// threads and merges the per-thread partials in thread order; it agrees with
// `serial` up to floating-point reassociation, and exactly for the integer
// count.
namespace gsgd::kernels {

namespace serial {
GradientMatrix gradient_sum(const WeightMatrix& w, std::span<const Example> examples);
double loss_sum(const WeightMatrix& w, std::span<const Example> examples);
std::size_t correct_count(const WeightMatrix& w, std::span<const Example> examples);
}  // namespace serial

namespace parallel {
GradientMatrix gradient_sum(const WeightMatrix& w, std::span<const Example> examples);
double loss_sum(const WeightMatrix& w, std::span<const Example> examples);
std::size_t correct_count(const WeightMatrix& w, std::span<const Example> examples);
}  // namespace parallel

// Throws InputError if any example does not fit the weight shape.
void check_examples(const WeightMatrix& w, std::span<const Example> examples);

bool openmp_enabled() noexcept;
int max_threads() noexcept;

}  // namespace gsgd::kernels
