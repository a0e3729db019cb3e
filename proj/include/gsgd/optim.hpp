#pragma once

#include <cstdint>
#include <string_view>

#include "gsgd/matrix.hpp"

namespace gsgd::optim {

enum class Rule { vanilla, rmsprop, adagrad };

// How the RMSprop accumulator is seeded on the first step.
//   paper:  r_1 = |v_1|  (the gradient itself; magnitude keeps the root real)
//   square: r_1 = v_1^2  (the conventional form)
enum class RmspropInit { paper, square };

inline constexpr double kDefaultEta = 0.2;
inline constexpr double kDefaultBeta = 0.9;
inline constexpr double kDefaultEpsilon = 1e-8;

struct OptimizerState {
  Rule rule = Rule::vanilla;
  Matrix accumulator;  // r_t (RMSprop) or running sum of g^2 (Adagrad)
  std::int64_t step_count = 0;
  double eta = kDefaultEta;
  double beta = kDefaultBeta;
  double epsilon = kDefaultEpsilon;
  RmspropInit rmsprop_init = RmspropInit::paper;
};

// Validated state with a zero accumulator shaped like the weights.
OptimizerState make_state(Rule rule, const Matrix& weights_shape, double eta = kDefaultEta,
                          RmspropInit init = RmspropInit::paper);

// In-place updates of `w`. Each throws NumericError (naming the step) if `g`
// has a non-finite entry, and InputError on a shape mismatch.
void step_vanilla(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g);
void step_rmsprop(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g);
void step_adagrad(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g);

// Dispatch on state.rule.
void apply(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g);

std::string_view to_string(Rule rule);
std::string_view to_string(RmspropInit init);

}  // namespace gsgd::optim
