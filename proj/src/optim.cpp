#include "gsgd/optim.hpp"

#include <cmath>
#include <string>

namespace gsgd::optim {
namespace {

void check_step(const OptimizerState& state, const WeightMatrix& w, const GradientMatrix& g) {
  if (!w.same_shape(g)) throw InputError("gradient shape does not match weights");
  if (!g.all_finite()) {
    throw NumericError("non-finite gradient entry at optimizer step " +
                       std::to_string(state.step_count + 1));
  }
}

void ensure_accumulator(OptimizerState& state, const WeightMatrix& w) {
  if (!state.accumulator.same_shape(w)) state.accumulator = Matrix(w.rows(), w.cols());
}

}  // namespace

OptimizerState make_state(Rule rule, const Matrix& weights_shape, double eta, RmspropInit init) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("learning rate must be positive");
  OptimizerState s;
  s.rule = rule;
  s.eta = eta;
  s.rmsprop_init = init;
  s.accumulator = Matrix(weights_shape.rows(), weights_shape.cols());
  return s;
}

void step_vanilla(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g) {
  check_step(state, w, g);
  auto wv = w.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= state.eta * gv[i];
  ++state.step_count;
}

void step_rmsprop(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g) {
  check_step(state, w, g);
  ensure_accumulator(state, w);
  auto wv = w.values();
  auto gv = g.values();
  auto acc = state.accumulator.values();
  const bool first = state.step_count == 0;
  for (std::size_t i = 0; i < wv.size(); ++i) {
    if (first) {
      acc[i] = state.rmsprop_init == RmspropInit::paper ? std::abs(gv[i]) : gv[i] * gv[i];
    } else {
      acc[i] = state.beta * acc[i] + (1.0 - state.beta) * gv[i] * gv[i];
    }
    wv[i] -= state.eta * gv[i] / std::sqrt(acc[i] + state.epsilon);
  }
  ++state.step_count;
}

void step_adagrad(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g) {
  check_step(state, w, g);
  ensure_accumulator(state, w);
  auto wv = w.values();
  auto gv = g.values();
  auto acc = state.accumulator.values();
  for (std::size_t i = 0; i < wv.size(); ++i) {
    acc[i] += gv[i] * gv[i];
    wv[i] -= state.eta * gv[i] / std::sqrt(acc[i] + state.epsilon);
  }
  ++state.step_count;
}

void apply(OptimizerState& state, WeightMatrix& w, const GradientMatrix& g) {
  switch (state.rule) {
    case Rule::vanilla:
      return step_vanilla(state, w, g);
    case Rule::rmsprop:
      return step_rmsprop(state, w, g);
    case Rule::adagrad:
      return step_adagrad(state, w, g);
  }
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::vanilla:
      return "vanilla";
    case Rule::rmsprop:
      return "rmsprop";
    case Rule::adagrad:
      return "adagrad";
  }
  return "?";
}

std::string_view to_string(RmspropInit init) {
  return init == RmspropInit::paper ? "paper" : "square";
}

}  // namespace gsgd::optim
