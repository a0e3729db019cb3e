#include <cmath>
#include <limits>

#include "doctest.h"
#include "gsgd/errors.hpp"
#include "gsgd/optim.hpp"
#include "test_support.hpp"

using namespace gsgd;
using optim::Rule;

namespace {

Matrix scalar(double v) { return Matrix(1, 1, v); }

}  // namespace

TEST_CASE("vanilla step") {
  auto w = scalar(1.0);
  auto s = optim::make_state(Rule::vanilla, w, 0.2);
  SUBCASE("formula") {
    optim::step_vanilla(s, w, scalar(0.5));
    CHECK(w(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s.step_count == 1);
  }
  SUBCASE("zero gradient is a no-op") {
    optim::step_vanilla(s, w, scalar(0.0));
    CHECK(w(0, 0) == 1.0);
  }
  SUBCASE("two steps equal one summed step") {
    Rng rng({41, 0});
    auto a = testing::random_weights(rng, 2, 3);
    auto b = a;
    const auto g1 = testing::random_weights(rng, 2, 3);
    const auto g2 = testing::random_weights(rng, 2, 3);
    auto sa = optim::make_state(Rule::vanilla, a, 0.2);
    optim::step_vanilla(sa, a, g1);
    optim::step_vanilla(sa, a, g2);
    auto sum = g1;
    sum.add_scaled(g2, 1.0);
    auto sb = optim::make_state(Rule::vanilla, b, 0.2);
    optim::step_vanilla(sb, b, sum);
    CHECK(max_relative_difference(a, b, 1e-12) <= 1e-12);
  }
}

TEST_CASE("rmsprop steps") {
  auto w = scalar(1.0);
  auto s = optim::make_state(Rule::rmsprop, w, 0.2);
  optim::step_rmsprop(s, w, scalar(0.5));
  CHECK(s.accumulator(0, 0) == 0.5);
  CHECK(w(0, 0) == doctest::Approx(1.0 - 0.2 * 0.5 / std::sqrt(0.5 + 1e-8)).epsilon(1e-15));
  CHECK(w(0, 0) == doctest::Approx(0.85858).epsilon(1e-5));

  const double before = w(0, 0);
  optim::step_rmsprop(s, w, scalar(0.5));
  CHECK(s.accumulator(0, 0) == doctest::Approx(0.475).epsilon(1e-15));
  CHECK(before - w(0, 0) == doctest::Approx(0.2 * 0.5 / std::sqrt(0.475 + 1e-8)).epsilon(1e-12));
  CHECK(before - w(0, 0) == doctest::Approx(0.14510).epsilon(1e-4));
}

TEST_CASE("rmsprop initial accumulator variants") {
  SUBCASE("negative first gradient keeps the root real") {
    auto w = scalar(1.0);
    auto s = optim::make_state(Rule::rmsprop, w, 0.2);
    optim::step_rmsprop(s, w, scalar(-0.5));
    CHECK(s.accumulator(0, 0) == 0.5);
    CHECK(w(0, 0) == doctest::Approx(1.0 + 0.2 * 0.5 / std::sqrt(0.5 + 1e-8)).epsilon(1e-15));
  }
  SUBCASE("square") {
    auto w = scalar(1.0);
    auto s = optim::make_state(Rule::rmsprop, w, 0.2, optim::RmspropInit::square);
    optim::step_rmsprop(s, w, scalar(0.5));
    CHECK(s.accumulator(0, 0) == 0.25);
    CHECK(w(0, 0) == doctest::Approx(1.0 - 0.2 * 0.5 / std::sqrt(0.25 + 1e-8)).epsilon(1e-15));
  }
}

TEST_CASE("rmsprop zero gradient is a no-op on any step") {
  auto w = scalar(1.0);
  auto s = optim::make_state(Rule::rmsprop, w, 0.2);
  optim::step_rmsprop(s, w, scalar(0.0));
  CHECK(w(0, 0) == 1.0);
  optim::step_rmsprop(s, w, scalar(0.3));
  const double mid = w(0, 0);
  optim::step_rmsprop(s, w, scalar(0.0));
  CHECK(w(0, 0) == mid);
}

TEST_CASE("adagrad steps") {
  auto w = scalar(1.0);
  auto s = optim::make_state(Rule::adagrad, w, 0.2);
  SUBCASE("first step") {
    optim::step_adagrad(s, w, scalar(0.5));
    CHECK(s.accumulator(0, 0) == 0.25);
    CHECK(1.0 - w(0, 0) == doctest::Approx(0.2).epsilon(1e-7));
  }
  SUBCASE("zero gradient leaves weights and accumulator") {
    optim::step_adagrad(s, w, scalar(0.0));
    CHECK(w(0, 0) == 1.0);
    CHECK(s.accumulator(0, 0) == 0.0);
  }
  SUBCASE("repeated gradient takes shrinking steps") {
    double prev = w(0, 0);
    double last_step = std::numeric_limits<double>::infinity();
    double last_acc = 0.0;
    for (int i = 0; i < 5; ++i) {
      optim::step_adagrad(s, w, scalar(0.5));
      const double step = prev - w(0, 0);
      CHECK(step < last_step);
      CHECK(s.accumulator(0, 0) >= last_acc);
      last_step = step;
      last_acc = s.accumulator(0, 0);
      prev = w(0, 0);
    }
  }
}

TEST_CASE("adaptive step magnitude is bounded by eta |g| / sqrt(eps)") {
  Rng rng({42, 0});
  for (Rule rule : {Rule::rmsprop, Rule::adagrad}) {
    auto w = testing::random_weights(rng, 3, 4);
    auto s = optim::make_state(rule, w, 0.2);
    for (int i = 0; i < 20; ++i) {
      const auto g = testing::random_weights(rng, 3, 4, 1e-3);
      const auto before = w;
      optim::apply(s, w, g);
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double bound = 0.2 * std::abs(g.values()[j]) / std::sqrt(1e-8);
        CHECK(std::abs(before.values()[j] - w.values()[j]) <= bound * (1 + 1e-12));
      }
      for (double a : s.accumulator.values()) CHECK(a >= 0.0);
    }
  }
}

TEST_CASE("non-finite gradients and bad shapes are rejected") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Rule rule : {Rule::vanilla, Rule::rmsprop, Rule::adagrad}) {
    auto w = scalar(1.0);
    auto s = optim::make_state(rule, w);
    CHECK_THROWS_AS(optim::apply(s, w, scalar(nan)), NumericError);
    CHECK(w(0, 0) == 1.0);
    CHECK_THROWS_AS(optim::apply(s, w, Matrix(2, 1)), InputError);
  }
}

TEST_CASE("state validation") {
  const Matrix shape(2, 2);
  CHECK_THROWS_AS(optim::make_state(Rule::vanilla, shape, 0.0), InputError);
  CHECK_THROWS_AS(optim::make_state(Rule::vanilla, shape, -1.0), InputError);
  CHECK(optim::to_string(Rule::adagrad) == "adagrad");
}
