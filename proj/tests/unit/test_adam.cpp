#include <doctest.h>

#include <cmath>
#include <limits>

#include "goalcraft/adam.hpp"
#include "goalcraft/error.hpp"

using namespace goalcraft;

TEST_SUITE("adam") {
  TEST_CASE("first step moves each parameter by lr against the gradient sign") {
    ParamStore p{{"w", Tensor({3}, std::vector<double>{0.0, 1.0, -2.0})}};
    ParamStore g{{"w", Tensor({3}, std::vector<double>{1.0, -4.0, 0.5})}};
    AdamState st = make_adam_state(p, {.lr = 1e-3});
    adam_step(p, g, st);
    // m_hat = g, v_hat = g^2  =>  step = lr * g / (|g| + eps)
    CHECK(p.at("w")[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(p.at("w")[1] == doctest::Approx(1.0 + 1e-3 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));
    CHECK(p.at("w")[2] == doctest::Approx(-2.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(st.t == 1);
  }

  TEST_CASE("matches a scalar reference over many steps") {
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double x = 3.0, m = 0.0, v = 0.0;
    ParamStore p{{"x", Tensor({1}, std::vector<double>{3.0})}};
    AdamState st = make_adam_state(p, {.lr = lr});
    for (int t = 1; t <= 200; ++t) {
      const double grad = 2.0 * (x - 1.0) + std::sin(x);
      m = b1 * m + (1 - b1) * grad;
      v = b2 * v + (1 - b2) * grad * grad;
      const double mh = m / (1 - std::pow(b1, t));
      const double vh = v / (1 - std::pow(b2, t));
      x -= lr * mh / (std::sqrt(vh) + eps);

      ParamStore g{{"x", Tensor({1}, std::vector<double>{2.0 * (p.at("x")[0] - 1.0) + std::sin(p.at("x")[0])})}};
      adam_step(p, g, st);
      REQUIRE(p.at("x")[0] == doctest::Approx(x).epsilon(1e-12));
    }
  }

  TEST_CASE("parameters absent from the gradient store do not move") {
    ParamStore p{{"a", Tensor({2}, 1.0)}, {"b", Tensor({2}, 1.0)}};
    AdamState st = make_adam_state(p);
    ParamStore g{{"a", Tensor({2}, 0.5)}};
    adam_step(p, g, st);
    CHECK(p.at("b") == Tensor({2}, 1.0));
    CHECK(p.at("a")[0] < 1.0);
  }

  TEST_CASE("non-finite gradients abort before any update") {
    ParamStore p{{"a", Tensor({2}, 1.0)}, {"z", Tensor({1}, 1.0)}};
    const ParamStore before = p;
    AdamState st = make_adam_state(p);
    ParamStore g{{"a", Tensor({2}, 0.5)},
                 {"z", Tensor({1}, std::numeric_limits<double>::quiet_NaN())}};
    CHECK_THROWS_AS(adam_step(p, g, st), NumericalError);
    CHECK(p == before);
    CHECK(st.t == 0);
  }

  TEST_CASE("unknown or misshapen gradients are rejected") {
    ParamStore p{{"a", Tensor({2}, 1.0)}};
    AdamState st = make_adam_state(p);
    CHECK_THROWS_AS(adam_step(p, {{"q", Tensor({2}, 1.0)}}, st), ShapeError);
    CHECK_THROWS_AS(adam_step(p, {{"a", Tensor({3}, 1.0)}}, st), ShapeError);
  }

  TEST_CASE("minimises a quadratic bowl") {
    ParamStore p{{"x", Tensor({2}, std::vector<double>{4.0, -3.0})}};
    AdamState st = make_adam_state(p, {.lr = 0.05});
    for (int i = 0; i < 2000; ++i) {
      ParamStore g{{"x", Tensor({2}, std::vector<double>{2 * p.at("x")[0], 8 * p.at("x")[1]})}};
      adam_step(p, g, st);
    }
    CHECK(std::abs(p.at("x")[0]) < 1e-2);
    CHECK(std::abs(p.at("x")[1]) < 1e-2);
  }
}
