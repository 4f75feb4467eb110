#include <doctest.h>

#include <cmath>

#include "goalcraft/adam.hpp"
#include "goalcraft/error.hpp"
#include "goalcraft/mlp.hpp"
#include "goalcraft/trainer.hpp"
#include "helpers.hpp"

using namespace goalcraft;

TEST_SUITE("mlp") {
  TEST_CASE("hand-computed forward pass of a 2-3-1 relu net") {
    MlpSpec spec{2, {3}, 1, Activation::relu, Activation::linear};
    ParamStore p;
    p["W0"] = Tensor({2, 3}, std::vector<double>{1, -1, 0.5, 2, 0, -1});
    p["b0"] = Tensor({3}, std::vector<double>{0, 1, -0.5});
    p["W1"] = Tensor({3, 1}, std::vector<double>{1, 2, 3});
    p["b1"] = Tensor({1}, std::vector<double>{0.25});
    Tensor x({2, 2}, std::vector<double>{1, 2, -1, 0});
    // row 0: z = [5, 0, -2] -> relu [5, 0, 0] -> 5.25
    // row 1: z = [-1, 2, -1] -> relu [0, 2, 0] -> 4.25
    MlpCache c = mlp_forward(spec, p, x);
    CHECK(c.output(0, 0) == doctest::Approx(5.25).epsilon(1e-15));
    CHECK(c.output(1, 0) == doctest::Approx(4.25).epsilon(1e-15));
    CHECK(c.pre_activations[0](0, 2) == doctest::Approx(-2.0));
    CHECK(mlp_apply(spec, p, x) == c.output);
  }

  TEST_CASE("relu derivative is zero at the kink") {
    MlpSpec spec{1, {1}, 1, Activation::relu, Activation::linear};
    ParamStore p;
    p["W0"] = Tensor({1, 1}, std::vector<double>{1});
    p["b0"] = Tensor({1}, std::vector<double>{0});
    p["W1"] = Tensor({1, 1}, std::vector<double>{1});
    p["b1"] = Tensor({1}, std::vector<double>{0});
    Tensor x({1, 1}, std::vector<double>{0.0});
    MlpCache c = mlp_forward(spec, p, x);
    MlpGrads g = mlp_backward(spec, p, c, Tensor({1, 1}, 1.0));
    CHECK(g.input[0] == 0.0);
    CHECK(g.params.at("b0")[0] == 0.0);
  }

  TEST_CASE("parameter counts") {
    // (in*w + w) + 2(w*w + w) + (w*out + out)
    auto oracle = [](std::size_t in, std::size_t w, std::size_t out) {
      return in * w + w + 2 * (w * w + w) + w * out + out;
    };
    CHECK(three_layer_mlp(8, 64, 1).param_count() == 8961);
    CHECK(three_layer_mlp(32, 256, 1).param_count() == 140289);
    CHECK(actor_net(64).param_count() == oracle(6, 64, 2));
    ParamStore p = init_params(three_layer_mlp(5, 7, 3), 1);
    CHECK(param_count(p) == oracle(5, 7, 3));
    CHECK(p.at(weight_name("", 0)).shape() == std::vector<std::size_t>{5, 7});
  }

  TEST_CASE("initialisation bounds and determinism") {
    MlpSpec spec = three_layer_mlp(9, 16, 2);
    ParamStore a = init_params(spec, 42), b = init_params(spec, 42), c = init_params(spec, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_in(l)));
      for (double w : a.at(weight_name("", l)).values()) CHECK(std::abs(w) <= bound);
      for (double v : a.at(bias_name("", l)).values()) CHECK(v == 0.0);
    }
  }

  TEST_CASE("gradients match finite differences") {
    Rng rng(5);
    for (Activation out : {Activation::linear, Activation::tanh}) {
      for (int trial = 0; trial < 10; ++trial) {
        MlpSpec spec = three_layer_mlp(4, 12, 3, out);
        ParamStore p = init_params(spec, 100 + trial);
        for (auto& [name, t] : p) {
          if (name[0] == 'b') for (auto& v : t.values()) v = rng.uniform(-0.1, 0.1);
        }
        Tensor x = gc_test::random_tensor(5, 4, rng);
        GradCheckReport rep = grad_check(spec, p, x, 1e-5);
        CHECK_MESSAGE(rep.passed, "worst relative error " << rep.worst);
        CHECK(rep.entries.size() == p.size() + 1);
      }
    }
  }

  TEST_CASE("actor gradients match finite differences") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      MlpSpec spec = actor_net(64);
      ParamStore p = init_params(spec, 200 + trial);
      Tensor x = gc_test::random_tensor(4, 6, rng);
      GradCheckReport rep = grad_check(spec, p, x, 1e-5);
      CHECK_MESSAGE(rep.passed, "worst relative error " << rep.worst);
    }
  }

  TEST_CASE("a broken backward pass is caught") {
    Rng rng(7);
    MlpSpec spec = three_layer_mlp(3, 8, 1);
    ParamStore p = init_params(spec, 1);
    Tensor x = gc_test::random_tensor(4, 3, rng);
    BackwardFn skewed = [](const MlpSpec& s, const ParamStore& ps, const MlpCache& c,
                           const Tensor& up) {
      MlpGrads g = mlp_backward(s, ps, c, up);
      for (auto& v : g.params.at("W1").values()) v *= 1.01;
      return g;
    };
    GradCheckReport rep = grad_check(spec, p, x, 1e-5, skewed);
    CHECK_FALSE(rep.passed);
  }

  TEST_CASE("shape errors") {
    MlpSpec spec = three_layer_mlp(3, 4, 1);
    ParamStore p = init_params(spec, 1);
    CHECK_THROWS_AS(mlp_forward(spec, p, Tensor::matrix(2, 4)), ShapeError);
    p.erase("W2");
    CHECK_THROWS(mlp_forward(spec, p, Tensor::matrix(2, 3)));
  }
}
