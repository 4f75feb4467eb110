#include "goalcraft/adam.hpp"

#include <algorithm>
#include <cmath>

#include "goalcraft/error.hpp"

namespace goalcraft {

AdamState make_adam_state(const ParamStore& params, AdamConfig hp) {
  AdamState state;
  state.hp = hp;
  for (const auto& [name, t] : params) {
    state.m.emplace(name, Tensor(t.shape()));
    state.v.emplace(name, Tensor(t.shape()));
  }
  return state;
}

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeError("adam: gradient for unknown parameter '" + name + "'");
    if (it->second.shape() != g.shape()) {
      throw ShapeError("adam: gradient '" + name + "' has shape " + shape_string(g.shape()) +
                       ", parameter has " + shape_string(it->second.shape()));
    }
    if (!g.all_finite()) throw NumericalError("adam: non-finite gradient in '" + name + "'");
    if (!state.m.contains(name) || !state.v.contains(name)) {
      throw ShapeError("adam: optimizer state has no moments for '" + name + "'");
    }
  }

  state.t += 1;
  const auto& hp = state.hp;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
  }
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0;
  double scale = 1e-7;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

namespace {

double summed_output(const MlpSpec& spec, const ParamStore& params, const Tensor& input) {
  Tensor out = mlp_apply(spec, params, input);
  double s = 0.0;
  for (double v : out.values()) s += v;
  return s;
}

}  // namespace

GradCheckReport grad_check(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                           double tolerance, const BackwardFn& backward) {
  if (!(tolerance > 0.0)) throw ContractError("grad_check: tolerance must be positive");
  constexpr double h = 1e-6;

  MlpCache cache = mlp_forward(spec, params, input);
  Tensor ones(cache.output.shape(), 1.0);
  MlpGrads analytic = backward ? backward(spec, params, cache, ones)
                              : mlp_backward(spec, params, cache, ones);

  GradCheckReport report;
  ParamStore probe = params;
  for (auto& [name, tensor] : probe) {
    std::vector<double> numeric(tensor.size());
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double orig = tensor[i];
      tensor[i] = orig + h;
      const double up = summed_output(spec, probe, input);
      tensor[i] = orig - h;
      const double down = summed_output(spec, probe, input);
      tensor[i] = orig;
      numeric[i] = (up - down) / (2.0 * h);
    }
    report.entries.push_back({name, relative_error(analytic.params.at(name).values(), numeric)});
  }

  Tensor x = input;
  std::vector<double> numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = summed_output(spec, params, x);
    x[i] = orig - h;
    const double down = summed_output(spec, params, x);
    x[i] = orig;
    numeric[i] = (up - down) / (2.0 * h);
  }
  report.entries.push_back({"<input>", relative_error(analytic.input.values(), numeric)});

  for (const auto& e : report.entries) report.worst = std::max(report.worst, e.max_rel_error);
  report.passed = report.worst <= tolerance;
  return report;
}

}  // namespace goalcraft
