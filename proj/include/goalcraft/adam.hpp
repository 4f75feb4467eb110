#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "goalcraft/mlp.hpp"
#include "goalcraft/tensor.hpp"

namespace goalcraft {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig hp;
  ParamStore m;
  ParamStore v;
  std::int64_t t = 0;
};

AdamState make_adam_state(const ParamStore& params, AdamConfig hp = {});

/// One bias-corrected Adam step. Only tensors named in `grads` move, which is
/// how frozen parameters are expressed. A non-finite gradient aborts the step
/// before anything is modified.
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state);

struct GradCheckEntry {
  std::string name;  // parameter name, or "<input>"
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  bool passed = false;
};

/// Per-tensor gradient comparison: max |analytic - numeric| divided by the
/// tensor's largest gradient magnitude (floored at 1e-7).
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

using BackwardFn = std::function<MlpGrads(const MlpSpec&, const ParamStore&, const MlpCache&,
                                          const Tensor& upstream)>;

/// Compares analytic gradients of sum(mlp(input)) with central differences
/// (step 1e-6) for every parameter tensor and for the input. `backward`
/// defaults to mlp_backward; tests substitute broken ones as negative controls.
GradCheckReport grad_check(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                           double tolerance, const BackwardFn& backward = {});

}  // namespace goalcraft
