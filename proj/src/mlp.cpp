#include "goalcraft/mlp.hpp"

#include <Eigen/Core>
#include <cmath>

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"

namespace goalcraft {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using ConstRowVec = Eigen::Map<const Eigen::RowVectorXd>;

ConstMatMap as_matrix(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
MatMap as_matrix(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

const Tensor& lookup(const ParamStore& params, const std::string& name,
                     const std::vector<std::size_t>& shape) {
  auto it = params.find(name);
  if (it == params.end()) throw ShapeError("missing parameter tensor '" + name + "'");
  if (it->second.shape() != shape) {
    throw ShapeError("parameter '" + name + "' has shape " + shape_string(it->second.shape()) +
                     ", expected " + shape_string(shape));
  }
  return it->second;
}

void activate(Activation act, const Tensor& z, Tensor& out) {
  const std::size_t n = z.size();
  const double* src = z.data();
  double* dst = out.data();
  switch (act) {
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
      break;
    case Activation::linear:
      for (std::size_t i = 0; i < n; ++i) dst[i] = src[i];
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
      break;
  }
}

// grad <- grad * act'(z), in place.
void activate_backward(Activation act, const Tensor& z, Tensor& grad) {
  const std::size_t n = z.size();
  const double* pre = z.data();
  double* g = grad.data();
  switch (act) {
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(pre[i] > 0.0)) g[i] = 0.0;
      }
      break;
    case Activation::linear:
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) {
        const double t = std::tanh(pre[i]);
        g[i] *= 1.0 - t * t;
      }
      break;
  }
}

Activation layer_activation(const MlpSpec& spec, std::size_t layer) {
  return layer + 1 == spec.num_layers() ? spec.output_activation : spec.hidden_activation;
}

template <bool KeepCache>
Tensor run_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                   std::string_view prefix, MlpCache* cache) {
  if (input.rank() != 2 || input.cols() != spec.input_dim) {
    throw ShapeError("mlp input has shape " + shape_string(input.shape()) + ", expected [batch, " +
                     std::to_string(spec.input_dim) + "]");
  }
  const std::size_t batch = input.rows();
  Tensor x = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_in(l);
    const std::size_t out = spec.layer_out(l);
    const Tensor& w = lookup(params, weight_name(prefix, l), {in, out});
    const Tensor& b = lookup(params, bias_name(prefix, l), {out});

    Tensor z = Tensor::matrix(batch, out);
    auto zm = as_matrix(z);
    zm.noalias() = as_matrix(x) * as_matrix(w);
    zm.rowwise() += ConstRowVec(b.data(), static_cast<Eigen::Index>(out));

    Tensor a = Tensor::matrix(batch, out);
    activate(layer_activation(spec, l), z, a);
    if constexpr (KeepCache) {
      cache->layer_inputs.push_back(std::move(x));
      cache->pre_activations.push_back(std::move(z));
    }
    x = std::move(a);
  }
  return x;
}

}  // namespace

std::size_t MlpSpec::layer_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_widths.at(layer - 1);
}

std::size_t MlpSpec::layer_out(std::size_t layer) const {
  return layer < hidden_widths.size() ? hidden_widths[layer] : output_dim;
}

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw ContractError("mlp dimensions must be >= 1");
  for (auto w : hidden_widths) {
    if (w == 0) throw ContractError("mlp hidden widths must be >= 1");
  }
}

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) n += (layer_in(l) + 1) * layer_out(l);
  return n;
}

MlpSpec three_layer_mlp(std::size_t input_dim, std::size_t width, std::size_t output_dim,
                        Activation output) {
  return MlpSpec{input_dim, {width, width, width}, output_dim, Activation::relu, output};
}

std::string weight_name(std::string_view prefix, std::size_t layer) {
  return std::string(prefix) + "W" + std::to_string(layer);
}

std::string bias_name(std::string_view prefix, std::size_t layer) {
  return std::string(prefix) + "b" + std::to_string(layer);
}

void init_params_into(ParamStore& store, const MlpSpec& spec, std::string_view prefix, Rng& rng) {
  spec.validate();
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_in(l);
    const std::size_t out = spec.layer_out(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Tensor w = Tensor::matrix(in, out);
    for (auto& v : w.values()) v = rng.uniform(-bound, bound);
    store.insert_or_assign(weight_name(prefix, l), std::move(w));
    store.insert_or_assign(bias_name(prefix, l), Tensor({out}));
  }
}

ParamStore init_params(const MlpSpec& spec, std::uint64_t seed) {
  ParamStore store;
  Rng rng(seed);
  init_params_into(store, spec, "", rng);
  return store;
}

MlpCache mlp_forward(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                     std::string_view prefix) {
  MlpCache cache;
  cache.layer_inputs.reserve(spec.num_layers());
  cache.pre_activations.reserve(spec.num_layers());
  cache.output = run_forward<true>(spec, params, input, prefix, &cache);
  return cache;
}

Tensor mlp_apply(const MlpSpec& spec, const ParamStore& params, const Tensor& input,
                 std::string_view prefix) {
  return run_forward<false>(spec, params, input, prefix, nullptr);
}

MlpGrads mlp_backward(const MlpSpec& spec, const ParamStore& params, const MlpCache& cache,
                      const Tensor& upstream, std::string_view prefix, bool want_param_grads) {
  if (cache.layer_inputs.size() != spec.num_layers() ||
      cache.pre_activations.size() != spec.num_layers()) {
    throw ShapeError("mlp cache holds " + std::to_string(cache.layer_inputs.size()) +
                     " layers, spec has " + std::to_string(spec.num_layers()));
  }
  if (upstream.shape() != cache.output.shape()) {
    throw ShapeError("upstream gradient shape " + shape_string(upstream.shape()) +
                     " does not match output " + shape_string(cache.output.shape()));
  }

  MlpGrads grads;
  Tensor delta = upstream;
  for (std::size_t l = spec.num_layers(); l-- > 0;) {
    const std::size_t in = spec.layer_in(l);
    const std::size_t out = spec.layer_out(l);
    const Tensor& z = cache.pre_activations[l];
    const Tensor& x = cache.layer_inputs[l];
    if (z.cols() != out || x.cols() != in) {
      throw ShapeError("mlp cache layer " + std::to_string(l) + " does not match spec");
    }
    activate_backward(layer_activation(spec, l), z, delta);

    if (want_param_grads) {
      Tensor dw = Tensor::matrix(in, out);
      as_matrix(dw).noalias() = as_matrix(x).transpose() * as_matrix(delta);
      Tensor db({out});
      Eigen::Map<Eigen::RowVectorXd>(db.data(), static_cast<Eigen::Index>(out)) =
          as_matrix(delta).colwise().sum();
      grads.params.insert_or_assign(weight_name(prefix, l), std::move(dw));
      grads.params.insert_or_assign(bias_name(prefix, l), std::move(db));
    }

    const Tensor& w = lookup(params, weight_name(prefix, l), {in, out});
    Tensor dx = Tensor::matrix(x.rows(), in);
    as_matrix(dx).noalias() = as_matrix(delta) * as_matrix(w).transpose();
    delta = std::move(dx);
  }
  grads.input = std::move(delta);
  return grads;
}

}  // namespace goalcraft
