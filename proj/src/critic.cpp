#include "goalcraft/critic.hpp"

#include <cmath>
#include <cstdlib>

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"

namespace goalcraft {

namespace {

std::size_t input_width(const CriticDims& d, BranchInputs in) {
  return (in.s ? d.state : 0) + (in.a ? d.action : 0) + (in.g ? d.goal : 0);
}

void check_batch(const CriticSpec& spec, const Tensor& s, const Tensor& a, const Tensor& g) {
  auto check = [](const Tensor& t, std::size_t dim, const char* what) {
    if (t.rank() != 2 || t.cols() != dim) {
      throw ShapeError(std::string("critic ") + what + " input has shape " +
                       shape_string(t.shape()) + ", expected [batch, " + std::to_string(dim) + "]");
    }
  };
  check(s, spec.dims.state, "state");
  check(a, spec.dims.action, "action");
  check(g, spec.dims.goal, "goal");
  if (s.rows() != a.rows() || s.rows() != g.rows()) {
    throw ShapeError("critic inputs disagree on batch size: " + std::to_string(s.rows()) + ", " +
                     std::to_string(a.rows()) + ", " + std::to_string(g.rows()));
  }
}

Tensor gather(BranchInputs in, const Tensor& s, const Tensor& a, const Tensor& g) {
  std::vector<const Tensor*> parts;
  if (in.s) parts.push_back(&s);
  if (in.a) parts.push_back(&a);
  if (in.g) parts.push_back(&g);
  return concat_cols(parts);
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Split a branch input gradient back into (s, a, g) pieces and accumulate.
void scatter(BranchInputs in, const Tensor& grad, CriticGrads& out) {
  std::size_t col = 0;
  auto take = [&](bool used, Tensor& dst) {
    if (!used) return;
    add_into(dst, slice_cols(grad, col, dst.cols()));
    col += dst.cols();
  };
  take(in.s, out.s);
  take(in.a, out.a);
  take(in.g, out.g);
}

void merge(ParamStore& dst, ParamStore&& src) {
  for (auto& [name, t] : src) dst.insert_or_assign(name, std::move(t));
}

const Tensor& coef(const CriticParams& params, const char* name, std::size_t d) {
  auto it = params.find(name);
  if (it == params.end()) throw ShapeError(std::string("missing parameter tensor '") + name + "'");
  if (it->second.shape() != std::vector<std::size_t>{d}) {
    throw ShapeError(std::string("parameter '") + name + "' has shape " +
                     shape_string(it->second.shape()));
  }
  return it->second;
}

}  // namespace

std::string to_string(CriticVariant v) {
  switch (v) {
    case CriticVariant::monolithic: return "monolithic";
    case CriticVariant::low_rank_bilinear: return "low_rank_bilinear";
    case CriticVariant::bvn: return "bvn";
    case CriticVariant::l2_metric: return "l2_metric";
    case CriticVariant::linear_combo: return "linear_combo";
    case CriticVariant::concat_head: return "concat_head";
    case CriticVariant::alt_fa_ag: return "alt_fa_ag";
    case CriticVariant::alt_fsag_g: return "alt_fsag_g";
  }
  return "?";
}

CriticVariant parse_critic_variant(const std::string& s) {
  for (CriticVariant v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown critic variant '" + s + "'");
}

bool is_two_branch(CriticVariant v) { return v != CriticVariant::monolithic; }

bool is_dot_product(CriticVariant v) {
  return v == CriticVariant::bvn || v == CriticVariant::low_rank_bilinear ||
         v == CriticVariant::alt_fa_ag || v == CriticVariant::alt_fsag_g;
}

std::size_t default_latent_dim(CriticVariant v) { return v == CriticVariant::l2_metric ? 3 : 16; }

void CriticSpec::validate() const {
  if (latent_dim < 1) throw ContractError("critic.latent_dim must be >= 1");
  if (monolithic_width < 1) throw ContractError("critic.monolithic_width must be >= 1");
  if (is_two_branch(variant) && branch_width < 1) {
    throw ContractError("critic branch width must be >= 1");
  }
  if (dims.state < 1 || dims.action < 1 || dims.goal < 1) {
    throw ContractError("critic dims must all be >= 1");
  }
}

CriticSpec make_critic_spec(CriticVariant variant, CriticDims dims, std::size_t monolithic_width,
                            std::optional<std::size_t> latent_dim) {
  CriticSpec spec;
  spec.variant = variant;
  spec.dims = dims;
  spec.latent_dim = latent_dim.value_or(default_latent_dim(variant));
  spec.monolithic_width = monolithic_width;
  spec.branch_width = matched_width(dims, spec.latent_dim, monolithic_width, variant);
  spec.validate();
  return spec;
}

BranchInputs f_inputs(CriticVariant v) {
  if (v == CriticVariant::alt_fsag_g || v == CriticVariant::monolithic) return {true, true, true};
  return {true, true, false};
}

BranchInputs phi_inputs(CriticVariant v) {
  switch (v) {
    case CriticVariant::low_rank_bilinear:
    case CriticVariant::alt_fsag_g:
      return {false, false, true};
    case CriticVariant::alt_fa_ag:
      return {false, true, true};
    default:
      return {true, false, true};
  }
}

MlpSpec monolithic_net(const CriticSpec& spec) {
  return three_layer_mlp(spec.dims.state + spec.dims.action + spec.dims.goal, spec.monolithic_width,
                         1);
}

MlpSpec f_net(const CriticSpec& spec) {
  return three_layer_mlp(input_width(spec.dims, f_inputs(spec.variant)), spec.branch_width,
                         spec.latent_dim);
}

MlpSpec phi_net(const CriticSpec& spec) {
  return three_layer_mlp(input_width(spec.dims, phi_inputs(spec.variant)), spec.branch_width,
                         spec.latent_dim);
}

MlpSpec head_net(const CriticSpec& spec) {
  return MlpSpec{2 * spec.latent_dim, {spec.latent_dim}, 1, Activation::relu, Activation::linear};
}

CriticParams init_critic(const CriticSpec& spec, std::uint64_t seed) {
  spec.validate();
  CriticParams params;
  if (spec.variant == CriticVariant::monolithic) {
    Rng rng(seed, "critic.q");
    init_params_into(params, monolithic_net(spec), kMonoPrefix, rng);
    return params;
  }
  Rng f_rng(seed, "critic.f");
  init_params_into(params, f_net(spec), kFPrefix, f_rng);
  Rng phi_rng(seed, "critic.phi");
  init_params_into(params, phi_net(spec), kPhiPrefix, phi_rng);
  if (spec.variant == CriticVariant::concat_head) {
    Rng head_rng(seed, "critic.head");
    init_params_into(params, head_net(spec), kHeadPrefix, head_rng);
  }
  if (spec.variant == CriticVariant::linear_combo) {
    Rng coef_rng(seed, "critic.coef");
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
    Tensor w({spec.latent_dim});
    Tensor v({spec.latent_dim});
    for (auto& x : w.values()) x = coef_rng.uniform(-bound, bound);
    for (auto& x : v.values()) x = coef_rng.uniform(-bound, bound);
    params.emplace(kCoefF, std::move(w));
    params.emplace(kCoefPhi, std::move(v));
  }
  return params;
}

void reinit_f_branch(const CriticSpec& spec, CriticParams& params, std::uint64_t seed) {
  if (!is_two_branch(spec.variant)) {
    throw ContractError("reset of the f branch requires a two-branch critic, got " +
                        to_string(spec.variant));
  }
  Rng rng(seed, "critic.f.reinit");
  init_params_into(params, f_net(spec), kFPrefix, rng);
}

bool is_f_branch_param(const std::string& name) { return name.rfind(kFPrefix, 0) == 0; }
bool is_phi_branch_param(const std::string& name) { return name.rfind(kPhiPrefix, 0) == 0; }

std::size_t total_params(const CriticSpec& spec) {
  if (spec.variant == CriticVariant::monolithic) return monolithic_net(spec).param_count();
  std::size_t n = f_net(spec).param_count() + phi_net(spec).param_count();
  if (spec.variant == CriticVariant::concat_head) n += head_net(spec).param_count();
  if (spec.variant == CriticVariant::linear_combo) n += 2 * spec.latent_dim;
  return n;
}

std::size_t matched_width(CriticDims dims, std::size_t latent_dim, std::size_t monolithic_width,
                          CriticVariant variant) {
  if (monolithic_width < 1) throw ContractError("monolithic_width must be >= 1");
  if (variant == CriticVariant::monolithic) return monolithic_width;

  CriticSpec probe;
  probe.variant = CriticVariant::monolithic;
  probe.dims = dims;
  probe.latent_dim = latent_dim;
  probe.monolithic_width = monolithic_width;
  const auto target = static_cast<long long>(total_params(probe));

  probe.variant = variant;
  std::size_t best = 1;
  long long best_gap = -1;
  for (std::size_t w = 1; w <= 4 * monolithic_width + 64; ++w) {
    probe.branch_width = w;
    const auto count = static_cast<long long>(total_params(probe));
    const long long gap = std::llabs(count - target);
    if (best_gap < 0 || gap < best_gap) {
      best = w;
      best_gap = gap;
    }
    if (count > target) break;  // counts grow with w, so the gap only widens from here
  }
  return best;
}

CriticForward critic_forward(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                             const Tensor& a, const Tensor& g) {
  check_batch(spec, s, a, g);
  const std::size_t batch = s.rows();
  CriticForward fwd;
  fwd.q = Tensor({batch});

  if (spec.variant == CriticVariant::monolithic) {
    fwd.mono = mlp_forward(monolithic_net(spec), params, gather({true, true, true}, s, a, g),
                           kMonoPrefix);
    for (std::size_t i = 0; i < batch; ++i) fwd.q[i] = fwd.mono.output[i];
    return fwd;
  }

  fwd.f = mlp_forward(f_net(spec), params, gather(f_inputs(spec.variant), s, a, g), kFPrefix);
  fwd.phi = mlp_forward(phi_net(spec), params, gather(phi_inputs(spec.variant), s, a, g), kPhiPrefix);

  if (spec.variant == CriticVariant::concat_head) {
    const Tensor* parts[] = {&fwd.f.output, &fwd.phi.output};
    fwd.head = mlp_forward(head_net(spec), params, concat_cols(parts), kHeadPrefix);
    for (std::size_t i = 0; i < batch; ++i) fwd.q[i] = fwd.head.output[i];
    return fwd;
  }
  fwd.q = combine_embeddings(spec, params, fwd.f.output, fwd.phi.output);
  return fwd;
}

Tensor combine_embeddings(const CriticSpec& spec, const CriticParams& params, const Tensor& f,
                          const Tensor& phi) {
  const std::size_t d = spec.latent_dim;
  if (f.rank() != 2 || f.cols() != d || f.shape() != phi.shape()) {
    throw ShapeError("embeddings must both be [batch, " + std::to_string(d) + "], got " +
                     shape_string(f.shape()) + " and " + shape_string(phi.shape()));
  }
  const std::size_t batch = f.rows();
  Tensor q({batch});
  switch (spec.variant) {
    case CriticVariant::monolithic:
      throw ContractError("monolithic critic has no embeddings");
    case CriticVariant::concat_head: {
      const Tensor* parts[] = {&f, &phi};
      Tensor out = mlp_apply(head_net(spec), params, concat_cols(parts), kHeadPrefix);
      for (std::size_t i = 0; i < batch; ++i) q[i] = out[i];
      return q;
    }
    case CriticVariant::l2_metric:
      for (std::size_t i = 0; i < batch; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = f(i, j) - phi(i, j);
          sq += diff * diff;
        }
        q[i] = -std::sqrt(sq);
      }
      return q;
    case CriticVariant::linear_combo: {
      const Tensor& w = coef(params, kCoefF, d);
      const Tensor& v = coef(params, kCoefPhi, d);
      for (std::size_t i = 0; i < batch; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += w[j] * f(i, j) + v[j] * phi(i, j);
        q[i] = acc;
      }
      return q;
    }
    default:
      for (std::size_t i = 0; i < batch; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += f(i, j) * phi(i, j);
        q[i] = acc;
      }
      return q;
  }
}

CriticGrads critic_backward(const CriticSpec& spec, const CriticParams& params,
                            const CriticForward& fwd, const Tensor& dq, bool want_param_grads) {
  const std::size_t batch = fwd.q.size();
  if (dq.size() != batch) {
    throw ShapeError("critic upstream gradient has " + std::to_string(dq.size()) +
                     " entries, batch is " + std::to_string(batch));
  }
  CriticGrads out;
  out.s = Tensor::matrix(batch, spec.dims.state);
  out.a = Tensor::matrix(batch, spec.dims.action);
  out.g = Tensor::matrix(batch, spec.dims.goal);
  Tensor dq_col({batch, 1}, std::vector<double>(dq.values().begin(), dq.values().end()));

  if (spec.variant == CriticVariant::monolithic) {
    MlpGrads g = mlp_backward(monolithic_net(spec), params, fwd.mono, dq_col, kMonoPrefix,
                              want_param_grads);
    scatter({true, true, true}, g.input, out);
    if (want_param_grads) merge(out.params, std::move(g.params));
    return out;
  }

  const std::size_t d = spec.latent_dim;
  const Tensor& f = fwd.f.output;
  const Tensor& phi = fwd.phi.output;
  Tensor df = Tensor::matrix(batch, d);
  Tensor dphi = Tensor::matrix(batch, d);

  switch (spec.variant) {
    case CriticVariant::concat_head: {
      MlpGrads g = mlp_backward(head_net(spec), params, fwd.head, dq_col, kHeadPrefix,
                                want_param_grads);
      df = slice_cols(g.input, 0, d);
      dphi = slice_cols(g.input, d, d);
      if (want_param_grads) merge(out.params, std::move(g.params));
      break;
    }
    case CriticVariant::l2_metric:
      for (std::size_t i = 0; i < batch; ++i) {
        const double norm = -fwd.q[i];
        if (norm == 0.0) continue;  // subgradient 0 at the kink
        for (std::size_t j = 0; j < d; ++j) {
          const double unit = (f(i, j) - phi(i, j)) / norm;
          df(i, j) = -dq[i] * unit;
          dphi(i, j) = dq[i] * unit;
        }
      }
      break;
    case CriticVariant::linear_combo: {
      const Tensor& w = coef(params, kCoefF, d);
      const Tensor& v = coef(params, kCoefPhi, d);
      Tensor dw({d});
      Tensor dv({d});
      for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          df(i, j) = dq[i] * w[j];
          dphi(i, j) = dq[i] * v[j];
          dw[j] += dq[i] * f(i, j);
          dv[j] += dq[i] * phi(i, j);
        }
      }
      if (want_param_grads) {
        out.params.insert_or_assign(kCoefF, std::move(dw));
        out.params.insert_or_assign(kCoefPhi, std::move(dv));
      }
      break;
    }
    default:
      for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          df(i, j) = dq[i] * phi(i, j);
          dphi(i, j) = dq[i] * f(i, j);
        }
      }
      break;
  }

  MlpGrads gf = mlp_backward(f_net(spec), params, fwd.f, df, kFPrefix, want_param_grads);
  MlpGrads gphi = mlp_backward(phi_net(spec), params, fwd.phi, dphi, kPhiPrefix, want_param_grads);
  scatter(f_inputs(spec.variant), gf.input, out);
  scatter(phi_inputs(spec.variant), gphi.input, out);
  if (want_param_grads) {
    merge(out.params, std::move(gf.params));
    merge(out.params, std::move(gphi.params));
  }
  return out;
}

Tensor q_value(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
               const Tensor& a, const Tensor& g) {
  return critic_forward(spec, params, s, a, g).q;
}

Tensor q_grad_action(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                     const Tensor& a, const Tensor& g) {
  CriticForward fwd = critic_forward(spec, params, s, a, g);
  Tensor ones({fwd.q.size()}, 1.0);
  return critic_backward(spec, params, fwd, ones, false).a;
}

Embeddings embed(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                 const Tensor& a, const Tensor& g) {
  if (!is_two_branch(spec.variant)) {
    throw ContractError("embed: variant " + to_string(spec.variant) + " has no branch embeddings");
  }
  check_batch(spec, s, a, g);
  return {mlp_apply(f_net(spec), params, gather(f_inputs(spec.variant), s, a, g), kFPrefix),
          mlp_apply(phi_net(spec), params, gather(phi_inputs(spec.variant), s, a, g), kPhiPrefix)};
}

}  // namespace goalcraft
