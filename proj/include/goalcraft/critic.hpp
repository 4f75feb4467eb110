#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "goalcraft/mlp.hpp"
#include "goalcraft/tensor.hpp"

namespace goalcraft {

/// The Q-function parameterisations.
///   monolithic         Q = mlp([s, a, g])
///   low_rank_bilinear  Q = f(s, a) . phi(g)
///   bvn                Q = f(s, a) . phi(s, g)
///   l2_metric          Q = -|f(s, a) - phi(s, g)|
///   linear_combo       Q = w . f(s, a) + v . phi(s, g)
///   concat_head        Q = head([f(s, a), phi(s, g)])
///   alt_fa_ag          Q = f(s, a) . phi(a, g)
///   alt_fsag_g         Q = f(s, a, g) . phi(g)
enum class CriticVariant {
  monolithic,
  low_rank_bilinear,
  bvn,
  l2_metric,
  linear_combo,
  concat_head,
  alt_fa_ag,
  alt_fsag_g,
};

inline constexpr CriticVariant kAllVariants[] = {
    CriticVariant::monolithic,   CriticVariant::low_rank_bilinear, CriticVariant::bvn,
    CriticVariant::l2_metric,    CriticVariant::linear_combo,      CriticVariant::concat_head,
    CriticVariant::alt_fa_ag,    CriticVariant::alt_fsag_g,
};

std::string to_string(CriticVariant v);
CriticVariant parse_critic_variant(const std::string& s);

bool is_two_branch(CriticVariant v);
/// Variants whose Q is a plain dot product of the two embeddings.
bool is_dot_product(CriticVariant v);

/// Default latent size: 3 for l2_metric, 16 otherwise.
std::size_t default_latent_dim(CriticVariant v);

struct CriticDims {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t goal = 0;

  friend bool operator==(const CriticDims&, const CriticDims&) = default;
};

struct CriticSpec {
  CriticVariant variant = CriticVariant::bvn;
  CriticDims dims;
  std::size_t latent_dim = 16;
  std::size_t branch_width = 0;
  std::size_t monolithic_width = 64;

  void validate() const;
};

/// Spec with branch_width filled in by matched_width.
CriticSpec make_critic_spec(CriticVariant variant, CriticDims dims, std::size_t monolithic_width,
                            std::optional<std::size_t> latent_dim = std::nullopt);

/// Which of (s, a, g) a sub-network reads, in that concatenation order.
struct BranchInputs {
  bool s = false;
  bool a = false;
  bool g = false;
};

BranchInputs f_inputs(CriticVariant v);
BranchInputs phi_inputs(CriticVariant v);

MlpSpec monolithic_net(const CriticSpec& spec);
MlpSpec f_net(const CriticSpec& spec);
MlpSpec phi_net(const CriticSpec& spec);
/// concat_head only: [2d] -> d (relu) -> 1.
MlpSpec head_net(const CriticSpec& spec);

/// Parameter-name prefixes inside a critic ParamStore.
inline constexpr const char* kMonoPrefix = "q.";
inline constexpr const char* kFPrefix = "f.";
inline constexpr const char* kPhiPrefix = "phi.";
inline constexpr const char* kHeadPrefix = "head.";
inline constexpr const char* kCoefF = "coef.w";
inline constexpr const char* kCoefPhi = "coef.v";

/// All critic tensors in one store, keyed by branch prefix.
using CriticParams = ParamStore;

CriticParams init_critic(const CriticSpec& spec, std::uint64_t seed);

/// Replace every f-branch tensor with a fresh initialisation.
void reinit_f_branch(const CriticSpec& spec, CriticParams& params, std::uint64_t seed);

bool is_f_branch_param(const std::string& name);
bool is_phi_branch_param(const std::string& name);

std::size_t total_params(const CriticSpec& spec);

/// Branch width whose total parameter count is closest to the monolithic
/// network of `monolithic_width`; ties go to the smaller width.
std::size_t matched_width(CriticDims dims, std::size_t latent_dim, std::size_t monolithic_width,
                          CriticVariant variant);

struct CriticForward {
  Tensor q;  // [batch]
  MlpCache mono;
  MlpCache f;
  MlpCache phi;
  MlpCache head;
};

/// Inputs are [batch, dim] tensors of state, action and goal features.
CriticForward critic_forward(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                             const Tensor& a, const Tensor& g);

struct CriticGrads {
  ParamStore params;  // empty unless requested
  Tensor s, a, g;
};

/// Backward pass for upstream dL/dQ of shape [batch].
CriticGrads critic_backward(const CriticSpec& spec, const CriticParams& params,
                            const CriticForward& fwd, const Tensor& dq, bool want_param_grads);

Tensor q_value(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
               const Tensor& a, const Tensor& g);

/// dQ/da, [batch, action_dim].
Tensor q_grad_action(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                     const Tensor& a, const Tensor& g);

struct Embeddings {
  Tensor f;    // [batch, d]
  Tensor phi;  // [batch, d]
};

/// Raw branch outputs. Throws ContractError for the monolithic critic.
Embeddings embed(const CriticSpec& spec, const CriticParams& params, const Tensor& s,
                 const Tensor& a, const Tensor& g);

/// Q from given embeddings; the variant-specific combination step alone.
Tensor combine_embeddings(const CriticSpec& spec, const CriticParams& params, const Tensor& f,
                          const Tensor& phi);

}  // namespace goalcraft
