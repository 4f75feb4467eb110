#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goalcraft/adam.hpp"
#include "goalcraft/critic.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/replay.hpp"

namespace goalcraft {

class Rng;

enum class ClipMode { automatic, on, off };

struct TrainConfig {
  double gamma = 0.98;
  double polyak = 0.95;  // fraction of the old target kept per update
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  std::size_t batch_size = 256;
  double noise_sigma = 0.2;
  double random_action_prob = 0.3;
  int warmup_rollouts = 100;
  int epochs = 50;
  int cycles_per_epoch = 10;
  int rollouts_per_cycle = 2;
  int batches_per_cycle = 40;
  ClipMode q_target_clip = ClipMode::automatic;  // automatic: on for sparse reward
  double action_l2 = 1.0;
  std::size_t actor_width = 64;
  int eval_rollouts = 15;
  int num_workers = 1;
  HerConfig her;
  std::size_t replay_capacity = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  bool clip_enabled(RewardKind reward) const;
};

/// Actor: mlp([s, g]) -> tanh -> scaled by a_max.
MlpSpec actor_net(std::size_t width);

struct AgentParams {
  ParamStore actor;
  CriticParams critic;

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

AgentParams init_agent(const CriticSpec& critic, const TrainConfig& cfg);

/// Network-ready tensors for a set of transitions.
struct TrainingBatch {
  Tensor s, a, r, s_next, g;
};

TrainingBatch make_batch(const EnvConfig& env, std::span<const SampledTransition> transitions);

/// Features of many (state, goal) pairs.
Tensor state_features(const EnvConfig& env, std::span<const EnvState> states);
Tensor goal_features(std::span<const Goal> goals);

/// pi(s, g) for a batch of feature rows.
Tensor actor_actions(const MlpSpec& actor, const ParamStore& params, const Tensor& s,
                     const Tensor& g, double a_max);

/// Greedy action for one state.
Vec2 greedy_action(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                   const EnvState& state, Goal goal);

/// With probability random_action_prob a uniform action from the box,
/// otherwise pi(s, g) plus N(0, (noise_sigma * a_max)^2) noise, clamped.
Vec2 explore_action(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                    const EnvState& state, Goal goal, double noise_sigma,
                    double random_action_prob, Rng& rng);

using Policy = std::function<Vec2(const EnvState&, Goal, Rng&)>;

/// A full horizon-length episode from a given start; success does not end it.
Episode rollout_from(const EnvConfig& env, const Policy& policy, EnvState start, Goal goal,
                     Rng& rng);

Episode rollout_episode(const EnvConfig& env, const Policy& policy, const GoalRegion& region,
                        Rng& rng);

/// Convenience wrapper: the actor with (explore) or without noise.
Episode rollout_episode(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                        const GoalRegion& region, bool explore, const TrainConfig& cfg, Rng& rng);

/// y = r + gamma * Q_target(s', pi_target(s', g), g), clamped to
/// [-1/(1-gamma), 0] when `clip` is set.
Tensor td_targets(const TrainingBatch& batch, const CriticSpec& critic,
                  const CriticParams& critic_target, const MlpSpec& actor,
                  const ParamStore& actor_target, double gamma, bool clip, double a_max);

struct CriticStepStats {
  double loss = 0.0;    // mean squared TD error before the step
  double mean_q = 0.0;  // mean Q(s, a, g) before the step
};

/// One Adam step on mean (y - Q)^2. `frozen` filters parameter names that the
/// optimizer must not move.
CriticStepStats critic_update(const CriticSpec& spec, CriticParams& params, AdamState& opt,
                              const TrainingBatch& batch, const Tensor& targets,
                              const std::function<bool(const std::string&)>& frozen = {});

struct ActionValue {
  Tensor q;      // [batch]
  Tensor dq_da;  // [batch, action_dim]
};

/// Anything that can score actions and differentiate with respect to them.
using ActionCritic =
    std::function<ActionValue(const Tensor& s, const Tensor& a, const Tensor& g)>;

ActionCritic make_action_critic(const CriticSpec& spec, const CriticParams& params);

struct ActorObjective {
  double loss = 0.0;
  ParamStore grads;
};

/// Loss -mean Q(s, pi(s, g), g) + action_l2 * mean |u|^2 and its gradient
/// with respect to the actor parameters.
ActorObjective actor_objective(const MlpSpec& actor, const ParamStore& params,
                               const ActionCritic& critic, const TrainingBatch& batch,
                               double action_l2, double a_max);

/// One Adam step ascending mean Q(s, pi(s, g), g) - action_l2 * mean |u|^2,
/// u being the tanh output before scaling. Returns the loss (negated
/// objective) before the step.
double actor_update(const MlpSpec& actor, ParamStore& params, AdamState& opt,
                    const ActionCritic& critic, const TrainingBatch& batch, double action_l2,
                    double a_max);

/// target <- rho * target + (1 - rho) * online.
void polyak_update(const ParamStore& online, ParamStore& target, double rho);

struct RunRecord {
  int epoch = 0;
  std::int64_t env_steps = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  std::uint64_t seed = 0;
  std::string variant;
};

struct TrainHooks {
  /// Exclude f-branch critic tensors from the optimizer.
  bool freeze_f = false;
  /// Emit an epoch-0 evaluation row before any update.
  bool eval_at_start = false;
  /// Sees every sampled batch before it is used.
  std::function<void(std::span<const SampledTransition>)> on_batch;
  /// Called after each epoch's row; returning false stops training.
  std::function<bool(const RunRecord&, const AgentParams&)> on_epoch;
};

struct TrainResult {
  std::vector<RunRecord> records;
  AgentParams final_params;
  std::int64_t rollouts = 0;         // episodes generated
  std::int64_t episodes_stored = 0;  // episodes written to replay
};

/// Warmup with random actions, then epochs x cycles of {rollouts, updates,
/// target sync}, one evaluation row per epoch. Deterministic in cfg.seed when
/// num_workers == 1.
TrainResult train(const EnvConfig& env, const CriticSpec& critic, const TrainConfig& cfg,
                  const GoalRegion& region, const TrainHooks& hooks = {},
                  const AgentParams* init = nullptr);

CriticDims env_dims();

}  // namespace goalcraft
