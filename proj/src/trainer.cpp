#include "goalcraft/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <thread>

#include "goalcraft/error.hpp"
#include "goalcraft/evalx.hpp"
#include "goalcraft/rng.hpp"

namespace goalcraft {

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractError("train.gamma must lie in [0, 1)");
  if (!(polyak >= 0.0 && polyak <= 1.0)) throw ContractError("train.polyak must lie in [0, 1]");
  if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ContractError("learning rates must be >= 0");
  if (batch_size < 1) throw ContractError("train.batch_size must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ContractError("train.noise_sigma must be >= 0");
  if (!(random_action_prob >= 0.0 && random_action_prob <= 1.0)) {
    throw ContractError("train.random_action_prob must lie in [0, 1]");
  }
  if (warmup_rollouts < 0 || epochs < 0) throw ContractError("warmup and epoch counts must be >= 0");
  if (cycles_per_epoch < 1 || rollouts_per_cycle < 1 || batches_per_cycle < 1) {
    throw ContractError("cycle, rollout and batch counts must be >= 1");
  }
  if (eval_rollouts < 1) throw ContractError("eval rollouts must be >= 1");
  if (num_workers < 1) throw ContractError("train.num_workers must be >= 1");
  if (actor_width < 1) throw ContractError("train.actor_width must be >= 1");
  if (!(action_l2 >= 0.0)) throw ContractError("train.action_l2 must be >= 0");
  if (!(her.k >= 0.0)) throw ContractError("her.k must be >= 0");
  if (replay_capacity < 1) throw ContractError("replay.capacity_episodes must be >= 1");
}

bool TrainConfig::clip_enabled(RewardKind reward) const {
  switch (q_target_clip) {
    case ClipMode::on: return true;
    case ClipMode::off: return false;
    case ClipMode::automatic: return reward == RewardKind::sparse;
  }
  return false;
}

CriticDims env_dims() { return {kStateDim, kActionDim, kGoalDim}; }

MlpSpec actor_net(std::size_t width) {
  return three_layer_mlp(kStateDim + kGoalDim, width, kActionDim, Activation::tanh);
}

AgentParams init_agent(const CriticSpec& critic, const TrainConfig& cfg) {
  AgentParams p;
  p.actor = init_params(actor_net(cfg.actor_width), derive_seed(cfg.seed, "actor.init"));
  p.critic = init_critic(critic, derive_seed(cfg.seed, "critic.init"));
  return p;
}

Tensor state_features(const EnvConfig& env, std::span<const EnvState> states) {
  Tensor out = Tensor::matrix(states.size(), kStateDim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto f = observe_state(env, states[i]);
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

Tensor goal_features(std::span<const Goal> goals) {
  Tensor out = Tensor::matrix(goals.size(), kGoalDim);
  for (std::size_t i = 0; i < goals.size(); ++i) {
    auto f = observe_goal(goals[i]);
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

TrainingBatch make_batch(const EnvConfig& env, std::span<const SampledTransition> transitions) {
  const std::size_t n = transitions.size();
  if (n == 0) throw ContractError("training batch is empty");
  std::vector<EnvState> s(n), s_next(n);
  std::vector<Goal> g(n);
  TrainingBatch b;
  b.a = Tensor::matrix(n, kActionDim);
  b.r = Tensor({n});
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& tr = transitions[i].tr;
    s[i] = tr.s;
    s_next[i] = tr.s_next;
    g[i] = tr.g;
    b.a(i, 0) = tr.a.x;
    b.a(i, 1) = tr.a.y;
    b.r[i] = tr.r;
  }
  b.s = state_features(env, s);
  b.s_next = state_features(env, s_next);
  b.g = goal_features(g);
  return b;
}

Tensor actor_actions(const MlpSpec& actor, const ParamStore& params, const Tensor& s,
                     const Tensor& g, double a_max) {
  const Tensor* parts[] = {&s, &g};
  Tensor out = mlp_apply(actor, params, concat_cols(parts));
  for (auto& v : out.values()) v *= a_max;
  return out;
}

Vec2 greedy_action(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                   const EnvState& state, Goal goal) {
  const auto sf = observe_state(env, state);
  const auto gf = observe_goal(goal);
  Tensor input({1, kStateDim + kGoalDim});
  std::copy(sf.begin(), sf.end(), input.data());
  std::copy(gf.begin(), gf.end(), input.data() + kStateDim);
  Tensor out = mlp_apply(actor, params, input);
  return {out[0] * env.a_max, out[1] * env.a_max};
}

Vec2 explore_action(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                    const EnvState& state, Goal goal, double noise_sigma,
                    double random_action_prob, Rng& rng) {
  if (rng.bernoulli(random_action_prob)) {
    return {rng.uniform(-env.a_max, env.a_max), rng.uniform(-env.a_max, env.a_max)};
  }
  Vec2 a = greedy_action(env, actor, params, state, goal);
  if (noise_sigma > 0.0) {
    const double sd = noise_sigma * env.a_max;
    a.x += rng.normal(0.0, sd);
    a.y += rng.normal(0.0, sd);
  }
  a.x = std::clamp(a.x, -env.a_max, env.a_max);
  a.y = std::clamp(a.y, -env.a_max, env.a_max);
  return a;
}

Episode rollout_from(const EnvConfig& env, const Policy& policy, EnvState start, Goal goal,
                     Rng& rng) {
  Episode ep;
  ep.steps.reserve(static_cast<std::size_t>(env.horizon));
  EnvState s = start;
  for (int t = 0; t < env.horizon; ++t) {
    const Vec2 a = policy(s, goal, rng);
    const StepResult res = step(env, s, a, goal);
    ep.steps.push_back(Transition{s, a, res.reward, res.next, goal, res.achieved, t});
    s = res.next;
  }
  return ep;
}

Episode rollout_episode(const EnvConfig& env, const Policy& policy, const GoalRegion& region,
                        Rng& rng) {
  auto [start, goal] = reset(env, region, rng);
  return rollout_from(env, policy, start, goal, rng);
}

Episode rollout_episode(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                        const GoalRegion& region, bool explore, const TrainConfig& cfg, Rng& rng) {
  Policy policy;
  if (explore) {
    policy = [&](const EnvState& s, Goal g, Rng& r) {
      return explore_action(env, actor, params, s, g, cfg.noise_sigma, cfg.random_action_prob, r);
    };
  } else {
    policy = [&](const EnvState& s, Goal g, Rng&) { return greedy_action(env, actor, params, s, g); };
  }
  return rollout_episode(env, policy, region, rng);
}

Tensor td_targets(const TrainingBatch& batch, const CriticSpec& critic,
                  const CriticParams& critic_target, const MlpSpec& actor,
                  const ParamStore& actor_target, double gamma, bool clip, double a_max) {
  Tensor next_a = actor_actions(actor, actor_target, batch.s_next, batch.g, a_max);
  Tensor q_next = q_value(critic, critic_target, batch.s_next, next_a, batch.g);
  const double lo = -1.0 / (1.0 - gamma);
  Tensor y({batch.r.size()});
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = batch.r[i] + gamma * q_next[i];
    if (clip) y[i] = std::clamp(y[i], lo, 0.0);
  }
  return y;
}

CriticStepStats critic_update(const CriticSpec& spec, CriticParams& params, AdamState& opt,
                              const TrainingBatch& batch, const Tensor& targets,
                              const std::function<bool(const std::string&)>& frozen) {
  CriticForward fwd = critic_forward(spec, params, batch.s, batch.a, batch.g);
  const std::size_t n = fwd.q.size();
  if (targets.size() != n) throw ShapeError("critic_update: target count does not match batch");

  CriticStepStats stats;
  Tensor dq({n});
  for (std::size_t i = 0; i < n; ++i) {
    const double err = fwd.q[i] - targets[i];
    stats.loss += err * err;
    stats.mean_q += fwd.q[i];
    dq[i] = 2.0 * err / static_cast<double>(n);
  }
  stats.loss /= static_cast<double>(n);
  stats.mean_q /= static_cast<double>(n);
  if (!std::isfinite(stats.loss)) {
    throw NumericalError("critic loss is not finite (mean Q " + std::to_string(stats.mean_q) +
                         ", optimizer step " + std::to_string(opt.t) + ")");
  }

  CriticGrads grads = critic_backward(spec, params, fwd, dq, true);
  if (frozen) std::erase_if(grads.params, [&](const auto& kv) { return frozen(kv.first); });
  adam_step(params, grads.params, opt);
  return stats;
}

ActionCritic make_action_critic(const CriticSpec& spec, const CriticParams& params) {
  return [&spec, &params](const Tensor& s, const Tensor& a, const Tensor& g) {
    CriticForward fwd = critic_forward(spec, params, s, a, g);
    Tensor ones({fwd.q.size()}, 1.0);
    Tensor da = critic_backward(spec, params, fwd, ones, false).a;
    return ActionValue{std::move(fwd.q), std::move(da)};
  };
}

ActorObjective actor_objective(const MlpSpec& actor, const ParamStore& params,
                               const ActionCritic& critic, const TrainingBatch& batch,
                               double action_l2, double a_max) {
  const Tensor* parts[] = {&batch.s, &batch.g};
  MlpCache cache = mlp_forward(actor, params, concat_cols(parts));
  const Tensor& u = cache.output;
  Tensor a = u;
  for (auto& v : a.values()) v *= a_max;

  ActionValue av = critic(batch.s, a, batch.g);
  const std::size_t n = u.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  Tensor du(u.shape());
  for (std::size_t i = 0; i < n; ++i) {
    loss -= av.q[i];
    for (std::size_t j = 0; j < u.cols(); ++j) {
      loss += action_l2 * u(i, j) * u(i, j);
      du(i, j) = (-av.dq_da(i, j) * a_max + 2.0 * action_l2 * u(i, j)) * inv_n;
    }
  }
  loss *= inv_n;
  if (!std::isfinite(loss)) throw NumericalError("actor loss is not finite");
  return {loss, mlp_backward(actor, params, cache, du).params};
}

double actor_update(const MlpSpec& actor, ParamStore& params, AdamState& opt,
                    const ActionCritic& critic, const TrainingBatch& batch, double action_l2,
                    double a_max) {
  ActorObjective obj = actor_objective(actor, params, critic, batch, action_l2, a_max);
  adam_step(params, obj.grads, opt);
  return obj.loss;
}

void polyak_update(const ParamStore& online, ParamStore& target, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ContractError("polyak coefficient must lie in [0, 1]");
  require_same_layout(online, target, "polyak_update");
  for (auto& [name, t] : target) {
    const Tensor& src = online.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rho * t[i] + (1.0 - rho) * src[i];
  }
}

namespace {

Policy uniform_policy(const EnvConfig& env) {
  return [a_max = env.a_max](const EnvState&, Goal, Rng& rng) {
    return Vec2{rng.uniform(-a_max, a_max), rng.uniform(-a_max, a_max)};
  };
}

class TrainingRun {
 public:
  TrainingRun(const EnvConfig& env, const CriticSpec& critic, const TrainConfig& cfg,
              const GoalRegion& region, const TrainHooks& hooks, const AgentParams* init)
      : env_(env),
        critic_(critic),
        cfg_(cfg),
        region_(region),
        hooks_(hooks),
        actor_spec_(actor_net(cfg.actor_width)),
        online_(init ? *init : init_agent(critic, cfg)),
        target_(online_),
        actor_opt_(make_adam_state(online_.actor, {.lr = cfg.actor_lr})),
        critic_opt_(make_adam_state(online_.critic, {.lr = cfg.critic_lr})),
        replay_(cfg.replay_capacity),
        rollout_rng_(cfg.seed, "rollout"),
        replay_rng_(cfg.seed, "replay"),
        clip_(cfg.clip_enabled(env.reward)) {
    env_.validate();
    cfg_.validate();
    region_.validate();
    critic_.validate();
    require_same_layout(online_.actor, init_params(actor_spec_, 0), "initial actor");
    require_same_layout(online_.critic, init_critic(critic_, 0), "initial critic");
  }

  TrainResult run() {
    TrainResult result;
    if (hooks_.eval_at_start) {
      RunRecord rec = evaluation_row(0, {});
      result.records.push_back(rec);
      if (hooks_.on_epoch && !hooks_.on_epoch(rec, online_)) {
        return finish(std::move(result));
      }
    }
    if (cfg_.epochs > 0) warmup();

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      EpochTotals totals;
      for (int cycle = 0; cycle < cfg_.cycles_per_epoch; ++cycle) {
        collect_rollouts();
        for (int b = 0; b < cfg_.batches_per_cycle; ++b) update(totals);
        polyak_update(online_.actor, target_.actor, cfg_.polyak);
        polyak_update(online_.critic, target_.critic, cfg_.polyak);
      }
      RunRecord rec = evaluation_row(epoch, totals);
      result.records.push_back(rec);
      if (hooks_.on_epoch && !hooks_.on_epoch(rec, online_)) break;
    }
    return finish(std::move(result));
  }

 private:
  struct EpochTotals {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double mean_q = 0.0;
    int updates = 0;
  };

  TrainResult finish(TrainResult result) {
    result.final_params = online_;
    result.rollouts = rollouts_;
    result.episodes_stored = static_cast<std::int64_t>(replay_.total_stored());
    return result;
  }

  void store(Episode ep) {
    env_steps_ += static_cast<std::int64_t>(ep.steps.size());
    replay_.store_episode(std::move(ep));
  }

  void warmup() {
    Rng rng(cfg_.seed, "warmup");
    const Policy random = uniform_policy(env_);
    for (int i = 0; i < cfg_.warmup_rollouts; ++i) {
      ++rollouts_;
      store(rollout_episode(env_, random, region_, rng));
    }
  }

  void collect_rollouts() {
    if (cfg_.num_workers <= 1) {
      for (int i = 0; i < cfg_.rollouts_per_cycle; ++i) {
        ++rollouts_;
        store(rollout_episode(env_, actor_spec_, online_.actor, region_, true, cfg_, rollout_rng_));
      }
      return;
    }
    // Workers roll out against a read-only snapshot of the actor; the
    // trainer thread remains the only replay writer.
    auto snapshot = std::make_shared<const ParamStore>(online_.actor);
    EpisodeQueue queue;
    {
      std::vector<std::jthread> workers;
      for (int w = 0; w < cfg_.num_workers; ++w) {
        const std::uint64_t worker_seed =
            derive_seed(cfg_.seed, "rollout.worker." + std::to_string(w) + "." +
                                       std::to_string(worker_rounds_));
        workers.emplace_back([this, w, worker_seed, snapshot, &queue] {
          Rng rng(worker_seed);
          for (int i = w; i < cfg_.rollouts_per_cycle; i += cfg_.num_workers) {
            queue.push(rollout_episode(env_, actor_spec_, *snapshot, region_, true, cfg_, rng));
          }
        });
      }
    }
    ++worker_rounds_;
    while (auto ep = queue.try_pop()) {
      ++rollouts_;
      store(std::move(*ep));
    }
  }

  void update(EpochTotals& totals) {
    auto sampled = sample_batch(replay_, cfg_.batch_size, cfg_.her, env_, replay_rng_);
    if (hooks_.on_batch) hooks_.on_batch(sampled);
    TrainingBatch batch = make_batch(env_, sampled);

    Tensor y = td_targets(batch, critic_, target_.critic, actor_spec_, target_.actor, cfg_.gamma,
                          clip_, env_.a_max);
    std::function<bool(const std::string&)> frozen;
    if (hooks_.freeze_f) frozen = is_f_branch_param;
    CriticStepStats cs = critic_update(critic_, online_.critic, critic_opt_, batch, y, frozen);
    const double al = actor_update(actor_spec_, online_.actor, actor_opt_,
                                   make_action_critic(critic_, online_.critic), batch,
                                   cfg_.action_l2, env_.a_max);
    totals.critic_loss += cs.loss;
    totals.mean_q += cs.mean_q;
    totals.actor_loss += al;
    totals.updates += 1;
  }

  RunRecord evaluation_row(int epoch, const EpochTotals& totals) {
    const EvalReport report =
        evaluate(env_, actor_spec_, online_.actor, region_, cfg_.eval_rollouts,
                 derive_seed(cfg_.seed, "eval." + std::to_string(epoch)), cfg_.gamma);
    RunRecord rec;
    rec.epoch = epoch;
    rec.env_steps = env_steps_;
    rec.success_rate = report.success_rate;
    rec.mean_return = report.mean_discounted_return;
    if (totals.updates > 0) {
      rec.critic_loss = totals.critic_loss / totals.updates;
      rec.actor_loss = totals.actor_loss / totals.updates;
      rec.mean_q = totals.mean_q / totals.updates;
    }
    rec.seed = cfg_.seed;
    rec.variant = to_string(critic_.variant);
    return rec;
  }

  EnvConfig env_;
  CriticSpec critic_;
  TrainConfig cfg_;
  GoalRegion region_;
  const TrainHooks& hooks_;
  MlpSpec actor_spec_;
  AgentParams online_;
  AgentParams target_;
  AdamState actor_opt_;
  AdamState critic_opt_;
  ReplayBuffer replay_;
  Rng rollout_rng_;
  Rng replay_rng_;
  bool clip_;
  std::int64_t env_steps_ = 0;
  std::int64_t rollouts_ = 0;
  std::int64_t worker_rounds_ = 0;
};

}  // namespace

TrainResult train(const EnvConfig& env, const CriticSpec& critic, const TrainConfig& cfg,
                  const GoalRegion& region, const TrainHooks& hooks, const AgentParams* init) {
  TrainingRun run(env, critic, cfg, region, hooks, init);
  return run.run();
}

}  // namespace goalcraft
