#include "goalcraft/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

EvalReport evaluate(const EnvConfig& env, const Policy& policy, const EpisodeSampler& sampler,
                    int n_rollouts, std::uint64_t seed, double gamma) {
  if (n_rollouts < 1) throw ContractError("evaluate: n_rollouts must be >= 1");
  Rng rng(seed);
  EvalReport report;
  report.n_rollouts = n_rollouts;
  double return_sum = 0.0;
  int successes = 0;
  for (int i = 0; i < n_rollouts; ++i) {
    auto [start, goal] = sampler(rng);
    Episode ep = rollout_from(env, policy, start, goal, rng);
    const bool success = std::any_of(ep.steps.begin(), ep.steps.end(), [&](const Transition& t) {
      return reached(env, t.s_next, goal);
    });
    report.outcomes.push_back(success);
    successes += success ? 1 : 0;
    return_sum += discounted_return(ep, gamma);
  }
  report.success_rate = static_cast<double>(successes) / n_rollouts;
  report.mean_discounted_return = return_sum / n_rollouts;
  return report;
}

EvalReport evaluate(const EnvConfig& env, const Policy& policy, const GoalRegion& region,
                    int n_rollouts, std::uint64_t seed, double gamma) {
  EpisodeSampler sampler = [&](Rng& rng) { return reset(env, region, rng); };
  return evaluate(env, policy, sampler, n_rollouts, seed, gamma);
}

EvalReport evaluate(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                    const GoalRegion& region, int n_rollouts, std::uint64_t seed, double gamma) {
  Policy greedy = [&](const EnvState& s, Goal g, Rng&) {
    return greedy_action(env, actor, params, s, g);
  };
  return evaluate(env, greedy, region, n_rollouts, seed, gamma);
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

double discounted_return(const Episode& episode, double gamma) {
  std::vector<double> rewards;
  rewards.reserve(episode.steps.size());
  for (const auto& t : episode.steps) rewards.push_back(t.r);
  return discounted_return(rewards, gamma);
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

ConfidenceInterval bootstrap_ci(std::span<const double> values, double level, int resamples,
                                std::uint64_t seed) {
  if (values.empty()) throw ContractError("bootstrap_ci needs at least one value");
  if (!(level > 0.0 && level < 1.0)) throw ContractError("bootstrap_ci level must lie in (0, 1)");
  if (resamples < 1) throw ContractError("bootstrap_ci needs at least one resample");

  const std::size_t n = values.size();
  ConfidenceInterval ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);

  Rng rng(seed, "bootstrap");
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.index(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  ci.low = std::min(interpolated_quantile(means, tail), ci.mean);
  ci.high = std::max(interpolated_quantile(means, 1.0 - tail), ci.mean);
  return ci;
}

double success_metric(const RunRecord& r) { return r.success_rate; }

CurveSummary summarize_curves(std::span<const std::vector<RunRecord>> runs,
                              double (*metric)(const RunRecord&), std::uint64_t seed) {
  CurveSummary summary;
  if (runs.empty()) return summary;
  std::map<int, std::vector<double>> by_epoch;
  for (const auto& run : runs) {
    if (!run.empty()) summary.seeds.push_back(run.front().seed);
    for (const auto& rec : run) by_epoch[rec.epoch].push_back(metric(rec));
  }
  for (const auto& [epoch, vals] : by_epoch) {
    if (vals.size() != runs.size()) continue;
    const auto ci = bootstrap_ci(vals, 0.95, 1000, derive_seed(seed, std::to_string(epoch)));
    summary.points.push_back({epoch, ci.mean, ci.low, ci.high, static_cast<int>(vals.size())});
  }
  return summary;
}

std::string to_string(FinetuneMode m) {
  switch (m) {
    case FinetuneMode::full: return "full";
    case FinetuneMode::freeze_f: return "freeze_f";
    case FinetuneMode::reset_f: return "reset_f";
  }
  return "?";
}

FinetuneMode parse_finetune_mode(const std::string& s) {
  if (s == "full") return FinetuneMode::full;
  if (s == "freeze_f") return FinetuneMode::freeze_f;
  if (s == "reset_f") return FinetuneMode::reset_f;
  throw ConfigError("unknown finetune mode '" + s + "' (expected full, freeze_f, reset_f)");
}

std::string to_string(TransferMode m) { return m == TransferMode::no_reset ? "no_reset" : "reset_f"; }

TransferMode parse_transfer_mode(const std::string& s) {
  if (s == "no_reset") return TransferMode::no_reset;
  if (s == "reset_f") return TransferMode::reset_f;
  throw ConfigError("unknown transfer mode '" + s + "' (expected no_reset, reset_f)");
}

void FinetunePlan::validate(const CriticSpec& critic) const {
  pretrain_region.validate();
  finetune_region.validate();
  if (mode != FinetuneMode::full && !is_two_branch(critic.variant)) {
    throw ContractError("finetune mode " + to_string(mode) + " requires a two-branch critic, got " +
                        to_string(critic.variant));
  }
  if (pretrain_epochs < 0 || finetune_epochs < 0) throw ContractError("epoch counts must be >= 0");
}

PretrainResult pretrain_phase(const FinetunePlan& plan, const EnvConfig& env,
                              const CriticSpec& critic, const TrainConfig& cfg,
                              std::span<const std::uint64_t> seeds,
                              const std::function<void(std::span<const SampledTransition>)>& on_batch) {
  plan.validate(critic);
  EnvConfig pre_env = env;
  pre_env.reward = RewardKind::dense;

  PretrainResult out;
  for (std::uint64_t seed : seeds) {
    TrainConfig c = cfg;
    c.seed = seed;
    c.her.strategy = HerStrategy::off;
    if (plan.pretrain_epochs > 0) c.epochs = plan.pretrain_epochs;

    AgentParams best;
    double best_success = -1.0;
    int best_epoch = 0;
    TrainHooks hooks;
    hooks.on_batch = on_batch;
    hooks.on_epoch = [&](const RunRecord& rec, const AgentParams& params) {
      if (rec.success_rate > best_success) {
        best_success = rec.success_rate;
        best_epoch = rec.epoch;
        best = params;
      }
      return true;
    };
    TrainResult res = train(pre_env, critic, c, plan.pretrain_region, hooks);
    if (best_success < 0.0) best = res.final_params;  // no epochs ran
    out.curves.push_back(std::move(res.records));
    out.best_checkpoints.push_back(std::move(best));
    out.best_epochs.push_back(best_epoch);
    out.seeds.push_back(seed);
  }
  return out;
}

FinetuneResult finetune_phase(const FinetunePlan& plan, const EnvConfig& env,
                              const CriticSpec& critic, const TrainConfig& cfg,
                              const PretrainResult& pretrained) {
  plan.validate(critic);
  EnvConfig ft_env = env;
  ft_env.reward = RewardKind::sparse;

  FinetuneResult out;
  for (std::size_t i = 0; i < pretrained.seeds.size(); ++i) {
    TrainConfig c = cfg;
    c.seed = pretrained.seeds[i];
    c.her = plan.finetune_her;
    if (plan.finetune_epochs > 0) c.epochs = plan.finetune_epochs;

    AgentParams start = pretrained.best_checkpoints[i];
    if (plan.mode == FinetuneMode::reset_f) {
      reinit_f_branch(critic, start.critic, derive_seed(c.seed, "finetune.reset_f"));
    }
    TrainHooks hooks;
    hooks.freeze_f = plan.mode == FinetuneMode::freeze_f;
    hooks.eval_at_start = true;
    TrainResult res = train(ft_env, critic, c, plan.finetune_region, hooks, &start);
    out.curves.push_back(std::move(res.records));
    out.start_params.push_back(std::move(start));
    out.final_params.push_back(std::move(res.final_params));
  }
  return out;
}

GeneralizationResult run_generalization(const FinetunePlan& plan, const EnvConfig& env,
                                        const CriticSpec& critic, const TrainConfig& cfg,
                                        std::span<const std::uint64_t> seeds) {
  plan.validate(critic);
  GeneralizationResult out;
  out.pretrain = pretrain_phase(plan, env, critic, cfg, seeds);
  out.finetune = finetune_phase(plan, env, critic, cfg, out.pretrain);
  return out;
}

TransferResult transfer_from(const EnvConfig& target_env, const CriticSpec& critic,
                             const TrainConfig& cfg, TransferMode mode,
                             const AgentParams& source_params, const GoalRegion& region) {
  if (!(critic.dims == env_dims())) {
    throw ShapeError("transfer: critic dims do not match the environment's state/action/goal dims");
  }
  if (mode == TransferMode::reset_f && !is_two_branch(critic.variant)) {
    throw ContractError("transfer mode reset_f requires a two-branch critic, got " +
                        to_string(critic.variant));
  }
  require_same_layout(source_params.critic, init_critic(critic, 0), "transfer critic");

  TransferResult out;
  out.source_final = source_params;
  out.target_start = source_params;
  if (mode == TransferMode::reset_f) {
    reinit_f_branch(critic, out.target_start.critic, derive_seed(cfg.seed, "transfer.reset_f"));
  }
  TrainHooks hooks;
  hooks.eval_at_start = true;
  TrainResult res = train(target_env, critic, cfg, region, hooks, &out.target_start);
  out.target_curve = std::move(res.records);
  out.target_final = std::move(res.final_params);
  return out;
}

TransferResult run_transfer(const EnvConfig& source_env, const EnvConfig& target_env,
                            const CriticSpec& critic, const TrainConfig& cfg, TransferMode mode,
                            const GoalRegion& region) {
  if (!(critic.dims == env_dims())) {
    throw ShapeError("transfer: critic dims do not match the environment's state/action/goal dims");
  }
  if (mode == TransferMode::reset_f && !is_two_branch(critic.variant)) {
    throw ContractError("transfer mode reset_f requires a two-branch critic, got " +
                        to_string(critic.variant));
  }
  TrainResult source = train(source_env, critic, cfg, region);
  TransferResult out = transfer_from(target_env, critic, cfg, mode, source.final_params, region);
  out.source_curve = std::move(source.records);
  return out;
}

}  // namespace goalcraft
