#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "goalcraft/critic.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/mlp.hpp"
#include "goalcraft/replay.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

struct EvalReport {
  double success_rate = 0.0;
  double mean_discounted_return = 0.0;
  int n_rollouts = 0;
  std::vector<bool> outcomes;
};

/// Success means the goal was reached at any step of the episode.
EvalReport evaluate(const EnvConfig& env, const Policy& policy, const GoalRegion& region,
                    int n_rollouts, std::uint64_t seed, double gamma);

/// Greedy actor evaluation.
EvalReport evaluate(const EnvConfig& env, const MlpSpec& actor, const ParamStore& params,
                    const GoalRegion& region, int n_rollouts, std::uint64_t seed, double gamma);

/// Evaluation with caller-chosen (start, goal) pairs.
using EpisodeSampler = std::function<std::pair<EnvState, Goal>(Rng&)>;
EvalReport evaluate(const EnvConfig& env, const Policy& policy, const EpisodeSampler& sampler,
                    int n_rollouts, std::uint64_t seed, double gamma);

double discounted_return(std::span<const double> rewards, double gamma);
double discounted_return(const Episode& episode, double gamma);

struct ConfidenceInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap of the mean. `mean` is the sample mean; the bounds
/// are interpolated order statistics of the resampled means.
ConfidenceInterval bootstrap_ci(std::span<const double> values, double level = 0.95,
                                int resamples = 1000, std::uint64_t seed = 0);

struct CurvePoint {
  int epoch = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_seeds = 0;
};

struct CurveSummary {
  std::vector<CurvePoint> points;
  std::vector<std::uint64_t> seeds;
};

/// Aligns per-seed curves by epoch (epochs present in every run) and
/// bootstraps the chosen metric across seeds.
CurveSummary summarize_curves(std::span<const std::vector<RunRecord>> runs,
                              double (*metric)(const RunRecord&), std::uint64_t seed = 0);

double success_metric(const RunRecord& r);

enum class FinetuneMode { full, freeze_f, reset_f };
std::string to_string(FinetuneMode m);
FinetuneMode parse_finetune_mode(const std::string& s);

struct FinetunePlan {
  GoalRegion pretrain_region{RegionKind::near, 0.2};
  GoalRegion finetune_region{RegionKind::far, 0.2};
  HerConfig finetune_her{HerStrategy::future, 4.0};
  FinetuneMode mode = FinetuneMode::full;
  int pretrain_epochs = 0;  // 0: use TrainConfig::epochs
  int finetune_epochs = 0;

  /// Throws ContractError for freeze_f/reset_f on a monolithic critic.
  void validate(const CriticSpec& critic) const;
};

struct PretrainResult {
  std::vector<std::vector<RunRecord>> curves;  // one per seed
  std::vector<AgentParams> best_checkpoints;   // one per seed
  std::vector<int> best_epochs;
  std::vector<std::uint64_t> seeds;
};

/// Phase 1: HER off, dense reward, pretrain region. Keeps, per seed, the
/// parameters of the epoch with the highest success (earliest on ties).
/// `on_batch` sees every sampled training batch.
PretrainResult pretrain_phase(const FinetunePlan& plan, const EnvConfig& env,
                              const CriticSpec& critic, const TrainConfig& cfg,
                              std::span<const std::uint64_t> seeds,
                              const std::function<void(std::span<const SampledTransition>)>&
                                  on_batch = {});

struct FinetuneResult {
  std::vector<std::vector<RunRecord>> curves;  // epoch-0 row first
  std::vector<AgentParams> start_params;       // after applying the mode
  std::vector<AgentParams> final_params;
};

/// Phase 2: sparse reward with HER, finetune region, starting from each
/// seed's pretrain checkpoint with `plan.mode` applied.
FinetuneResult finetune_phase(const FinetunePlan& plan, const EnvConfig& env,
                              const CriticSpec& critic, const TrainConfig& cfg,
                              const PretrainResult& pretrained);

struct GeneralizationResult {
  PretrainResult pretrain;
  FinetuneResult finetune;
};

GeneralizationResult run_generalization(const FinetunePlan& plan, const EnvConfig& env,
                                        const CriticSpec& critic, const TrainConfig& cfg,
                                        std::span<const std::uint64_t> seeds);

enum class TransferMode { no_reset, reset_f };
std::string to_string(TransferMode m);
TransferMode parse_transfer_mode(const std::string& s);

struct TransferResult {
  std::vector<RunRecord> source_curve;
  std::vector<RunRecord> target_curve;  // epoch-0 row first
  AgentParams source_final;
  AgentParams target_start;  // after the optional f reset
  AgentParams target_final;
};

/// Resume on `target_env` from `source_params` (trained on the source task),
/// resetting the f branch first under reset_f.
TransferResult transfer_from(const EnvConfig& target_env, const CriticSpec& critic,
                             const TrainConfig& cfg, TransferMode mode,
                             const AgentParams& source_params, const GoalRegion& region = {});

/// Train on `source_env`, then transfer to `target_env`.
TransferResult run_transfer(const EnvConfig& source_env, const EnvConfig& target_env,
                            const CriticSpec& critic, const TrainConfig& cfg, TransferMode mode,
                            const GoalRegion& region = {});

}  // namespace goalcraft
