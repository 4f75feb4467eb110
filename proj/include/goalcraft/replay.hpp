#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "goalcraft/env.hpp"

namespace goalcraft {

class Rng;

struct Transition {
  EnvState s;
  Vec2 a;
  double r = 0.0;
  EnvState s_next;
  Goal g;
  Goal achieved_next;
  int t = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed-goal sequence of transitions, s_next[t] == s[t + 1].
struct Episode {
  std::vector<Transition> steps;

  /// Throws ContractError if empty, if the state chain breaks, if the goal
  /// changes mid-episode, or if achieved_next != F(s_next).
  void validate() const;
};

/// Ring buffer of whole episodes; evicts the oldest once full. All stored
/// episodes must have the same length so that (episode, step) pairs can be
/// sampled uniformly.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_episodes);

  void store_episode(Episode episode);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return episodes_.size(); }
  bool empty() const noexcept { return episodes_.empty(); }
  std::size_t episode_length() const noexcept { return episode_length_; }
  /// Total episodes ever stored, including evicted ones.
  std::size_t total_stored() const noexcept { return total_stored_; }

  /// Episodes in storage order, oldest first.
  const Episode& episode(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Episode> episodes_;
  std::size_t cursor_ = 0;  // slot the next insert overwrites once full
  std::size_t episode_length_ = 0;
  std::size_t total_stored_ = 0;
};

enum class HerStrategy { off, future };

struct HerConfig {
  HerStrategy strategy = HerStrategy::future;
  double k = 4.0;
};

std::string to_string(HerStrategy s);
HerStrategy parse_her_strategy(const std::string& s);

struct SampledTransition {
  Transition tr;
  bool relabeled = false;
  std::size_t episode_index = 0;  // index as passed to ReplayBuffer::episode
  std::size_t future_index = 0;   // step whose achieved goal replaced g (if relabeled)
};

/// Uniform draws over stored (episode, step) pairs. With the future strategy
/// each draw is relabeled with probability k/(k+1) to the achieved goal of a
/// uniformly chosen step t' >= t of the same episode and its reward is
/// recomputed with `env`.
std::vector<SampledTransition> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                            const HerConfig& her, const EnvConfig& env, Rng& rng);

/// Probability that a sampled transition is relabeled.
double relabel_fraction_estimate(double k);

/// Many-producer, single-consumer hand-off for episodes from rollout workers.
class EpisodeQueue {
 public:
  void push(Episode episode);
  /// Non-blocking; empty when nothing is queued.
  std::optional<Episode> try_pop();
  /// Blocks until an episode is available.
  Episode pop();

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Episode> queue_;
};

}  // namespace goalcraft
