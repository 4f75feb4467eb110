#include "goalcraft/replay.hpp"

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"

namespace goalcraft {

void Episode::validate() const {
  if (steps.empty()) throw ContractError("episode has no transitions");
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const Transition& tr = steps[t];
    if (tr.achieved_next != achieved_goal(tr.s_next)) {
      throw ContractError("episode step " + std::to_string(t) + ": achieved goal is not F(s_next)");
    }
    if (tr.g != steps[0].g) {
      throw ContractError("episode step " + std::to_string(t) + ": goal changed mid-episode");
    }
    if (t + 1 < steps.size() && !(tr.s_next == steps[t + 1].s)) {
      throw ContractError("episode chain broken between steps " + std::to_string(t) + " and " +
                          std::to_string(t + 1));
    }
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity_episodes) : capacity_(capacity_episodes) {
  if (capacity_ == 0) throw ContractError("replay capacity must be >= 1 episode");
}

void ReplayBuffer::store_episode(Episode episode) {
  episode.validate();
  if (episode_length_ != 0 && episode.steps.size() != episode_length_) {
    throw ContractError("episode length " + std::to_string(episode.steps.size()) +
                        " differs from stored length " + std::to_string(episode_length_));
  }
  episode_length_ = episode.steps.size();
  if (episodes_.size() < capacity_) {
    episodes_.push_back(std::move(episode));
  } else {
    episodes_[cursor_] = std::move(episode);
    cursor_ = (cursor_ + 1) % capacity_;
  }
  ++total_stored_;
}

const Episode& ReplayBuffer::episode(std::size_t i) const {
  if (i >= episodes_.size()) throw ContractError("replay episode index out of range");
  return episodes_[(cursor_ + i) % episodes_.size()];
}

std::string to_string(HerStrategy s) { return s == HerStrategy::off ? "off" : "future"; }

HerStrategy parse_her_strategy(const std::string& s) {
  if (s == "off") return HerStrategy::off;
  if (s == "future") return HerStrategy::future;
  throw ConfigError("unknown her.strategy '" + s + "' (expected off, future)");
}

double relabel_fraction_estimate(double k) {
  if (!(k >= 0.0)) throw ContractError("her.k must be >= 0");
  return k / (k + 1.0);
}

std::vector<SampledTransition> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                            const HerConfig& her, const EnvConfig& env, Rng& rng) {
  if (buffer.empty()) throw ContractError("cannot sample from an empty replay buffer");
  const double p_relabel =
      her.strategy == HerStrategy::future ? relabel_fraction_estimate(her.k) : 0.0;
  const std::size_t length = buffer.episode_length();

  std::vector<SampledTransition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    SampledTransition out;
    out.episode_index = rng.index(buffer.size());
    const std::size_t t = rng.index(length);
    const Episode& ep = buffer.episode(out.episode_index);
    out.tr = ep.steps[t];
    out.future_index = t;
    if (her.strategy == HerStrategy::future && rng.bernoulli(p_relabel)) {
      const std::size_t future = t + rng.index(length - t);
      out.tr.g = ep.steps[future].achieved_next;
      out.tr.r = reward(env, out.tr.s_next, out.tr.g);
      out.relabeled = true;
      out.future_index = future;
    }
    batch.push_back(out);
  }
  return batch;
}

void EpisodeQueue::push(Episode episode) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(episode));
  }
  ready_.notify_one();
}

std::optional<Episode> EpisodeQueue::try_pop() {
  std::lock_guard lock(mutex_);
  if (queue_.empty()) return std::nullopt;
  Episode e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

Episode EpisodeQueue::pop() {
  std::unique_lock lock(mutex_);
  ready_.wait(lock, [this] { return !queue_.empty(); });
  Episode e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

}  // namespace goalcraft
