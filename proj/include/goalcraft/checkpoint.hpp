#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "goalcraft/critic.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

inline constexpr char kCheckpointMagic[4] = {'G', 'C', 'Q', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string config_hash;
  int epoch = 0;
  std::string variant;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> extra;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  AgentParams params;
  CheckpointMeta meta;
};

/// Layout, all integers little-endian:
///   "GCQK" | u32 version | u64 meta_len | meta (UTF-8 JSON) | u64 n_tensors |
///   n_tensors x { u64 name_len | name | u64 rank | rank x u64 dim | f64 values }
/// Tensor names are "actor/<name>" and "critic/<name>", in sorted order.
std::string encode_checkpoint(const AgentParams& params, const CheckpointMeta& meta);

/// Throws IoError on a bad magic, unknown version or truncated data.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const AgentParams& params,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);

/// Throws ShapeError unless the tensors match what `critic` and an actor of
/// `actor_width` would allocate.
void check_checkpoint_layout(const AgentParams& params, const CriticSpec& critic,
                             std::size_t actor_width);

}  // namespace goalcraft
