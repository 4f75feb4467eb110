#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "goalcraft/critic.hpp"
#include "goalcraft/env.hpp"
#include "goalcraft/evalx.hpp"
#include "goalcraft/trainer.hpp"

namespace goalcraft {

/// A typed config value: int, float, string, bool or list of values.
struct ConfigValue {
  using List = std::vector<ConfigValue>;
  std::variant<std::int64_t, double, std::string, bool, List> data;
  int line = 0;

  std::string type_name() const;
  std::string to_text() const;
};

/// "section.key" -> value, in the order of a flat sectioned text file:
///
///   # comment
///   [env]
///   kind = "u_maze"
///   obstacles = [[0.45, 0.0, 0.55, 0.7]]
///
/// Throws ConfigError with the offending line on syntax errors or duplicate keys.
std::map<std::string, ConfigValue> parse_config_text(const std::string& text);

struct RunConfig {
  EnvConfig env;
  CriticSpec critic;
  TrainConfig train;
  GoalRegion train_region;  // eval.region; also where training goals come from
  FinetunePlan finetune;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int checkpoint_every = 0;  // 0: final checkpoint only
  bool latent_dim_explicit = false;
  bool branch_width_explicit = false;

  /// Canonical text form; parsing it yields an identical RunConfig.
  std::string to_text() const;
};

/// Builds and validates a RunConfig. Unknown keys, wrong types, missing
/// required keys (env.kind, critic.variant) and contract violations are all
/// ConfigErrors naming the key and line.
RunConfig build_run_config(const std::map<std::string, ConfigValue>& kv);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Apply one "section.key" override (value in config syntax) and revalidate.
RunConfig with_override(const RunConfig& base, const std::string& key, const std::string& value);

/// Fully-qualified name for sweep shorthands (latent_dim -> critic.latent_dim).
std::string resolve_config_key(const std::string& key);
bool is_known_config_key(const std::string& key);

/// Hex SHA-1 of the canonical config text, prefixed like a git blob hash.
std::string config_hash(const RunConfig& cfg);

}  // namespace goalcraft
