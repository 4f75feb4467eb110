#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace goalcraft {

class Rng;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

/// Goals live in position space; F(state) is the position.
using Goal = Vec2;

struct EnvState {
  Vec2 pos;
  Vec2 vel;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Axis-aligned rectangle, closed: points on the boundary count as inside.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

enum class EnvKind { point_reach, u_maze, drag_world };
enum class RewardKind { sparse, dense };

struct EnvConfig {
  EnvKind kind = EnvKind::point_reach;
  double drag = 0.0;
  double dt = 0.1;
  double v_max = 0.5;
  double a_max = 1.0;
  double success_radius = 0.05;
  int horizon = 50;
  RewardKind reward = RewardKind::sparse;
  std::vector<Rect> obstacles;

  void validate() const;

  static EnvConfig point_reach();
  /// Single wall x in [0.45, 0.55], y in [0, 0.7]; paths across detour over the top.
  static EnvConfig u_maze();
  static EnvConfig drag_world(double drag);
};

enum class RegionKind { full, left, right, near, far };

struct GoalRegion {
  RegionKind kind = RegionKind::full;
  double radius_threshold = 0.2;  // near/far only, measured from the arena centre

  bool contains(Goal g) const;
  void validate() const;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  Goal achieved;
  bool reached = false;
};

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kActionDim = 2;
inline constexpr std::size_t kGoalDim = 2;

/// True when `p` is inside the unit arena and outside every obstacle.
bool is_free(const EnvConfig& env, Vec2 p);

/// Initial state uniform over free space (zero velocity) and a goal uniform
/// over the free part of `region`.
std::pair<EnvState, Goal> reset(const EnvConfig& env, const GoalRegion& region, Rng& rng);
std::pair<EnvState, Goal> reset(const EnvConfig& env, const GoalRegion& region, std::uint64_t seed);

/// Goal sampled on its own (used when a caller fixes the start state).
Goal sample_goal(const EnvConfig& env, const GoalRegion& region, Rng& rng);

StepResult step(const EnvConfig& env, const EnvState& state, Vec2 action, Goal goal);

/// The abstraction F: position components of the state.
Goal achieved_goal(const EnvState& state);

double reward(const EnvConfig& env, const EnvState& next, Goal goal);
bool reached(const EnvConfig& env, const EnvState& state, Goal goal);

/// Network features: positions mapped to [-1, 1], velocities divided by v_max.
std::array<double, kStateDim> observe_state(const EnvConfig& env, const EnvState& state);
std::array<double, kGoalDim> observe_goal(Goal goal);

std::string to_string(EnvKind kind);
std::string to_string(RewardKind kind);
std::string to_string(RegionKind kind);
EnvKind parse_env_kind(const std::string& s);
RewardKind parse_reward_kind(const std::string& s);
RegionKind parse_region_kind(const std::string& s);

}  // namespace goalcraft
