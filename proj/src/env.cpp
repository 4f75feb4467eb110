#include "goalcraft/env.hpp"

#include <algorithm>
#include <cmath>

#include "goalcraft/error.hpp"
#include "goalcraft/rng.hpp"

namespace goalcraft {

namespace {

constexpr Vec2 kArenaCentre{0.5, 0.5};
constexpr int kMaxRejections = 100000;

bool inside_arena(Vec2 p) { return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0; }

// Coarse grid scan so that an empty region fails fast and deterministically.
bool region_has_free_point(const EnvConfig& env, const GoalRegion& region) {
  constexpr int n = 200;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 p{(i + 0.5) / n, (j + 0.5) / n};
      if (is_free(env, p) && region.contains(p)) return true;
    }
  }
  return false;
}

Vec2 sample_free(const EnvConfig& env, const GoalRegion& region, Rng& rng) {
  for (int i = 0; i < kMaxRejections; ++i) {
    const Vec2 p{rng.uniform(), rng.uniform()};
    if (is_free(env, p) && region.contains(p)) return p;
    if (i == 1000 && !region_has_free_point(env, region)) break;
  }
  throw ContractError("goal region " + to_string(region.kind) + " has no free space in this env");
}

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

void EnvConfig::validate() const {
  if (horizon < 1) throw ContractError("env.horizon must be >= 1");
  if (!(success_radius > 0.0)) throw ContractError("env.success_radius must be > 0");
  if (!(drag >= 0.0 && drag < 1.0)) throw ContractError("env.drag must lie in [0, 1)");
  if (!(dt > 0.0) || !(v_max > 0.0) || !(a_max > 0.0)) {
    throw ContractError("env.dt, env.v_max and env.a_max must be > 0");
  }
  for (const Rect& r : obstacles) {
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) throw ContractError("obstacle rectangle is degenerate");
    if (!inside_arena({r.x0, r.y0}) || !inside_arena({r.x1, r.y1})) {
      throw ContractError("obstacle rectangle leaves the unit arena");
    }
  }
}

EnvConfig EnvConfig::point_reach() { return EnvConfig{}; }

EnvConfig EnvConfig::u_maze() {
  EnvConfig env;
  env.kind = EnvKind::u_maze;
  env.obstacles = {Rect{0.45, 0.0, 0.55, 0.7}};
  return env;
}

EnvConfig EnvConfig::drag_world(double drag) {
  EnvConfig env;
  env.kind = EnvKind::drag_world;
  env.drag = drag;
  return env;
}

bool GoalRegion::contains(Goal g) const {
  switch (kind) {
    case RegionKind::full:
      return true;
    case RegionKind::left:
      return g.x < 0.5;
    case RegionKind::right:
      return g.x >= 0.5;
    case RegionKind::near:
      return distance(g, kArenaCentre) <= radius_threshold;
    case RegionKind::far:
      return distance(g, kArenaCentre) > radius_threshold;
  }
  return false;
}

void GoalRegion::validate() const {
  if ((kind == RegionKind::near || kind == RegionKind::far) && !(radius_threshold > 0.0)) {
    throw ContractError("near/far goal regions need radius_threshold > 0");
  }
}

bool is_free(const EnvConfig& env, Vec2 p) {
  if (!inside_arena(p)) return false;
  return std::none_of(env.obstacles.begin(), env.obstacles.end(),
                      [p](const Rect& r) { return r.contains(p); });
}

Goal sample_goal(const EnvConfig& env, const GoalRegion& region, Rng& rng) {
  region.validate();
  return sample_free(env, region, rng);
}

std::pair<EnvState, Goal> reset(const EnvConfig& env, const GoalRegion& region, Rng& rng) {
  const Goal goal = sample_goal(env, region, rng);
  EnvState state;
  state.pos = sample_free(env, GoalRegion{}, rng);
  return {state, goal};
}

std::pair<EnvState, Goal> reset(const EnvConfig& env, const GoalRegion& region, std::uint64_t seed) {
  Rng rng(seed);
  return reset(env, region, rng);
}

StepResult step(const EnvConfig& env, const EnvState& state, Vec2 action, Goal goal) {
  if (!std::isfinite(action.x) || !std::isfinite(action.y)) {
    throw ContractError("step: non-finite action");
  }
  const double ax = std::clamp(action.x, -env.a_max, env.a_max);
  const double ay = std::clamp(action.y, -env.a_max, env.a_max);
  const double keep = 1.0 - env.drag;

  Vec2 vel{std::clamp(keep * (state.vel.x + ax * env.dt), -env.v_max, env.v_max),
           std::clamp(keep * (state.vel.y + ay * env.dt), -env.v_max, env.v_max)};
  Vec2 pos = state.pos;

  // Axis by axis: a move that would leave free space is cancelled and that
  // velocity component zeroed.
  const Vec2 try_x{pos.x + vel.x * env.dt, pos.y};
  if (is_free(env, try_x)) {
    pos = try_x;
  } else {
    vel.x = 0.0;
  }
  const Vec2 try_y{pos.x, pos.y + vel.y * env.dt};
  if (is_free(env, try_y)) {
    pos = try_y;
  } else {
    vel.y = 0.0;
  }

  StepResult out;
  out.next = EnvState{pos, vel};
  out.achieved = achieved_goal(out.next);
  out.reward = reward(env, out.next, goal);
  out.reached = reached(env, out.next, goal);
  return out;
}

Goal achieved_goal(const EnvState& state) { return state.pos; }

bool reached(const EnvConfig& env, const EnvState& state, Goal goal) {
  return distance(achieved_goal(state), goal) <= env.success_radius;
}

double reward(const EnvConfig& env, const EnvState& next, Goal goal) {
  if (env.reward == RewardKind::dense) return -distance(achieved_goal(next), goal);
  return reached(env, next, goal) ? 0.0 : -1.0;
}

std::array<double, kStateDim> observe_state(const EnvConfig& env, const EnvState& state) {
  return {2.0 * state.pos.x - 1.0, 2.0 * state.pos.y - 1.0, state.vel.x / env.v_max,
          state.vel.y / env.v_max};
}

std::array<double, kGoalDim> observe_goal(Goal goal) {
  return {2.0 * goal.x - 1.0, 2.0 * goal.y - 1.0};
}

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::point_reach: return "point_reach";
    case EnvKind::u_maze: return "u_maze";
    case EnvKind::drag_world: return "drag_world";
  }
  return "?";
}

std::string to_string(RewardKind kind) { return kind == RewardKind::sparse ? "sparse" : "dense"; }

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::full: return "full";
    case RegionKind::left: return "left";
    case RegionKind::right: return "right";
    case RegionKind::near: return "near";
    case RegionKind::far: return "far";
  }
  return "?";
}

EnvKind parse_env_kind(const std::string& s) {
  if (s == "point_reach") return EnvKind::point_reach;
  if (s == "u_maze") return EnvKind::u_maze;
  if (s == "drag_world") return EnvKind::drag_world;
  throw ConfigError("unknown env kind '" + s + "' (expected point_reach, u_maze, drag_world)");
}

RewardKind parse_reward_kind(const std::string& s) {
  if (s == "sparse") return RewardKind::sparse;
  if (s == "dense") return RewardKind::dense;
  throw ConfigError("unknown reward kind '" + s + "' (expected sparse, dense)");
}

RegionKind parse_region_kind(const std::string& s) {
  if (s == "full") return RegionKind::full;
  if (s == "left") return RegionKind::left;
  if (s == "right") return RegionKind::right;
  if (s == "near") return RegionKind::near;
  if (s == "far") return RegionKind::far;
  throw ConfigError("unknown goal region '" + s + "' (expected full, left, right, near, far)");
}

}  // namespace goalcraft
