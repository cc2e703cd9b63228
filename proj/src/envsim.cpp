#include "lyapnav/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lyapnav/error.hpp"
#include "lyapnav/rng.hpp"

namespace lyapnav::envsim {
namespace {

constexpr double kPi = std::numbers::pi;

double distance(Vec2 a, Vec2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool inside_arena(Vec2 p, double half_extent) noexcept {
  return std::abs(p.x) < half_extent && std::abs(p.y) < half_extent;
}

// Nearest non-negative hit parameter of a unit ray against a circle, or +inf.
double ray_circle(Vec2 origin, Vec2 dir, const Obstacle& obstacle) noexcept {
  const double fx = origin.x - obstacle.center.x;
  const double fy = origin.y - obstacle.center.y;
  const double c = fx * fx + fy * fy - obstacle.radius * obstacle.radius;
  if (c <= 0.0) return 0.0;
  const double b = fx * dir.x + fy * dir.y;
  if (b >= 0.0) return std::numeric_limits<double>::infinity();  // moving away
  const double disc = b * b - c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  return -b - std::sqrt(disc);
}

double ray_walls(Vec2 origin, Vec2 dir, double half_extent) noexcept {
  double t = std::numeric_limits<double>::infinity();
  if (dir.x > 0.0) t = std::min(t, (half_extent - origin.x) / dir.x);
  if (dir.x < 0.0) t = std::min(t, (-half_extent - origin.x) / dir.x);
  if (dir.y > 0.0) t = std::min(t, (half_extent - origin.y) / dir.y);
  if (dir.y < 0.0) t = std::min(t, (-half_extent - origin.y) / dir.y);
  return std::max(t, 0.0);
}

}  // namespace

void validate(const World& w) {
  auto fail = [](const std::string& msg) { throw ConfigError("world: " + msg); };
  if (!(w.arena_half_extent > 0.0)) fail("arena_half_extent must be > 0");
  if (!(w.goal_radius > 0.0)) fail("goal_radius must be > 0");
  if (!(w.robot_radius >= 0.0)) fail("robot_radius must be >= 0");
  if (!(w.collision_distance >= 0.0)) fail("collision_distance must be >= 0");
  if (!(w.max_linear_velocity > 0.0)) fail("max_linear_velocity must be > 0");
  if (!(w.max_angular_velocity > 0.0)) fail("max_angular_velocity must be > 0");
  if (!(w.lidar_max_range > 0.0)) fail("lidar_max_range must be > 0");
  if (!(w.dt > 0.0)) fail("dt must be > 0");
  if (w.max_steps_per_episode < 1) fail("max_steps_per_episode must be >= 1");
  if (!(w.heading_jitter >= 0.0 && w.heading_jitter <= kPi)) fail("heading_jitter must be in [0, pi]");
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    const auto& o = w.obstacles[i];
    if (!(o.radius > 0.0)) fail("obstacle " + std::to_string(i) + " radius must be > 0");
    if (!inside_arena(o.center, w.arena_half_extent)) {
      fail("obstacle " + std::to_string(i) + " lies outside the arena");
    }
    if (distance(o.center, w.goal) - o.radius < w.goal_radius + w.robot_radius) {
      fail("goal is within goal_radius + robot_radius of obstacle " + std::to_string(i));
    }
  }
  if (!inside_arena(w.goal, w.arena_half_extent)) fail("goal lies outside the arena");
  if (!inside_arena(w.spawn, w.arena_half_extent)) fail("spawn lies outside the arena");
  if (clearance(RobotPose{w.spawn.x, w.spawn.y, 0.0}, w) < w.collision_distance) {
    fail("spawn pose collides with an obstacle or wall");
  }
}

std::array<double, kStateDim> Observation::flatten() const noexcept {
  std::array<double, kStateDim> out{};
  std::copy(lidar.begin(), lidar.end(), out.begin());
  out[kLidarBeams] = goal_distance;
  out[kLidarBeams + 1] = goal_bearing;
  return out;
}

std::array<double, kStateDim> Observation::features(const World& world) const noexcept {
  std::array<double, kStateDim> out{};
  for (std::size_t k = 0; k < kLidarBeams; ++k) out[k] = lidar[k] / world.lidar_max_range;
  out[kLidarBeams] = goal_distance / (2.0 * std::numbers::sqrt2 * world.arena_half_extent);
  out[kLidarBeams + 1] = goal_bearing / kPi;
  return out;
}

std::string_view terminal_name(Terminal t) noexcept {
  switch (t) {
    case Terminal::running:
      return "running";
    case Terminal::goal_reached:
      return "goal_reached";
    case Terminal::collided:
      return "collided";
    case Terminal::timed_out:
      return "timed_out";
  }
  return "unknown";
}

Terminal parse_terminal(std::string_view name) {
  for (Terminal t : {Terminal::running, Terminal::goal_reached, Terminal::collided,
                     Terminal::timed_out}) {
    if (terminal_name(t) == name) return t;
  }
  throw ConfigError("unknown terminal tag '" + std::string(name) + "'");
}

double wrap_angle(double angle) noexcept {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Action clamp_action(const Action& a, const World& w) noexcept {
  return {std::clamp(a.linear_velocity, 0.0, w.max_linear_velocity),
          std::clamp(a.angular_velocity, -w.max_angular_velocity, w.max_angular_velocity)};
}

Action scale_action(std::span<const double> u, const World& w) {
  if (u.size() != kActionDim) throw DimensionError("normalized action", kActionDim, u.size());
  return {w.max_linear_velocity * (u[0] + 1.0) * 0.5, w.max_angular_velocity * u[1]};
}

RobotPose kinematics_update(const RobotPose& pose, const Action& action, double dt,
                            double arena_half_extent) {
  if (!std::isfinite(action.linear_velocity) || !std::isfinite(action.angular_velocity)) {
    throw NumericError("non-finite action");
  }
  RobotPose next;
  next.x = std::clamp(pose.x + action.linear_velocity * dt * std::cos(pose.heading),
                      -arena_half_extent, arena_half_extent);
  next.y = std::clamp(pose.y + action.linear_velocity * dt * std::sin(pose.heading),
                      -arena_half_extent, arena_half_extent);
  next.heading = wrap_angle(pose.heading + action.angular_velocity * dt);
  return next;
}

std::array<double, kLidarBeams> lidar_scan(const RobotPose& pose, const World& world) {
  std::array<double, kLidarBeams> ranges{};
  const Vec2 origin{pose.x, pose.y};
  for (std::size_t k = 0; k < kLidarBeams; ++k) {
    const double angle = pose.heading + 2.0 * kPi * static_cast<double>(k) / kLidarBeams;
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    double t = ray_walls(origin, dir, world.arena_half_extent);
    for (const auto& obstacle : world.obstacles) t = std::min(t, ray_circle(origin, dir, obstacle));
    ranges[k] = std::min(t, world.lidar_max_range);
  }
  return ranges;
}

Observation observe(const RobotPose& pose, const World& world) {
  Observation obs;
  obs.lidar = lidar_scan(pose, world);
  obs.goal_distance = distance({pose.x, pose.y}, world.goal);
  obs.goal_bearing =
      wrap_angle(std::atan2(world.goal.y - pose.y, world.goal.x - pose.x) - pose.heading);
  return obs;
}

double clearance(const RobotPose& pose, const World& world) noexcept {
  const double h = world.arena_half_extent;
  double c = std::min(h - std::abs(pose.x), h - std::abs(pose.y));
  for (const auto& o : world.obstacles) {
    c = std::min(c, distance({pose.x, pose.y}, o.center) - o.radius);
  }
  return c;
}

double reward_fn(double prev_goal_distance, double new_goal_distance, Terminal terminal,
                 const RewardParams& p) {
  double r = p.progress_scale * (prev_goal_distance - new_goal_distance) - p.step_penalty;
  if (terminal == Terminal::goal_reached) r += p.goal_bonus;
  if (terminal == Terminal::collided) r -= p.collision_penalty;
  return r;
}

ResetResult reset(const World& world, std::uint64_t seed) {
  validate(world);
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(-world.heading_jitter, world.heading_jitter);
  RobotPose pose{world.spawn.x, world.spawn.y, wrap_angle(world.spawn_heading + jitter(rng))};
  return {pose, observe(pose, world)};
}

StepOutcome step(const RobotPose& pose, const Action& action, const World& world,
                 int steps_elapsed) {
  const Action clamped = clamp_action(action, world);
  const RobotPose next = kinematics_update(pose, clamped, world.dt, world.arena_half_extent);
  const double prev_distance = distance({pose.x, pose.y}, world.goal);
  StepOutcome out{next, {}};
  out.result.observation = observe(next, world);
  Terminal terminal = Terminal::running;
  if (clearance(next, world) < world.collision_distance) {
    terminal = Terminal::collided;
  } else if (out.result.observation.goal_distance < world.goal_radius) {
    terminal = Terminal::goal_reached;
  } else if (steps_elapsed + 1 >= world.max_steps_per_episode) {
    terminal = Terminal::timed_out;
  }
  out.result.terminal = terminal;
  out.result.reward =
      reward_fn(prev_distance, out.result.observation.goal_distance, terminal, world.reward);
  return out;
}

Environment::Environment(World world) : world_(std::move(world)) { validate(world_); }

Observation Environment::reset(std::uint64_t seed) {
  auto r = envsim::reset(world_, seed);
  pose_ = r.pose;
  steps_ = 0;
  terminal_ = Terminal::running;
  started_ = true;
  return r.observation;
}

StepResult Environment::step(const Action& action) {
  if (!started_) throw UsageError("step called before reset");
  if (terminal_ != Terminal::running) {
    throw UsageError("step called after terminal '" + std::string(terminal_name(terminal_)) +
                     "'; reset first");
  }
  auto out = envsim::step(pose_, action, world_, steps_);
  pose_ = out.pose;
  ++steps_;
  terminal_ = out.result.terminal;
  return out.result;
}

}  // namespace lyapnav::envsim
