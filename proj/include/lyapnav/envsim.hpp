#pragma once

// Deterministic 2D navigation task: a unicycle robot in a square arena with
// cylindrical obstacles, a 360 degree 24-beam range scanner, and a goal disc.

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace lyapnav::envsim {

inline constexpr std::size_t kLidarBeams = 24;
inline constexpr std::size_t kStateDim = kLidarBeams + 2;
inline constexpr std::size_t kActionDim = 2;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct RewardParams {
  double progress_scale = 10.0;
  double step_penalty = 0.05;
  double goal_bonus = 100.0;
  double collision_penalty = 100.0;
  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

struct World {
  double arena_half_extent = 2.0;
  std::vector<Obstacle> obstacles{{{1.0, 1.0}, 0.15},
                                  {{-1.0, 1.0}, 0.15},
                                  {{-1.0, -1.0}, 0.15},
                                  {{1.0, -1.0}, 0.15}};
  Vec2 goal{1.6, 1.6};
  double goal_radius = 0.2;
  double robot_radius = 0.105;
  double collision_distance = 0.12;
  Vec2 spawn{-1.6, -1.6};
  double spawn_heading = std::numbers::pi / 4.0;
  double heading_jitter = std::numbers::pi / 8.0;
  double max_linear_velocity = 0.22;
  double max_angular_velocity = 2.84;
  double lidar_max_range = 3.5;
  double dt = 0.1;
  int max_steps_per_episode = 500;
  RewardParams reward;

  friend bool operator==(const World&, const World&) = default;
};

/// Throws ConfigError naming the first violated constraint.
void validate(const World& world);

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  friend bool operator==(const RobotPose&, const RobotPose&) = default;
};

struct Observation {
  std::array<double, kLidarBeams> lidar{};
  double goal_distance = 0.0;
  double goal_bearing = 0.0;

  /// Raw 26 values: ranges in meters, then distance, then bearing.
  std::array<double, kStateDim> flatten() const noexcept;

  /// Network input: ranges / lidar_max_range, distance / arena diagonal, bearing / pi.
  std::array<double, kStateDim> features(const World& world) const noexcept;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Action {
  double linear_velocity = 0.0;
  double angular_velocity = 0.0;
};

enum class Terminal { running, goal_reached, collided, timed_out };

std::string_view terminal_name(Terminal t) noexcept;
/// Inverse of terminal_name; throws ConfigError for unknown names.
Terminal parse_terminal(std::string_view name);

struct StepResult {
  Observation observation;
  double reward = 0.0;
  Terminal terminal = Terminal::running;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle) noexcept;

Action clamp_action(const Action& action, const World& world) noexcept;

/// Maps a normalized action u in [-1, 1]^2 onto the velocity bounds:
/// v = v_max (u0 + 1) / 2, w = w_max u1.
Action scale_action(std::span<const double> normalized, const World& world);

/// Unicycle Euler step; position clamped to the arena. Throws NumericError on non-finite input.
RobotPose kinematics_update(const RobotPose& pose, const Action& action, double dt,
                            double arena_half_extent);

/// Range per beam k at heading + 2 pi k / 24, nearest obstacle or wall hit, capped.
std::array<double, kLidarBeams> lidar_scan(const RobotPose& pose, const World& world);

Observation observe(const RobotPose& pose, const World& world);

/// Distance from the robot center to the nearest obstacle surface or wall.
double clearance(const RobotPose& pose, const World& world) noexcept;

double reward_fn(double prev_goal_distance, double new_goal_distance, Terminal terminal,
                 const RewardParams& params);

struct ResetResult {
  RobotPose pose;
  Observation observation;
};

ResetResult reset(const World& world, std::uint64_t seed);

struct StepOutcome {
  RobotPose pose;
  StepResult result;
};

/// One transition. `steps_elapsed` counts steps already taken this episode.
StepOutcome step(const RobotPose& pose, const Action& action, const World& world,
                 int steps_elapsed);

/// Episode state wrapper around the free functions; refuses to step after a terminal.
class Environment {
 public:
  explicit Environment(World world);

  const World& world() const noexcept { return world_; }
  const RobotPose& pose() const noexcept { return pose_; }
  int steps_elapsed() const noexcept { return steps_; }
  bool done() const noexcept { return terminal_ != Terminal::running; }

  Observation reset(std::uint64_t seed);
  StepResult step(const Action& action);

 private:
  World world_;
  RobotPose pose_;
  int steps_ = 0;
  Terminal terminal_ = Terminal::running;
  bool started_ = false;
};

}  // namespace lyapnav::envsim
