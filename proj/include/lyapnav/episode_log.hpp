#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lyapnav/envsim.hpp"

namespace lyapnav {

struct EpisodeRecord {
  int episode = 0;
  double reward = 0.0;  // sum of raw rewards, never shaped
  int steps = 0;
  envsim::Terminal terminal = envsim::Terminal::running;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> episodes;
  std::uint64_t seed = 0;
  std::string algorithm;  // "ddpg" | "ppo"
  bool shaping = false;
  std::string config_hash;
  double wall_clock_seconds = 0.0;
};

/// Invoked after every finished episode; throwing from it aborts training.
using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

}  // namespace lyapnav
