#include "lyapnav/shaping.hpp"

#include <cmath>
#include <string>

#include "lyapnav/error.hpp"

namespace lyapnav::shaping {

void validate(const ShapingConfig& cfg) {
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) {
    throw ConfigError("shaping.eta = " + std::to_string(cfg.eta) + " is outside [0, 1]");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw ConfigError("gamma = " + std::to_string(cfg.gamma) + " is outside (0, 1]");
  }
}

double shape_reward(double r_current, double r_next, const ShapingConfig& cfg) {
  if (!std::isfinite(r_current) || !std::isfinite(r_next)) {
    throw NumericError("shape_reward: non-finite reward");
  }
  return r_current + cfg.eta * (cfg.gamma * r_next - r_current);
}

std::vector<double> shape_trajectory(std::span<const double> rewards, const ShapingConfig& cfg) {
  if (rewards.empty()) throw ConfigError("shape_trajectory: empty reward sequence");
  if (!cfg.enabled) return {rewards.begin(), rewards.end()};
  std::vector<double> out(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const double next = t + 1 < rewards.size() ? rewards[t + 1] : 0.0;
    out[t] = shape_reward(rewards[t], next, cfg);
  }
  return out;
}

double shaped_td_target(double r_next, double value_next, bool done, double gamma) {
  if (!std::isfinite(r_next) || !std::isfinite(value_next) || !std::isfinite(gamma)) {
    throw NumericError("shaped_td_target: non-finite input");
  }
  return done ? r_next : r_next + gamma * value_next;
}

std::vector<double> shaped_advantages(std::span<const double> shaped_rewards,
                                      std::span<const double> values, double gamma) {
  if (values.size() != shaped_rewards.size() + 1) {
    throw DimensionError("shaped_advantages values (rewards + bootstrap)",
                         shaped_rewards.size() + 1, values.size());
  }
  const std::size_t horizon = shaped_rewards.size();
  std::vector<double> adv(horizon);
  double ret = values[horizon];
  for (std::size_t t = horizon; t-- > 0;) {
    ret = shaped_rewards[t] + gamma * ret;
    adv[t] = ret - values[t];
  }
  return adv;
}

}  // namespace lyapnav::shaping
