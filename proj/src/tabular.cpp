#include "lyapnav/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "lyapnav/error.hpp"

namespace lyapnav::tabular {
namespace {

std::vector<std::size_t> greedy_policy(const DeterministicMdp& mdp, const std::vector<double>& q) {
  std::vector<std::size_t> policy(mdp.state_count, 0);
  for (std::size_t s = 0; s < mdp.state_count; ++s) {
    if (mdp.terminal[s]) continue;
    for (std::size_t a = 1; a < mdp.action_count; ++a) {
      if (q[s * mdp.action_count + a] > q[s * mdp.action_count + policy[s]]) policy[s] = a;
    }
  }
  return policy;
}

template <class Backup>
ValueIterationResult iterate(const DeterministicMdp& mdp, double tolerance,
                             std::size_t max_iterations, Backup backup) {
  const std::size_t n = mdp.state_count * mdp.action_count;
  if (mdp.successor.size() != n || mdp.reward.size() != n ||
      mdp.terminal.size() != mdp.state_count) {
    throw ConfigError("tabular MDP tables do not match state_count x action_count");
  }
  ValueIterationResult result;
  result.q.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  while (result.iterations < max_iterations) {
    double change = 0.0;
    for (std::size_t s = 0; s < mdp.state_count; ++s) {
      for (std::size_t a = 0; a < mdp.action_count; ++a) {
        const std::size_t i = s * mdp.action_count + a;
        next[i] = mdp.terminal[s] ? 0.0 : backup(s, a, result.q);
        change = std::max(change, std::abs(next[i] - result.q[i]));
      }
    }
    result.q.swap(next);
    ++result.iterations;
    if (change < tolerance) {
      result.converged = true;
      break;
    }
  }
  result.greedy = greedy_policy(mdp, result.q);
  return result;
}

}  // namespace

DeterministicMdp make_chain(std::size_t n, double goal_reward, double step_reward) {
  if (n < 2) throw ConfigError("chain needs at least two states");
  DeterministicMdp mdp;
  mdp.state_count = n;
  mdp.action_count = 2;
  mdp.terminal.assign(n, false);
  mdp.terminal[n - 1] = true;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      const std::size_t s2 = a == 0 ? (s == 0 ? 0 : s - 1) : std::min(n - 1, s + 1);
      mdp.successor.push_back(mdp.terminal[s] ? s : s2);
      mdp.reward.push_back(!mdp.terminal[s] && s2 == n - 1 ? goal_reward : step_reward);
    }
  }
  return mdp;
}

ValueIterationResult value_iteration(const DeterministicMdp& mdp, double gamma, double tolerance,
                                     std::size_t max_iterations) {
  return iterate(mdp, tolerance, max_iterations,
                 [&](std::size_t s, std::size_t a, const std::vector<double>& q) {
                   const std::size_t s2 = mdp.next(s, a);
                   double cont = 0.0;
                   if (!mdp.terminal[s2]) {
                     cont = q[s2 * mdp.action_count];
                     for (std::size_t b = 1; b < mdp.action_count; ++b) {
                       cont = std::max(cont, q[s2 * mdp.action_count + b]);
                     }
                   }
                   return mdp.r(s, a) + gamma * cont;
                 });
}

ValueIterationResult shaped_value_iteration(const DeterministicMdp& mdp,
                                            const shaping::ShapingConfig& cfg, double tolerance,
                                            std::size_t max_iterations) {
  shaping::validate(cfg);
  const double eta = cfg.enabled ? cfg.eta : 0.0;
  return iterate(mdp, tolerance, max_iterations,
                 [&](std::size_t s, std::size_t a, const std::vector<double>& q) {
                   const std::size_t s2 = mdp.next(s, a);
                   double cont = 0.0;
                   if (!mdp.terminal[s2]) {
                     cont = eta * mdp.r(s2, 0) + q[s2 * mdp.action_count];
                     for (std::size_t b = 1; b < mdp.action_count; ++b) {
                       cont = std::max(cont, eta * mdp.r(s2, b) + q[s2 * mdp.action_count + b]);
                     }
                   }
                   return (1.0 - eta) * mdp.r(s, a) + cfg.gamma * cont;
                 });
}

}  // namespace lyapnav::tabular
