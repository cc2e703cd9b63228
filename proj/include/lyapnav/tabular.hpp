#pragma once

// Exact tabular check of what the shaping transform does to greedy policies.
// Used by tests on small deterministic MDPs (e.g. a 5-state chain).

#include <cstddef>
#include <vector>

#include "lyapnav/shaping.hpp"

namespace lyapnav::tabular {

/// Deterministic finite MDP. Episodes end on entering a terminal state.
struct DeterministicMdp {
  std::size_t state_count = 0;
  std::size_t action_count = 0;
  std::vector<std::size_t> successor;  // [s * action_count + a]
  std::vector<double> reward;          // [s * action_count + a]
  std::vector<bool> terminal;          // [s]

  std::size_t next(std::size_t s, std::size_t a) const { return successor[s * action_count + a]; }
  double r(std::size_t s, std::size_t a) const { return reward[s * action_count + a]; }
};

/// States 0..n-1, actions {0: left, 1: right}; left at 0 stays. State n-1 is terminal.
/// Entering n-1 pays `goal_reward`, every other transition pays `step_reward`.
DeterministicMdp make_chain(std::size_t n, double goal_reward, double step_reward);

struct ValueIterationResult {
  std::vector<double> q;              // [s * action_count + a]
  std::vector<std::size_t> greedy;    // argmax_a q, lowest index on ties; 0 for terminal states
  std::size_t iterations = 0;
  bool converged = false;
};

/// Q(s,a) = R(s,a) + gamma [s' not terminal] max_a' Q(s',a').
ValueIterationResult value_iteration(const DeterministicMdp& mdp, double gamma, double tolerance,
                                     std::size_t max_iterations);

/// Same backup on the shaped stream, whose successor reward is R(s', a') for
/// the action taken next:
///   Q'(s,a) = (1 - eta) R(s,a) + gamma [s' not terminal] max_a' (eta R(s',a') + Q'(s',a')).
/// This is the action value a critic learns from shaped rewards when the
/// continuation acts optimally. With eta = 0 it reduces to value_iteration.
ValueIterationResult shaped_value_iteration(const DeterministicMdp& mdp,
                                            const shaping::ShapingConfig& cfg, double tolerance,
                                            std::size_t max_iterations);

}  // namespace lyapnav::tabular
