#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairplan/allocation.hpp"

namespace fairplan {

struct SolveResult {
  AllocationState final_state;
  double total_return = 0.0;
  int decision_steps = 0;
  double wall_ms = 0.0;
  std::string strategy;
};

/// Immediate reward of every legal action, in ascending action order.
std::vector<std::pair<int, double>> immediate_rewards(const AllocationState& state);

/// Argmax of immediate reward; ties go to the lowest action index.
int greedy_action(const AllocationState& state);
SolveResult greedy_solve(const AllocationState& start);

SolveResult random_solve(const AllocationState& start, std::uint64_t seed);

struct MctsOptions {
  int rollouts_per_step = 3;
  double exploration = std::sqrt(2.0);
  std::uint64_t seed = 0;
};

/// UCT search with uniform random rollouts. Before each committed action it
/// runs `rollouts_per_step` iterations from the current root, then commits
/// the most visited child (ties: higher mean return, then lower action).
/// The subtree under the committed child is kept for the next step.
SolveResult mcts_solve(const AllocationState& start, const MctsOptions& options = {});

class LinearPolicy;
/// Masked argmax over policy scores; ties go to the lowest action index.
SolveResult rl_solve(const AllocationState& start, const LinearPolicy& policy);

}  // namespace fairplan
